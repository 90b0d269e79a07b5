#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "coarseopt/mechanisms.hpp"
#include "coarseopt/rng.hpp"
#include "coarseopt/state.hpp"

namespace coarseopt {

/// Well-mixed microscopic state: adsorbate counts on an N_l-site lattice.
struct MicroState {
  std::size_t n_sites{0};
  std::array<std::int64_t, 2> counts{};  // NO: {n}; CO: {n_A, n_B}
  std::size_t n_species{0};
  double t{0.0};

  std::int64_t occupied() const {
    std::int64_t s = 0;
    for (std::size_t i = 0; i < n_species; ++i) s += counts[i];
    return s;
  }
  bool valid() const {
    if (n_sites == 0 || n_species == 0) return false;
    for (std::size_t i = 0; i < n_species; ++i)
      if (counts[i] < 0) return false;
    return occupied() <= static_cast<std::int64_t>(n_sites);
  }
};

/// Lifting: coverages rounded to site counts, clock reset. If CO rounding
/// overflows the lattice, the larger count is decremented.
inline MicroState lift(const CoarseState& x, std::size_t n_sites) {
  require_coverages(x, 1e-9);
  if (n_sites == 0) throw std::invalid_argument("lift: n_sites must be >= 1");
  MicroState s;
  s.n_sites = n_sites;
  s.n_species = x.dim();
  for (std::size_t i = 0; i < x.dim(); ++i)
    s.counts[i] = std::llround(std::clamp(x[i], 0.0, 1.0) * double(n_sites));
  while (s.occupied() > static_cast<std::int64_t>(n_sites)) {
    std::size_t big = (s.n_species == 2 && s.counts[1] > s.counts[0]) ? 1 : 0;
    --s.counts[big];
  }
  s.t = 0.0;
  return s;
}

/// Seeded overload; the seed selects nothing today (rounding is
/// deterministic) but keeps the replica-lift call signature uniform.
inline MicroState lift(const CoarseState& x, std::size_t n_sites, const RngSeed&) {
  return lift(x, n_sites);
}

/// Restriction: counts / n_sites.
inline CoarseState restrict_state(const MicroState& s) {
  const double inv = 1.0 / double(s.n_sites);
  if (s.n_species == 1) return CoarseState(double(s.counts[0]) * inv);
  return CoarseState(double(s.counts[0]) * inv, double(s.counts[1]) * inv);
}

// --- propensities ---------------------------------------------------------
// Scaled so coverage expectations obey the mean-field ODEs as N -> inf.

/// NO channels: adsorption, desorption, reaction (consumes one NO).
inline std::array<double, 3> propensities(const MicroState& s, const NOParams& p) {
  const double N = double(s.n_sites);
  const double n = double(s.counts[0]);
  const double vac_frac = (N - n) / N;
  return {p.alpha * (N - n), p.gamma * n, p.k * n * vac_frac * vac_frac};
}

/// CO channels: A adsorption, A desorption, B2 dissociative adsorption
/// (adds two B), reaction (removes one A and one B).
inline std::array<double, 4> propensities(const MicroState& s, const COParams& p) {
  const double N = double(s.n_sites);
  const double nA = double(s.counts[0]);
  const double nB = double(s.counts[1]);
  const double vac_frac = (N - nA - nB) / N;
  return {p.alpha * (N - nA - nB), p.gamma * nA,
          p.beta * N * vac_frac * vac_frac, 4.0 * p.k_r * nA * nB / N};
}

namespace detail {

inline void apply_event(MicroState& s, const NOParams&, std::size_t ch) {
  switch (ch) {
    case 0: ++s.counts[0]; break;
    case 1: --s.counts[0]; break;
    default: --s.counts[0]; break;
  }
}

inline void apply_event(MicroState& s, const COParams&, std::size_t ch) {
  switch (ch) {
    case 0: ++s.counts[0]; break;
    case 1: --s.counts[0]; break;
    case 2:
      // dissociative adsorption needs two vacancies; otherwise the drawn
      // event is rejected and only the clock advances
      if (s.counts[0] + s.counts[1] + 2 <= static_cast<std::int64_t>(s.n_sites)) {
        s.counts[1] += 2;
      }
      break;
    default:
      --s.counts[0];
      --s.counts[1];
      break;
  }
}

}  // namespace detail

/// Gillespie direct-method SSA up to t_end. on_event(state, channel) fires
/// after each applied event. Zero total propensity freezes the state and
/// jumps the clock to t_end. Bit-reproducible for a given stream.
template <class Params, class OnEvent>
MicroState ssa_run_events(MicroState s, const Params& p, double t_end,
                          RngStream& rng, OnEvent&& on_event) {
  if (t_end < s.t) throw std::invalid_argument("ssa_run: t_end < state.t");
  for (;;) {
    const auto a = propensities(s, p);
    double total = 0.0;
    for (double v : a) total += v;
    if (total <= 0.0) {
      s.t = t_end;
      return s;
    }
    const double dt = rng.exponential() / total;
    if (s.t + dt > t_end) {
      s.t = t_end;
      return s;
    }
    s.t += dt;
    double u = rng.uniform01() * total;
    std::size_t ch = 0;
    for (; ch + 1 < a.size(); ++ch) {
      if (u < a[ch]) break;
      u -= a[ch];
    }
    detail::apply_event(s, p, ch);
    on_event(s, ch);
  }
}

template <class Params>
MicroState ssa_run(MicroState s, const Params& p, double t_end, RngStream& rng) {
  return ssa_run_events(std::move(s), p, t_end, rng,
                        [](const MicroState&, std::size_t) {});
}

inline MicroState ssa_run(MicroState s, const MechanismParams& p, double t_end,
                          const RngSeed& seed) {
  RngStream rng(stream_key(seed));
  if (const auto* q = std::get_if<NOParams>(&p)) return ssa_run(std::move(s), *q, t_end, rng);
  return ssa_run(std::move(s), std::get<COParams>(p), t_end, rng);
}

/// SSA with state sampling on the grid s.t + k*dt (k >= 1, capped at t_end).
/// A sample that coincides with an event time reports the pre-event state.
template <class Params, class Sink>
MicroState ssa_run_sampled(MicroState s, const Params& p, double t_end,
                           double dt_sample, RngStream& rng, Sink&& sink) {
  if (t_end < s.t) throw std::invalid_argument("ssa_run: t_end < state.t");
  if (dt_sample <= 0.0) throw std::invalid_argument("ssa_run: dt_sample must be > 0");
  const double t0 = s.t;
  std::size_t k = 1;
  auto flush_until = [&](double tmax) {
    for (; t0 + double(k) * dt_sample <= tmax; ++k) sink(t0 + double(k) * dt_sample, s);
  };
  for (;;) {
    const auto a = propensities(s, p);
    double total = 0.0;
    for (double v : a) total += v;
    if (total <= 0.0) {
      flush_until(t_end);
      s.t = t_end;
      return s;
    }
    const double t_event = s.t + rng.exponential() / total;
    if (t_event > t_end) {
      flush_until(t_end);
      s.t = t_end;
      return s;
    }
    flush_until(t_event);
    s.t = t_event;
    double u = rng.uniform01() * total;
    std::size_t ch = 0;
    for (; ch + 1 < a.size(); ++ch) {
      if (u < a[ch]) break;
      u -= a[ch];
    }
    detail::apply_event(s, p, ch);
  }
}

}  // namespace coarseopt
