#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coarseopt/objective.hpp"

namespace coarseopt {

/// Stencil-search setup: start point, direction basis (defaults to the unit
/// coordinate basis), a strictly decreasing scale ladder, and an evaluation
/// budget.
struct SearchSpec {
  std::vector<double> x0;
  std::vector<std::vector<double>> directions;  // empty -> unit basis
  std::vector<double> scales{1.0, 0.5, 0.25, 0.125};
  std::size_t max_evals{100000};
  ObjectiveFn objective;
};

struct IterationRecord {
  std::size_t iteration{0};
  double scale{0.0};
  double best_f{0.0};
  std::size_t eval_count{0};
  std::string event;
};

struct SearchTrace {
  std::vector<double> best_x;
  double best_f{std::numeric_limits<double>::infinity()};
  std::size_t eval_count{0};
  bool budget_exhausted{false};
  bool restart_cap_hit{false};
  std::size_t passes{1};
  std::vector<IterationRecord> records;
};

namespace detail {

inline void validate_spec(const SearchSpec& s) {
  if (s.x0.empty()) throw std::invalid_argument("search: empty start point");
  if (!s.objective) throw std::invalid_argument("search: no objective");
  if (s.scales.empty()) throw std::invalid_argument("search: empty scale ladder");
  for (std::size_t i = 0; i < s.scales.size(); ++i) {
    if (!(s.scales[i] > 0)) throw std::invalid_argument("search: scales must be > 0");
    if (i > 0 && !(s.scales[i] < s.scales[i - 1]))
      throw std::invalid_argument("search: scales must be strictly decreasing");
  }
  for (const auto& d : s.directions)
    if (d.size() != s.x0.size())
      throw std::invalid_argument("search: direction dimension mismatch");
}

inline std::vector<std::vector<double>> basis_or(const SearchSpec& s) {
  if (!s.directions.empty()) return s.directions;
  std::vector<std::vector<double>> dirs(s.x0.size(),
                                        std::vector<double>(s.x0.size(), 0.0));
  for (std::size_t j = 0; j < s.x0.size(); ++j) dirs[j][j] = 1.0;
  return dirs;
}

// Budget-enforcing wrapper; tracks the running best over every evaluation.
struct Evaluator {
  const ObjectiveFn& f;
  std::size_t max_evals;
  std::size_t count{0};
  bool exhausted{false};
  std::vector<double> best_x;
  double best_f{std::numeric_limits<double>::infinity()};

  std::optional<double> operator()(const std::vector<double>& x) {
    if (count >= max_evals) {
      exhausted = true;
      return std::nullopt;
    }
    ++count;
    const double v = f(x);
    if (v < best_f) {
      best_f = v;
      best_x = x;
    }
    return v;
  }

  SearchTrace finish(std::vector<IterationRecord> records) const {
    SearchTrace t;
    t.best_x = best_x;
    t.best_f = best_f;
    t.eval_count = count;
    t.budget_exhausted = exhausted;
    t.records = std::move(records);
    return t;
  }
};

inline std::vector<double> axpy(std::vector<double> x, double a,
                                const std::vector<double>& v) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * v[i];
  return x;
}

}  // namespace detail

/// Hooke-Jeeves pattern search. Exploratory sweeps probe +-s_i v_j against
/// the current incumbent; an empty sweep drops to the next scale; a
/// successful sweep proposes the doubled pattern point x_c = x_0 + 2 d,
/// accepted when it beats the sweep result.
inline SearchTrace hooke_jeeves(const SearchSpec& spec) {
  detail::validate_spec(spec);
  const auto dirs = detail::basis_or(spec);
  detail::Evaluator ev{spec.objective, spec.max_evals};
  std::vector<IterationRecord> rec;

  auto f0 = ev(spec.x0);
  if (!f0) return ev.finish(std::move(rec));
  std::vector<double> base = spec.x0;
  double fbase = *f0;

  std::size_t iter = 0;
  std::size_t si = 0;
  while (si < spec.scales.size()) {
    const double s = spec.scales[si];
    std::vector<double> xs = base;
    double fs = fbase;
    bool moved = false;
    for (const auto& v : dirs) {
      auto fp = ev(detail::axpy(xs, s, v));
      if (!fp) return ev.finish(std::move(rec));
      if (*fp < fs) {
        xs = detail::axpy(xs, s, v);
        fs = *fp;
        moved = true;
        continue;
      }
      auto fm = ev(detail::axpy(xs, -s, v));
      if (!fm) return ev.finish(std::move(rec));
      if (*fm < fs) {
        xs = detail::axpy(xs, -s, v);
        fs = *fm;
        moved = true;
      }
    }
    if (!moved) {
      rec.push_back({iter++, s, ev.best_f, ev.count, "scale-drop"});
      ++si;
      continue;
    }
    // pattern move: double the displacement of the successful sweep
    std::vector<double> xc(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) xc[i] = xs[i] + (xs[i] - base[i]);
    auto fc = ev(xc);
    if (!fc) {
      rec.push_back({iter++, s, ev.best_f, ev.count, "move"});
      return ev.finish(std::move(rec));
    }
    if (*fc < fs) {
      xs = std::move(xc);
      fs = *fc;
      rec.push_back({iter, s, std::min(ev.best_f, fs), ev.count, "pattern"});
    } else {
      rec.push_back({iter, s, std::min(ev.best_f, fs), ev.count, "move"});
    }
    ++iter;
    base = std::move(xs);
    fbase = fs;
  }
  return ev.finish(std::move(rec));
}

/// Central-difference gradient with step h along the unit basis.
inline std::vector<double> fd_gradient(const ObjectiveFn& f,
                                       const std::vector<double>& x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    auto xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

/// Implicit filtering: per scale, a central-difference stencil yields a
/// gradient estimate; the descent step is backtracked and capped so no
/// component moves more than the scale. The scale drops when no stencil
/// point improves on the incumbent.
inline SearchTrace implicit_filtering(const SearchSpec& spec) {
  detail::validate_spec(spec);
  const auto dirs = detail::basis_or(spec);
  detail::Evaluator ev{spec.objective, spec.max_evals};
  std::vector<IterationRecord> rec;

  auto f0 = ev(spec.x0);
  if (!f0) return ev.finish(std::move(rec));
  std::vector<double> x = spec.x0;
  double fx = *f0;

  std::size_t iter = 0;
  for (const double s : spec.scales) {
    for (std::size_t inner = 0; inner < 1000; ++inner) {
      double best_sten = std::numeric_limits<double>::infinity();
      std::vector<double> best_sten_x;
      std::vector<double> grad(dirs.size());
      bool out = false;
      for (std::size_t j = 0; j < dirs.size() && !out; ++j) {
        const auto xp = detail::axpy(x, s, dirs[j]);
        const auto xm = detail::axpy(x, -s, dirs[j]);
        auto fp = ev(xp);
        if (!fp) { out = true; break; }
        auto fm = ev(xm);
        if (!fm) { out = true; break; }
        grad[j] = (*fp - *fm) / (2.0 * s);
        if (*fp < best_sten) { best_sten = *fp; best_sten_x = xp; }
        if (*fm < best_sten) { best_sten = *fm; best_sten_x = xm; }
      }
      if (out) return ev.finish(std::move(rec));
      if (best_sten >= fx) {
        rec.push_back({iter++, s, ev.best_f, ev.count, "stencil-fail"});
        break;  // next scale
      }
      // descent direction in ambient space, capped at the scale
      std::vector<double> step(x.size(), 0.0);
      for (std::size_t j = 0; j < dirs.size(); ++j)
        for (std::size_t i = 0; i < x.size(); ++i) step[i] -= grad[j] * dirs[j][i];
      double mx = 0.0;
      for (double c : step) mx = std::max(mx, std::abs(c));
      if (mx > s)
        for (double& c : step) c *= s / mx;

      bool found = false;
      double lam = 1.0;
      for (int ls = 0; ls < 8 && !found; ++ls, lam *= 0.5) {
        auto xt = x;
        for (std::size_t i = 0; i < x.size(); ++i) xt[i] += lam * step[i];
        auto ft = ev(xt);
        if (!ft) return ev.finish(std::move(rec));
        if (*ft < fx) {
          x = std::move(xt);
          fx = *ft;
          found = true;
        }
      }
      if (!found) {
        x = best_sten_x;  // improves by the stencil test above
        fx = best_sten;
      }
      rec.push_back({iter++, s, ev.best_f, ev.count, found ? "descent" : "stencil-step"});
    }
  }
  return ev.finish(std::move(rec));
}

/// Nelder-Mead simplex with (reflect, expand, contract, shrink) =
/// (1, 2, 1/2, 1/2). Initial simplex edge = largest scale; terminates when
/// the simplex diameter falls below the smallest scale or the budget is hit.
inline SearchTrace nelder_mead(const SearchSpec& spec) {
  detail::validate_spec(spec);
  detail::Evaluator ev{spec.objective, spec.max_evals};
  std::vector<IterationRecord> rec;
  const std::size_t n = spec.x0.size();

  std::vector<std::vector<double>> pts(n + 1, spec.x0);
  std::vector<double> fv(n + 1);
  for (std::size_t j = 0; j < n; ++j) pts[j + 1][j] += spec.scales.front();
  for (std::size_t j = 0; j <= n; ++j) {
    auto f = ev(pts[j]);
    if (!f) return ev.finish(std::move(rec));
    fv[j] = *f;
  }

  std::vector<std::size_t> ord(n + 1);
  std::size_t iter = 0;
  for (;;) {
    for (std::size_t j = 0; j <= n; ++j) ord[j] = j;
    std::sort(ord.begin(), ord.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    double diam = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        diam = std::max(diam, std::abs(pts[ord[0]][i] - pts[j][i]));
    if (diam < spec.scales.back()) {
      rec.push_back({iter, diam, ev.best_f, ev.count, "converged"});
      break;
    }

    const std::size_t worst = ord[n];
    std::vector<double> centroid(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[ord[j]][i] / double(n);

    auto at = [&](double c) {
      std::vector<double> y(n);
      for (std::size_t i = 0; i < n; ++i)
        y[i] = centroid[i] + c * (centroid[i] - pts[worst][i]);
      return y;
    };

    auto xr = at(1.0);
    auto fr = ev(xr);
    if (!fr) break;
    if (*fr < fv[ord[0]]) {
      auto xe = at(2.0);
      auto fe = ev(xe);
      if (!fe) break;
      if (*fe < *fr) { pts[worst] = std::move(xe); fv[worst] = *fe; }
      else { pts[worst] = std::move(xr); fv[worst] = *fr; }
    } else if (*fr < fv[ord[n - 1]]) {
      pts[worst] = std::move(xr);
      fv[worst] = *fr;
    } else {
      const bool outside = *fr < fv[worst];
      auto xc = at(outside ? 0.5 : -0.5);
      auto fc = ev(xc);
      if (!fc) break;
      if ((outside && *fc <= *fr) || (!outside && *fc < fv[worst])) {
        pts[worst] = std::move(xc);
        fv[worst] = *fc;
      } else {
        // shrink toward the best vertex
        bool out = false;
        for (std::size_t j = 1; j <= n; ++j) {
          auto& pj = pts[ord[j]];
          for (std::size_t i = 0; i < n; ++i)
            pj[i] = pts[ord[0]][i] + 0.5 * (pj[i] - pts[ord[0]][i]);
          auto f = ev(pj);
          if (!f) { out = true; break; }
          fv[ord[j]] = *f;
        }
        if (out) break;
      }
    }
    ++iter;
  }
  return ev.finish(std::move(rec));
}

using Optimizer = std::function<SearchTrace(const SearchSpec&)>;

/// Reruns the optimizer seeded at the previous best (full scale ladder
/// reinstated) until two consecutive passes agree on best_f within
/// agreement_tol (relative, floored at 1), or the restart cap is hit.
inline SearchTrace restart_until_stable(const Optimizer& optimizer, SearchSpec spec,
                                        double agreement_tol = 0.01,
                                        std::size_t max_restarts = 5) {
  if (!(agreement_tol > 0))
    throw std::invalid_argument("restart: agreement_tol must be > 0");
  if (max_restarts < 1)
    throw std::invalid_argument("restart: need at least one pass");

  SearchTrace acc = optimizer(spec);
  acc.passes = 1;
  double prev_f = acc.best_f;
  std::vector<double> seed_x = acc.best_x;

  while (acc.passes < max_restarts) {
    SearchSpec next = spec;
    next.x0 = seed_x;
    SearchTrace t = optimizer(next);
    ++acc.passes;
    acc.eval_count += t.eval_count;
    acc.budget_exhausted = acc.budget_exhausted || t.budget_exhausted;
    for (auto& r : t.records) {
      r.eval_count += acc.eval_count - t.eval_count;
      r.event = "restart." + r.event;
      acc.records.push_back(std::move(r));
    }
    if (t.best_f < acc.best_f) {
      acc.best_f = t.best_f;
      acc.best_x = t.best_x;
    }
    const bool agree =
        std::abs(t.best_f - prev_f) <= agreement_tol * std::max(1.0, std::abs(prev_f));
    prev_f = t.best_f;
    seed_x = t.best_x;
    if (agree) return acc;
  }
  acc.restart_cap_hit = true;
  return acc;
}

/// Noise-floor check for stencil searches: sigma from `reps` repeat
/// evaluations at x0 against the objective change produced by the smallest
/// scale. warn is set when that change is below 3 sigma.
struct NoiseFloorReport {
  double sigma{0.0};
  double median_step_change{0.0};
  bool warn{false};
};

inline NoiseFloorReport noise_floor_check(const ObjectiveFn& f,
                                          const std::vector<double>& x0,
                                          double smallest_scale,
                                          std::size_t reps = 5) {
  NoiseFloorReport r;
  std::vector<double> vals(reps);
  for (auto& v : vals) v = f(x0);
  double mean = 0.0;
  for (double v : vals) mean += v / double(reps);
  double ss = 0.0;
  for (double v : vals) ss += (v - mean) * (v - mean);
  r.sigma = reps > 1 ? std::sqrt(ss / double(reps - 1)) : 0.0;

  std::vector<double> deltas;
  const std::size_t probes = std::min<std::size_t>(x0.size(), 3);
  for (std::size_t j = 0; j < probes; ++j) {
    auto xp = x0;
    xp[j] += smallest_scale;
    deltas.push_back(std::abs(f(xp) - mean));
  }
  std::sort(deltas.begin(), deltas.end());
  r.median_step_change = deltas[deltas.size() / 2];
  r.warn = r.median_step_change < 3.0 * r.sigma;
  return r;
}

}  // namespace coarseopt
