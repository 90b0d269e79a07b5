#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "coarseopt/kmc.hpp"
#include "coarseopt/meanfield.hpp"
#include "coarseopt/parallel.hpp"

using namespace coarseopt;
using Catch::Approx;

namespace {

const NOParams kNO{1.0, 0.01, 4.5};
const COParams kCO{1.6, 3.5, 0.04, 1.0};

MicroState no_state(std::size_t n_sites, std::int64_t n, double t = 0.0) {
  MicroState s;
  s.n_sites = n_sites;
  s.n_species = 1;
  s.counts[0] = n;
  s.t = t;
  return s;
}

MicroState co_state(std::size_t n_sites, std::int64_t na, std::int64_t nb) {
  MicroState s;
  s.n_sites = n_sites;
  s.n_species = 2;
  s.counts = {na, nb};
  return s;
}

struct EnsembleStats {
  double mean{0.0};
  double sd{0.0};
  double se{0.0};
};

// ensemble mean/std of final NO coverage over m replicas
EnsembleStats no_ensemble(std::size_t n_sites, double theta0, double t_end,
                          std::size_t m, std::uint64_t master) {
  std::vector<double> finals(m);
  parallel_for(0, m, 2, [&](std::size_t r) {
    RngStream rng(derive_key(master, r));
    auto s = lift(CoarseState(theta0), n_sites);
    s = ssa_run(std::move(s), kNO, t_end, rng);
    finals[r] = restrict_state(s)[0];
  });
  EnsembleStats st;
  for (double v : finals) st.mean += v / double(m);
  double ss = 0.0;
  for (double v : finals) ss += (v - st.mean) * (v - st.mean);
  st.sd = std::sqrt(ss / double(m - 1));
  st.se = st.sd / std::sqrt(double(m));
  return st;
}

}  // namespace

TEST_CASE("propensities: trivial surfaces") {
  const std::size_t N = 1000;
  SECTION("NO full surface: only desorption") {
    const auto a = propensities(no_state(N, N), kNO);
    CHECK(a[0] == 0.0);
    CHECK(a[1] == Approx(kNO.gamma * double(N)));
    CHECK(a[2] == 0.0);
  }
  SECTION("NO empty surface: only adsorption") {
    const auto a = propensities(no_state(N, 0), kNO);
    CHECK(a[0] == Approx(kNO.alpha * double(N)));
    CHECK(a[1] == 0.0);
    CHECK(a[2] == 0.0);
  }
}

TEST_CASE("CO propensity drift matches the mean-field rate at table counts") {
  const std::size_t N = 10000;
  const auto s = co_state(N, 1394, 6355);
  const auto a = propensities(s, kCO);
  const auto f = rhs_co_raw(restrict_state(s), kCO);
  // d<n_A>/dt scaled by N approaches rhs component 0 (~0 near the steady state)
  const double driftA = (a[0] - a[1] - a[3]) / double(N);
  const double driftB = (2.0 * a[2] - a[3]) / double(N);
  CHECK(std::abs(driftA - f[0]) < 10.0 / double(N));
  CHECK(std::abs(driftB - f[1]) < 10.0 / double(N));
  CHECK(std::abs(driftA) < 1e-3);
}

TEST_CASE("lift rounds coverages to counts") {
  CHECK(lift(CoarseState(0.5), 100).counts[0] == 50);
  CHECK(lift(CoarseState(0.3301), 250000).counts[0] == 82525);
  const auto s = lift(CoarseState(0.97101, 0.00137), 10000);
  CHECK(s.counts[0] == 9710);
  CHECK(s.counts[1] == 14);
  CHECK(s.occupied() <= 10000);
  CHECK(s.t == 0.0);
}

TEST_CASE("restrict maps counts to coverages") {
  CHECK(restrict_state(no_state(100, 0))[0] == 0.0);
  CHECK(restrict_state(no_state(100, 100))[0] == 1.0);
}

TEST_CASE("lift/restrict round trip error is bounded by rounding") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n_sites : {100ul, 937ul, 10000ul}) {
    const double bound = 0.5 / double(n_sites) + 1.0 / double(n_sites);
    for (int trial = 0; trial < 50; ++trial) {
      const double a = u(gen);
      const double b = u(gen) * (1.0 - a);
      const CoarseState x(a, b);
      const auto back = restrict_state(lift(x, n_sites));
      CHECK(std::abs(back[0] - x[0]) <= bound);
      CHECK(std::abs(back[1] - x[1]) <= bound);
    }
    for (int trial = 0; trial < 50; ++trial) {
      const CoarseState x(u(gen));
      const auto back = restrict_state(lift(x, n_sites));
      CHECK(std::abs(back[0] - x[0]) <= bound);
    }
  }
}

TEST_CASE("ssa_run: frozen cases") {
  SECTION("t_end equal to the clock returns the input") {
    auto s0 = no_state(100, 37, 2.5);
    RngStream rng(1);
    const auto s1 = ssa_run(s0, kNO, 2.5, rng);
    CHECK(s1.counts[0] == 37);
    CHECK(s1.t == 2.5);
  }
  SECTION("all rates zero: state frozen, clock jumps to t_end") {
    NOParams dead{0.0, 0.0, 0.0};
    RngStream rng(1);
    const auto s1 = ssa_run(no_state(100, 37), dead, 9.0, rng);
    CHECK(s1.counts[0] == 37);
    CHECK(s1.t == 9.0);
  }
}

TEST_CASE("ssa_run is deterministic for equal seeds") {
  const RngSeed seed{123456789, 7};
  const auto s0 = co_state(2500, 300, 1500);
  const auto a = ssa_run(s0, MechanismParams{kCO}, 2.0, seed);
  const auto b = ssa_run(s0, MechanismParams{kCO}, 2.0, seed);
  CHECK(a.counts == b.counts);
  CHECK(a.t == b.t);
  const auto c = ssa_run(s0, MechanismParams{kCO}, 2.0, RngSeed{123456789, 8});
  CHECK(a.counts != c.counts);  // different replica, different path
}

TEST_CASE("every SSA event preserves stoichiometric closure") {
  RngStream rng(42);
  auto s = co_state(400, 60, 250);
  bool ok = true;
  std::size_t events = 0;
  ssa_run_events(s, kCO, 5.0, rng, [&](const MicroState& st, std::size_t) {
    ok = ok && st.valid();
    ++events;
  });
  CHECK(ok);
  CHECK(events > 100);

  RngStream rng2(43);
  auto sn = no_state(400, 130);
  ok = true;
  ssa_run_events(sn, kNO, 5.0, rng2, [&](const MicroState& st, std::size_t) {
    ok = ok && st.valid();
  });
  CHECK(ok);
}

TEST_CASE("sampled SSA agrees with the plain run on the same stream") {
  RngStream rng1(99), rng2(99);
  const auto s0 = no_state(900, 300);
  const auto plain = ssa_run(s0, kNO, 1.5, rng1);
  std::vector<std::pair<double, std::int64_t>> samples;
  const auto sampled = ssa_run_sampled(
      s0, kNO, 1.5, 0.25, rng2,
      [&](double t, const MicroState& st) { samples.emplace_back(t, st.counts[0]); });
  CHECK(plain.counts[0] == sampled.counts[0]);
  CHECK(plain.t == sampled.t);
  REQUIRE(samples.size() == 6);
  CHECK(samples.back().first == Approx(1.5));
}

TEST_CASE("ensemble mean tracks the ODE within 3 standard errors") {
  // start at the lower stable state; the expectation stays there
  const auto states = find_steady_states(MechanismParams{kNO});
  const double theta = states[0].state[0];
  const auto ode = integrate(MechanismParams{kNO}, CoarseState(theta), 1.0);
  const auto st = no_ensemble(100 * 100, theta, 1.0, 200, 2024);
  CHECK(std::abs(st.mean - ode[0]) <= 3.0 * st.se);
}

TEST_CASE("mean-field discrepancy shrinks with lattice size") {
  // transient start so there is a real signal to track
  const double theta0 = 0.5;
  const double t_grid[5] = {0.1, 0.2, 0.3, 0.4, 0.5};
  const std::size_t m = 400;
  std::vector<double> errs, ses;
  for (std::size_t nl : {50ul * 50ul, 100ul * 100ul, 200ul * 200ul}) {
    double worst = 0.0, worst_se = 0.0;
    for (double t : t_grid) {
      const auto ode = integrate(MechanismParams{kNO}, CoarseState(theta0), t);
      const auto st = no_ensemble(nl, theta0, t, m, 77);
      const double e = std::abs(st.mean - ode[0]);
      if (e > worst) {
        worst = e;
        worst_se = st.se;
      }
    }
    errs.push_back(worst);
    ses.push_back(worst_se);
  }
  // monotone decrease within two standard errors
  CHECK(errs[1] <= errs[0] + 2.0 * std::hypot(ses[0], ses[1]));
  CHECK(errs[2] <= errs[1] + 2.0 * std::hypot(ses[1], ses[2]));
}

TEST_CASE("ensemble variance scales like the inverse square root") {
  // d = relative standard error of the ensemble mean, the quantity the
  // adaptive protocol drives below d_max by adding replicas
  const double theta0 = 0.3301;
  SECTION("in replica count: d(4M)/d(M) ~ 1/2 within 25%") {
    const auto a = no_ensemble(100 * 100, theta0, 0.25, 100, 11);
    const auto b = no_ensemble(100 * 100, theta0, 0.25, 400, 11);
    const double da = a.se / a.mean, db = b.se / b.mean;
    CHECK(db / da == Approx(0.5).epsilon(0.25));
  }
  SECTION("in lattice size: d(4N)/d(N) ~ 1/2 within 25%") {
    const auto a = no_ensemble(100 * 100, theta0, 0.25, 400, 13);
    const auto b = no_ensemble(200 * 200, theta0, 0.25, 400, 13);
    const double da = a.se / a.mean, db = b.se / b.mean;
    CHECK(db / da == Approx(0.5).epsilon(0.25));
  }
}
