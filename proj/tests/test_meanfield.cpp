#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "coarseopt/meanfield.hpp"

using namespace coarseopt;
using Catch::Approx;

namespace {

// Independent root oracle: sign-change bracketing on a fine grid + bisection.
std::vector<double> bisect_roots_no(const NOParams& p) {
  std::vector<double> roots;
  const int grid = 20000;
  auto f = [&](double t) { return rhs_no_raw(t, p); };
  for (int i = 0; i < grid; ++i) {
    double a = i / double(grid), b = (i + 1) / double(grid);
    double fa = f(a), fb = f(b);
    if (fa == 0.0) roots.push_back(a);
    if (fa * fb < 0.0) {
      for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fa * fm <= 0.0) { b = m; fb = fm; } else { a = m; fa = fm; }
      }
      roots.push_back(0.5 * (a + b));
    }
  }
  if (f(1.0) == 0.0) roots.push_back(1.0);
  return roots;
}

const NOParams kNO{1.0, 0.01, 4.5};
const COParams kCO{1.6, 3.5, 0.04, 1.0};

}  // namespace

TEST_CASE("rhs_no values") {
  CHECK(rhs_no(0.0, kNO) == Approx(1.0));
  CHECK(rhs_no(1.0, kNO) == Approx(-0.01));

  // table root quoted to 4 digits is a near-root of the cubic
  CHECK(std::abs(rhs_no(0.9896, kNO)) < 1e-3);

  CHECK_THROWS_AS(rhs_no(1.0 + 1e-6, kNO), std::domain_error);
  CHECK_THROWS_AS(rhs_no(-1e-6, kNO), std::domain_error);
  CHECK_NOTHROW(rhs_no(1.0 + 1e-13, kNO));
}

TEST_CASE("rhs_co values") {
  const CoarseState empty(0.0, 0.0);
  const auto r0 = rhs_co(empty, kCO);
  CHECK(r0[0] == Approx(1.6));
  CHECK(r0[1] == Approx(7.0));

  // Table-quoted steady states are near-roots
  for (auto [a, b] : {std::pair{0.97101, 0.00137}, {0.13944, 0.63553},
                      {0.67526, 0.11452}}) {
    const auto r = rhs_co(CoarseState(a, b), kCO);
    CHECK(std::abs(r[0]) < 1e-4);
    CHECK(std::abs(r[1]) < 1e-4);
  }

  CHECK_THROWS_AS(rhs_co(CoarseState(0.7, 0.4), kCO), std::domain_error);
  CHECK_THROWS_AS(rhs_co(CoarseState(-0.1, 0.2), kCO), std::domain_error);
}

TEST_CASE("NO steady states match the bisection oracle") {
  const auto states = find_steady_states(MechanismParams{kNO});
  const auto oracle = bisect_roots_no(kNO);
  REQUIRE(states.size() == 3);
  REQUIRE(oracle.size() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(states[i].state[0] == Approx(oracle[i]).margin(1e-9));

  // table values to 1e-3
  CHECK(states[0].state[0] == Approx(0.3301).margin(1e-3));
  CHECK(states[1].state[0] == Approx(0.6803).margin(1e-3));
  CHECK(states[2].state[0] == Approx(0.9896).margin(1e-3));

  CHECK(states[0].stability == Stability::stable);
  CHECK(states[1].stability == Stability::unstable);
  CHECK(states[2].stability == Stability::stable);

  // Vieta: roots of k t (1-t)^2 + (a+g) t - a sum to exactly 2
  const double sum = states[0].state[0] + states[1].state[0] + states[2].state[0];
  CHECK(sum == Approx(2.0).margin(1e-9));

  for (const auto& s : states) {
    CHECK(std::abs(rhs_no_raw(s.state[0], kNO)) < 1e-10);
    const double lam = jacobian_no(s.state[0], kNO);
    if (s.stability == Stability::stable) CHECK(lam < 0.0);
    if (s.stability == Stability::unstable) CHECK(lam > 0.0);
  }
}

TEST_CASE("NO steady state with k=0 is the linear balance") {
  NOParams p{1.0, 0.01, 0.0};
  const auto states = find_steady_states(MechanismParams{p});
  REQUIRE(states.size() == 1);
  CHECK(states[0].state[0] == Approx(100.0 / 101.0).margin(1e-12));
  CHECK(states[0].stability == Stability::stable);
}

TEST_CASE("CO steady states reproduce the reference table") {
  const auto states = find_steady_states(MechanismParams{kCO});
  REQUIRE(states.size() == 3);
  const double want[3][2] = {
      {0.13944, 0.63553}, {0.67526, 0.11452}, {0.97101, 0.00137}};
  for (int i = 0; i < 3; ++i) {
    CHECK(states[i].state[0] == Approx(want[i][0]).margin(1e-4));
    CHECK(states[i].state[1] == Approx(want[i][1]).margin(1e-4));
    CHECK(norm2(rhs_co_raw(states[i].state, kCO)) < 1e-10);
  }
  CHECK(states[0].stability == Stability::stable);
  CHECK(states[1].stability == Stability::saddle);
  CHECK(states[2].stability == Stability::stable);
}

TEST_CASE("integrate: stationarity, identity, attractor convergence") {
  const auto no_states = find_steady_states(MechanismParams{kNO});
  const double theta_s = no_states[0].state[0];

  SECTION("stationary point stays put for t=5") {
    const auto x = integrate(MechanismParams{kNO}, CoarseState(theta_s), 5.0);
    CHECK(x[0] == Approx(theta_s).margin(1e-6));
    CHECK(x[0] == Approx(0.3301).margin(1e-4));
  }
  SECTION("t_span = 0 is the identity") {
    const CoarseState x0(0.42);
    const auto x = integrate(MechanismParams{kNO}, x0, 0.0);
    CHECK(x[0] == x0[0]);
  }
  SECTION("CO trajectory converges to a stable steady state") {
    const auto co_states = find_steady_states(MechanismParams{kCO});
    const auto x = integrate(MechanismParams{kCO}, CoarseState(0.5, 0.3), 50.0);
    // fixed-point oracle: endpoint is a near-root and matches a stable state
    CHECK(norm2(rhs_co_raw(x, kCO)) < 1e-6);
    bool matches_stable = false;
    for (const auto& s : co_states)
      if (s.stability == Stability::stable && max_abs(x - s.state) < 1e-3)
        matches_stable = true;
    CHECK(matches_stable);
  }
}

TEST_CASE("integrate keeps trajectories inside the coverage bounds") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(gen), b = u(gen) * (1.0 - a);
    bool ok = true;
    rk45_observed(
        [&](double, const CoarseState& x) { return rhs_co_raw(x, kCO); },
        CoarseState(a, b), 0.0, 10.0, OdeOptions{},
        [&](double, const CoarseState& x) {
          ok = ok && coverages_valid(x, 1e-7);
          return true;
        });
    CHECK(ok);
  }
  for (int trial = 0; trial < 20; ++trial) {
    bool ok = true;
    rk45_observed(
        [&](double, const CoarseState& x) {
          return CoarseState(rhs_no_raw(x[0], kNO));
        },
        CoarseState(u(gen)), 0.0, 10.0, OdeOptions{},
        [&](double, const CoarseState& x) {
          ok = ok && coverages_valid(x, 1e-7);
          return true;
        });
    CHECK(ok);
  }
}

TEST_CASE("analytic Jacobians match central differences") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const double t = u(gen);
    const double fd = (rhs_no_raw(t + h, kNO) - rhs_no_raw(t - h, kNO)) / (2 * h);
    const double an = jacobian_no(t, kNO);
    CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
  }
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(gen), b = u(gen) * (1.0 - a) * 0.9;
    const CoarseState x(a, b);
    const auto J = jacobian_co(x, kCO);
    const double an[4] = {J.a00, J.a01, J.a10, J.a11};
    for (int j = 0; j < 2; ++j) {
      CoarseState xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const auto fp = rhs_co_raw(xp, kCO), fm = rhs_co_raw(xm, kCO);
      for (int i = 0; i < 2; ++i) {
        const double fd = (fp[i] - fm[i]) / (2 * h);
        CHECK(std::abs(fd - an[2 * i + j]) <=
              1e-6 * std::max(1.0, std::abs(an[2 * i + j])));
      }
    }
  }
}

TEST_CASE("bifurcation_scan branch counting") {
  SECTION("NO over k in [0,10]: a three-branch window containing 4.5") {
    const auto rows = bifurcation_scan(MechanismParams{kNO}, "k", 0.0, 10.0, 1001);
    REQUIRE(rows.size() == 1001);
    bool three_at_45 = false;
    std::size_t n_three = 0;
    for (const auto& r : rows) {
      if (r.states.size() == 3) {
        ++n_three;
        if (std::abs(r.param - 4.5) < 0.005 + 1e-12) three_at_45 = true;
      }
      // oracle cross-check on a subsample
      if (std::lround(r.param * 100) % 100 == 0) {
        NOParams p = kNO;
        p.k = r.param;
        CHECK(r.states.size() == bisect_roots_no(p).size());
      }
    }
    CHECK(n_three > 10);
    CHECK(three_at_45);
  }
  SECTION("degenerate single-point scan equals find_steady_states") {
    const auto rows = bifurcation_scan(MechanismParams{kCO}, "beta", 3.5, 3.5, 1);
    REQUIRE(rows.size() == 1);
    const auto direct = find_steady_states(MechanismParams{kCO});
    REQUIRE(rows[0].states.size() == direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
      CHECK(max_abs(rows[0].states[i].state - direct[i].state) < 1e-12);
  }
  SECTION("NO over k in [0,0.1]: single branch everywhere") {
    const auto rows = bifurcation_scan(MechanismParams{kNO}, "k", 0.0, 0.1, 11);
    for (const auto& r : rows) CHECK(r.states.size() == 1);
  }
  SECTION("bad ranges are rejected") {
    CHECK_THROWS_AS(bifurcation_scan(MechanismParams{kNO}, "k", 1.0, 0.0, 10),
                    std::invalid_argument);
    CHECK_THROWS_AS(bifurcation_scan(MechanismParams{kNO}, "k", 0.0, 1.0, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(bifurcation_scan(MechanismParams{kNO}, "beta", 0.0, 1.0, 3),
                    std::invalid_argument);
  }
}

TEST_CASE("separatrix passes through the saddle and splits the basins") {
  const auto sep = trace_separatrix(kCO);
  REQUIRE(sep.polyline.size() > 10);

  // polyline passes within 1e-3 of the saddle from the reference table
  double best = 1e9;
  for (const auto& p : sep.polyline)
    best = std::min(best, std::hypot(p[0] - 0.67526, p[1] - 0.11452));
  CHECK(best < 1e-3);

  const auto states = find_steady_states(MechanismParams{kCO});
  REQUIRE(states.size() == 3);
  const CoarseState low = states[0].state;   // CO-poor attractor
  const CoarseState high = states[2].state;  // CO-rich attractor

  // forward flow from saddle +- 1e-3 along the unstable eigenvector reaches
  // the two distinct stable states
  const auto frame = saddle_frame(kCO);
  CoarseState sp = frame.saddle, sm = frame.saddle;
  sp[0] += 1e-3 * frame.v_unstable[0];
  sp[1] += 1e-3 * frame.v_unstable[1];
  sm[0] -= 1e-3 * frame.v_unstable[0];
  sm[1] -= 1e-3 * frame.v_unstable[1];
  const auto ap = integrate(MechanismParams{kCO}, sp, 100.0);
  const auto am = integrate(MechanismParams{kCO}, sm, 100.0);
  CHECK(max_abs(ap - am) > 0.1);
  for (const auto& a : {ap, am})
    CHECK((max_abs(a - low) < 1e-3 || max_abs(a - high) < 1e-3));

  // 20 random points: the side of the polyline predicts the attractor
  const double side_low = separatrix_side(sep, low);
  REQUIRE(side_low != 0.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; checked < 20 && trial < 200; ++trial) {
    const double a = u(gen), b = u(gen) * (1.0 - a);
    const CoarseState x(a, b);
    const double side = separatrix_side(sep, x);
    // skip points hugging the separatrix; finite-tolerance flows are ambiguous there
    double dist = 1e9;
    for (const auto& p : sep.polyline)
      dist = std::min(dist, std::hypot(p[0] - a, p[1] - b));
    if (dist < 1e-3) continue;
    const auto attr = integrate(MechanismParams{kCO}, x, 50.0);
    const bool to_low = max_abs(attr - low) < 1e-3;
    const bool to_high = max_abs(attr - high) < 1e-3;
    REQUIRE((to_low || to_high));
    CHECK(((side * side_low > 0) == to_low));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("separatrix requires a saddle") {
  // pick a monostable beta from the scan
  const auto rows = bifurcation_scan(MechanismParams{kCO}, "beta", 0.2, 8.0, 40);
  double mono_beta = -1.0;
  for (const auto& r : rows)
    if (r.states.size() == 1) mono_beta = r.param;
  REQUIRE(mono_beta > 0.0);
  COParams p = kCO;
  p.beta = mono_beta;
  CHECK_THROWS_AS(trace_separatrix(p), NoSaddleError);
}
