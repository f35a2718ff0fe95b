#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "polytraj/conic.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/heuristics.hpp"
#include "polytraj/problem.hpp"

using namespace polytraj;
using namespace polytraj::conic;
using problem::DerivativeBound;
using problem::GeneratorConfig;
using problem::Proportions;
using problem::PTProblem;

namespace {

geometry::Polytope interval_1d(double lo, double hi) {
  Eigen::MatrixXd H(2, 1);
  H << 1.0, -1.0;
  Eigen::VectorXd h(2);
  h << hi, -lo;
  return geometry::Polytope(H, h);
}

Proportions whole() { return Proportions(Eigen::VectorXd::Ones(1)); }

// 1D, degree 1, box [0,1], 0 -> 1, velocity x' <= 0.5. Optimum T = 2.
PTProblem velocity_instance() {
  PTProblem p;
  p.dim = 1;
  p.degree = 1;
  p.polytopes.push_back(interval_1d(0.0, 1.0));
  p.start_position = Eigen::VectorXd::Zero(1);
  p.end_position = Eigen::VectorXd::Ones(1);
  DerivativeBound vb;
  vb.matrix = Eigen::MatrixXd::Identity(1, 1);
  vb.offset = Eigen::VectorXd::Constant(1, 0.5);
  p.velocity_bounds.push_back(vb);
  return p;
}

// 1D, degree 2, 0 -> 1 with zero start velocity, |x''| <= 0.5. Optimum T = 2.
PTProblem acceleration_instance() {
  PTProblem p;
  p.dim = 1;
  p.degree = 2;
  p.polytopes.push_back(interval_1d(0.0, 1.0));
  p.start_position = Eigen::VectorXd::Zero(1);
  p.end_position = Eigen::VectorXd::Ones(1);
  p.start_velocity = Eigen::VectorXd::Zero(1);
  DerivativeBound ab;
  ab.matrix.resize(2, 1);
  ab.matrix << 1.0, -1.0;
  ab.offset = Eigen::VectorXd::Constant(2, 0.5);
  p.acceleration_bounds.push_back(ab);
  return p;
}

// Deceleration impossible (x'' >= 0.2) with rest-to-rest boundaries:
// infeasible for every time allocation.
PTProblem decel_rest_instance() {
  PTProblem p;
  p.dim = 1;
  p.degree = 5;
  p.polytopes.push_back(interval_1d(0.0, 10.0));
  p.start_position = Eigen::VectorXd::Zero(1);
  p.end_position = Eigen::VectorXd::Ones(1);
  p.start_velocity = Eigen::VectorXd::Zero(1);
  p.end_velocity = Eigen::VectorXd::Zero(1);
  DerivativeBound ab;
  ab.matrix.resize(2, 1);
  ab.matrix << 1.0, -1.0;
  ab.offset.resize(2);
  ab.offset << 2.0, -0.2;
  p.acceleration_bounds.push_back(ab);
  return p;
}

}  // namespace

TEST_SUITE("conic") {

TEST_CASE("analytic velocity instance solves to T = 2") {
  const PTProblem p = velocity_instance();
  const Solution sol = solve(build_relaxation(p, whole()));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.T - 2.0) <= 1e-5);
  CHECK(std::abs(sol.y - 4.0) <= 1e-4);
  CHECK(sol.control_points(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(sol.control_points(1, 0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("analytic acceleration instance solves to T = 2") {
  const PTProblem p = acceleration_instance();
  const Solution sol = solve(build_relaxation(p, whole()));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.T - 2.0) <= 1e-5);
  CHECK(std::abs(sol.y - 4.0) <= 1e-4);
}

TEST_CASE("time floor activates when the optimum would be below one") {
  PTProblem p;
  p.dim = 1;
  p.degree = 1;
  p.polytopes.push_back(interval_1d(0.0, 1.0));
  p.start_position = Eigen::VectorXd::Zero(1);
  p.end_position = Eigen::VectorXd::Ones(1);
  const Solution sol = solve(build_relaxation(p, whole()));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.T - 1.0) <= 1e-6);
}

TEST_CASE("lp special cases agree with the qcqp") {
  {
    const PTProblem p = velocity_instance();
    const Solution lp = solve(build_lp_special(p, whole(), LpSpecialCase::NoAcceleration));
    REQUIRE(lp.status == SolveStatus::Optimal);
    CHECK(std::abs(lp.T - 2.0) <= 1e-5);
    CHECK_THROWS_AS(build_lp_special(p, whole(), LpSpecialCase::NoVelocity), MisuseError);
  }
  {
    const PTProblem p = acceleration_instance();
    const Solution lp = solve(build_lp_special(p, whole(), LpSpecialCase::NoVelocity));
    REQUIRE(lp.status == SolveStatus::Optimal);
    CHECK(std::abs(lp.y - 4.0) <= 1e-4);
    CHECK(std::abs(lp.T - 2.0) <= 1e-5);
    CHECK_THROWS_AS(build_lp_special(p, whole(), LpSpecialCase::NoAcceleration), MisuseError);
  }
  {
    // No derivative bounds at all: the floor decides.
    PTProblem p;
    p.dim = 1;
    p.degree = 1;
    p.polytopes.push_back(interval_1d(0.0, 1.0));
    p.start_position = Eigen::VectorXd::Zero(1);
    p.end_position = Eigen::VectorXd::Ones(1);
    const Solution lp = solve(build_lp_special(p, whole(), LpSpecialCase::NoAcceleration));
    REQUIRE(lp.status == SolveStatus::Optimal);
    CHECK(std::abs(lp.T - 1.0) <= 1e-6);
  }
}

TEST_CASE("slack relaxation matches the plain relaxation when feasible") {
  const PTProblem p = velocity_instance();
  const Solution plain = solve(build_relaxation(p, whole()));
  const Solution slack = solve(build_slack_relaxation(p, whole(), 1e4));
  REQUIRE(slack.status == SolveStatus::Optimal);
  REQUIRE(slack.alpha.has_value());
  CHECK(*slack.alpha <= 1e-7);
  CHECK(std::abs(slack.T - plain.T) <= 1e-5);
}

TEST_CASE("slack absorbs a certified-infeasible velocity bound") {
  PTProblem p = velocity_instance();
  p.velocity_bounds[0].offset.setZero();  // x' <= 0 while moving 0 -> 1
  const Solution hard = solve(build_relaxation(p, whole()));
  CHECK(hard.status == SolveStatus::Infeasible);

  const Solution slack = solve(build_slack_relaxation(p, whole(), 1e4));
  REQUIRE(slack.status == SolveStatus::Optimal);
  REQUIRE(slack.alpha.has_value());
  CHECK(*slack.alpha > 1e-4);
  CHECK(*slack.alpha == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("zero slack weight reduces the objective to y - T") {
  PTProblem p = velocity_instance();
  p.velocity_bounds[0].offset.setZero();
  const Solution sol = solve(build_slack_relaxation(p, whole(), 0.0));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.objective - (sol.y - sol.T)) <= 1e-6);
}

TEST_CASE("naive lp: consistency and structural infeasibility") {
  const PTProblem p = velocity_instance();
  CHECK(solve(build_naive_lp(p, whole(), 2.0)).status == SolveStatus::Optimal);
  CHECK(solve(build_naive_lp(p, whole(), 1000.0)).status == SolveStatus::Optimal);
  const Solution fixed = solve(build_naive_lp(p, whole(), 1000.0));
  CHECK(fixed.T == doctest::Approx(1000.0));

  const PTProblem bad = decel_rest_instance();
  for (double T : {1.0, 10.0, 1000.0}) {
    CHECK(solve(build_naive_lp(bad, whole(), T)).status == SolveStatus::Infeasible);
  }
  // The full relaxation is infeasible too: the violation scales with time.
  CHECK(solve(build_relaxation(bad, whole())).status == SolveStatus::Infeasible);
}

TEST_CASE("resolving the same program is bit-for-bit identical") {
  const PTProblem p = acceleration_instance();
  const ConicProgram prog = build_relaxation(p, whole());
  const Solution a = solve(prog);
  const Solution b = solve(prog);
  CHECK(a.T == b.T);
  CHECK(a.y == b.y);
  CHECK(a.objective == b.objective);
  CHECK((a.control_points - b.control_points).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("verify accepts optimal solutions and flags perturbations") {
  const PTProblem p = velocity_instance();
  Solution sol = solve(build_relaxation(p, whole()));
  REQUIRE(sol.status == SolveStatus::Optimal);

  const VerifyReport rep = verify(p, whole(), sol, 1000, 1e-6);
  CHECK(rep.max_violation() <= 1e-6);
  CHECK(rep.saturation_gap <= 1e-4);

  Solution bad = sol;
  bad.control_points(1, 0) += 0.1;
  const VerifyReport flag = verify(p, whole(), bad, 1000, 1e-6);
  CHECK(flag.max_violation() > 1e-3);

  const VerifyReport ends = verify(p, whole(), sol, 2, 1e-6);
  CHECK(ends.boundary <= 1e-7);
}

TEST_CASE("minimizing y equals max(T^2, acceleration requirement)") {
  // Tight velocity bound pushes T to 8 while the acceleration rows only need
  // y >= 4; the SOC then pins y at T^2 = 64.
  PTProblem p = acceleration_instance();
  DerivativeBound vb;
  vb.matrix = Eigen::MatrixXd::Identity(1, 1);
  vb.offset = Eigen::VectorXd::Constant(1, 0.25);
  p.velocity_bounds.push_back(vb);
  const Solution sol = solve(build_relaxation(p, whole()));
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(std::abs(sol.T - 8.0) <= 1e-4);
  CHECK(std::abs(sol.y - 64.0) <= 1e-3);

  // And without the velocity bound the acceleration requirement decides.
  const Solution base = solve(build_relaxation(acceleration_instance(), whole()));
  CHECK(std::abs(base.y - 4.0) <= 1e-4);
}

TEST_CASE("saturation holds on a generated batch") {
  int solved = 0;
  for (std::uint64_t seed = 0; solved < 50 && seed < 200; ++seed) {
    GeneratorConfig cfg;
    cfg.dim = 2;
    cfg.n_polytopes = 2;
    cfg.degree = 5;
    cfg.seed = 9000 + seed;
    const PTProblem p = problem::generate(cfg);
    const auto s = heuristics::even_proportions(p.num_polytopes() - 1);
    const Solution sol = solve(build_relaxation(p, s));
    if (sol.status != SolveStatus::Optimal) continue;
    ++solved;
    CHECK(std::abs(sol.T * sol.T - sol.y) <= 1e-6 * std::max(1.0, sol.y));
    const VerifyReport rep = verify(p, s, sol, 250, 1e-6);
    CHECK(rep.max_violation() <= 1e-6);
  }
  CHECK(solved >= 30);
}

TEST_CASE("geometry violation is zero for consistent corridors and positive for gaps") {
  const PTProblem p = velocity_instance();
  CHECK(geometry_violation(p, whole()) <= 1e-7);

  PTProblem gap;
  gap.dim = 1;
  gap.degree = 3;
  gap.polytopes.push_back(interval_1d(0.0, 1.0));
  gap.polytopes.push_back(interval_1d(2.0, 3.0));
  gap.start_position = Eigen::VectorXd::Constant(1, 0.5);
  gap.end_position = Eigen::VectorXd::Constant(1, 2.5);
  Eigen::VectorXd s2(2);
  s2 << 0.5, 0.5;
  const double v = geometry_violation(gap, Proportions(s2));
  CHECK(v > 0.4);
  CHECK(v < 0.6);
}

TEST_CASE("solution json round-trips") {
  const PTProblem p = acceleration_instance();
  const Solution sol = solve(build_relaxation(p, whole()));
  const std::string text = solution_to_json(sol, whole());
  const auto [back, s] = solution_from_json(text);
  CHECK(back.status == sol.status);
  CHECK(back.T == sol.T);
  CHECK(back.y == sol.y);
  CHECK((back.control_points - sol.control_points).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(s.segments() == 1);
}

}  // TEST_SUITE
