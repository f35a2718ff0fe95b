#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>

#include "polytraj/assemble.hpp"
#include "polytraj/problem.hpp"

namespace polytraj::conic {

using problem::PTProblem;
using problem::Proportions;

/// Convex program over the stacked control points plus, depending on the
/// variant, the total time T, the squared-time surrogate y and the slack
/// alpha. Variable layout: [x (control points), T, y, alpha], with -1 for
/// absent variables.
struct ConicProgram {
  int num_vars = 0;
  int num_control_vars = 0;
  int idx_T = -1;
  int idx_y = -1;
  int idx_alpha = -1;

  Eigen::MatrixXd eq_matrix;    // equality rows
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;  // orthant rows, M z <= h
  Eigen::VectorXd ineq_rhs;
  Eigen::MatrixXd soc_matrix;   // h - G z in Q3; empty or exactly 3 rows
  Eigen::VectorXd soc_rhs;
  Eigen::VectorXd objective;

  // solution recovery
  int degree = 0;
  int dim = 0;
  double fixed_time = 0.0;   // naive LP: T was substituted by this constant
  bool time_from_sqrt_y = false;  // no-velocity LP: T = sqrt(y)
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct Solution {
  Eigen::MatrixXd control_points;  // (degree+1) x dim
  double T = 0.0;
  double y = 0.0;
  std::optional<double> alpha;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;
  double wall_time = 0.0;  // seconds, solve call only
};

/// QCQP relaxation: min y - T with velocity rows bound to T, acceleration
/// rows to y, T >= 1, and T^2 <= y encoded as ||(2T, y-1)|| <= y+1.
ConicProgram build_relaxation(const PTProblem &problem, const Proportions &s);

/// Relaxation plus a slack alpha >= 0 added to every derivative inequality
/// row; objective y - T + w * alpha. Feasible whenever the geometric rows
/// admit any x.
ConicProgram build_slack_relaxation(const PTProblem &problem, const Proportions &s, double w);

enum class LpSpecialCase { NoAcceleration, NoVelocity };

/// LP special cases: no_accel minimizes T over (x, T); no_velocity minimizes
/// y over (x, y) and recovers T = sqrt(y). Throws MisuseError when the
/// excluded block family is present (rows with zero offsets are admissible,
/// they do not involve T).
ConicProgram build_lp_special(const PTProblem &problem, const Proportions &s, LpSpecialCase which);

/// Fixed-time feasibility LP in x alone: T (and y = T^2) substituted by
/// T_fixed, zero objective.
ConicProgram build_naive_lp(const PTProblem &problem, const Proportions &s, double T_fixed);

/// Deterministic solve via the embedded interior-point method.
Solution solve(const ConicProgram &program);

/// Independent dense-sampling feasibility check of a solution.
struct VerifyReport {
  double polytope = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
  double boundary = 0.0;
  double time_floor = 0.0;      // max(0, 1 - T)
  double saturation_gap = 0.0;  // |T^2 - y|

  double max_violation() const;
  bool ok(double tol) const { return max_violation() <= tol; }
};

VerifyReport verify(const PTProblem &problem, const Proportions &s, const Solution &solution,
                    int n_samples, double tol);

/// Minimal uniform inflation of the polytope rows needed to fit any curve
/// with the given proportions (0 when the geometric rows are feasible).
/// Used as a violation proxy for infeasible fitness evaluations.
double geometry_violation(const PTProblem &problem, const Proportions &s);

std::string solution_to_json(const Solution &solution, const Proportions &s);
std::pair<Solution, Proportions> solution_from_json(const std::string &text);

}  // namespace polytraj::conic
