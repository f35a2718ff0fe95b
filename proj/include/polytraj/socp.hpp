#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace polytraj::socp {

/// Conic program in standard form:
///
///   min  c'x   s.t.  A x = b,   h - G x in K,
///
/// where K is the product of a nonnegative orthant of dimension lp_dim
/// (leading rows of G) and second-order cones of the given dimensions
/// (trailing rows, in order).
struct Problem {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;
  Eigen::VectorXd h;
  int lp_dim = 0;
  std::vector<int> soc_dims;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_eq() const { return static_cast<int>(A.rows()); }
  int num_cone() const { return static_cast<int>(G.rows()); }
};

enum class Status {
  Optimal,
  OptimalInaccurate,   // converged only to the reduced tolerances
  PrimalInfeasible,    // Farkas certificate found
  DualInfeasible,      // unboundedness certificate found
  MaxIterations,
  NumericalFailure,
};

std::string to_string(Status s);

struct Settings {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  double feastol_inacc = 1e-4;
  double abstol_inacc = 5e-5;
  double reltol_inacc = 5e-5;
  int max_iters = 100;
  int refine_iters = 9;
  double refine_acc = 1e-14;
  double step_scale = 0.99;
  double step_min = 1e-6;
  double step_max = 0.9999;
  double sigma_min = 1e-4;
  double sigma_max = 0.70710678;
  double static_reg = 1e-9;
  double safeguard = 500.0;
  int equil_iters = 3;
};

struct Result {
  Status status = Status::NumericalFailure;
  Eigen::VectorXd x;  // primal
  Eigen::VectorXd y;  // equality duals
  Eigen::VectorXd z;  // cone duals
  Eigen::VectorXd s;  // cone slacks
  double primal_objective = 0.0;
  int iterations = 0;
  double pres = 0.0;
  double dres = 0.0;
  double gap = 0.0;
};

/// Deterministic dense primal-dual interior-point solve over the homogeneous
/// self-dual embedding. Single-threaded; identical input yields identical
/// output bit for bit.
Result solve(const Problem &prob, const Settings &settings = Settings());

}  // namespace polytraj::socp
