#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "polytraj/conic.hpp"
#include "polytraj/problem.hpp"

namespace polytraj::cma {

using problem::PTProblem;
using problem::Proportions;

enum class Mode { Feasibility, Optimize };

struct CmaConfig {
  int population = 0;     // 0: 4 + floor(3 ln N)
  double sigma0 = 0.3;
  int max_evals = 5000;
  double feasibility_tol = 1e-6;  // on alpha
  Mode mode = Mode::Feasibility;
  std::uint64_t seed = 0;
  double slack_weight = 1e4;
  // Extra candidates evaluated before the search loop (z-space); they feed
  // the best-so-far tracker only, not the distribution update.
  std::vector<Eigen::VectorXd> initial_candidates;
};

/// Evolution-strategy state after a run.
struct CmaState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double sigma = 0.0;
  Eigen::VectorXd path_sigma;
  Eigen::VectorXd path_c;
  int generations = 0;
};

struct RunResult {
  Proportions best_s{Eigen::VectorXd::Ones(1)};
  bool feasible = false;
  std::optional<conic::Solution> best_solution;
  int evals_used = 0;
  double best_fitness = 0.0;
  CmaState state;
};

/// Softmax-with-floor map from unconstrained z to the proportion simplex.
Proportions simplex_map(const Eigen::VectorXd &z);

/// Slack-relaxation objective at z; large penalty plus a geometric violation
/// proxy when the inner solve fails.
double fitness(const PTProblem &problem, const Eigen::VectorXd &z, double w);

/// One evaluation result for the generic minimizer.
struct Evaluation {
  double value = 0.0;
  bool acceptable = false;  // feasibility certificate for early stop
};

/// Generic (mu/mu_w, lambda) CMA-ES with rank-one and rank-mu covariance
/// updates and cumulative step-size adaptation. Deterministic per seed;
/// stops on max_evals, stagnation, or (stop_on_acceptable) the first
/// acceptable sample.
struct MinimizeResult {
  Eigen::VectorXd best_x;
  double best_value = 0.0;
  bool found_acceptable = false;
  int evals_used = 0;
  CmaState state;
};

MinimizeResult minimize(const std::function<Evaluation(const Eigen::VectorXd &)> &objective,
                        int dimension, const CmaConfig &config, bool stop_on_acceptable);

/// CMA-ES over traversal proportions driving the slack relaxation.
RunResult run(const PTProblem &problem, const CmaConfig &config);

}  // namespace polytraj::cma
