#include "polytraj/cma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "polytraj/rng.hpp"

namespace polytraj::cma {

namespace {

constexpr double kSimplexFloor = 1e-6;
constexpr double kPenalty = 1e12;
constexpr double kEigenFloor = 1e-14;
constexpr double kStagnationTol = 1e-8;
constexpr int kStagnationGenerations = 20;

struct Weights {
  int lambda = 0;
  int mu = 0;
  Eigen::VectorXd w;  // positive recombination weights, sum 1
  double mu_eff = 0.0;
  double c_sigma = 0.0, d_sigma = 0.0;
  double c_c = 0.0, c_1 = 0.0, c_mu = 0.0;
  double chi_n = 0.0;
};

Weights make_weights(int dim, int lambda) {
  Weights wt;
  wt.lambda = lambda;
  wt.mu = lambda / 2;
  wt.w.resize(wt.mu);
  for (int i = 0; i < wt.mu; ++i) {
    wt.w(i) = std::log((lambda + 1) / 2.0) - std::log(i + 1.0);
  }
  wt.w /= wt.w.sum();
  wt.mu_eff = 1.0 / wt.w.squaredNorm();

  const double n = dim;
  wt.c_sigma = (wt.mu_eff + 2.0) / (n + wt.mu_eff + 5.0);
  wt.d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((wt.mu_eff - 1.0) / (n + 1.0)) - 1.0) + wt.c_sigma;
  wt.c_c = (4.0 + wt.mu_eff / n) / (n + 4.0 + 2.0 * wt.mu_eff / n);
  wt.c_1 = 2.0 / ((n + 1.3) * (n + 1.3) + wt.mu_eff);
  wt.c_mu = std::min(1.0 - wt.c_1,
                     2.0 * (wt.mu_eff - 2.0 + 1.0 / wt.mu_eff) / ((n + 2.0) * (n + 2.0) + wt.mu_eff));
  wt.chi_n = std::sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
  return wt;
}

}  // namespace

Proportions simplex_map(const Eigen::VectorXd &z) {
  if (!z.allFinite()) throw std::invalid_argument("simplex_map: non-finite input");
  const double zmax = z.maxCoeff();
  Eigen::VectorXd e = (z.array() - zmax).exp() + kSimplexFloor;
  e /= e.sum();
  // Exact renormalization against accumulated rounding.
  e /= e.sum();
  return Proportions(e);
}

double fitness(const PTProblem &problem, const Eigen::VectorXd &z, double w) {
  const Proportions s = simplex_map(z);
  const conic::ConicProgram prog = conic::build_slack_relaxation(problem, s, w);
  const conic::Solution sol = conic::solve(prog);
  if (sol.status == conic::SolveStatus::Optimal) {
    return sol.objective;
  }
  return kPenalty + conic::geometry_violation(problem, s);
}

MinimizeResult minimize(const std::function<Evaluation(const Eigen::VectorXd &)> &objective,
                        int dimension, const CmaConfig &config, bool stop_on_acceptable) {
  if (dimension < 1) throw std::invalid_argument("minimize: dimension must be >= 1");
  if (!(config.sigma0 > 0.0)) throw std::invalid_argument("minimize: sigma0 must be positive");

  const int n = dimension;
  const int lambda = config.population > 0
                         ? config.population
                         : 4 + static_cast<int>(std::floor(3.0 * std::log(static_cast<double>(n))));
  if (lambda < 2) throw std::invalid_argument("minimize: population must be >= 2");
  const Weights wt = make_weights(n, lambda);

  RandomEngine rng(config.seed);

  MinimizeResult out;
  out.best_value = std::numeric_limits<double>::infinity();

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n);
  double sigma = config.sigma0;
  Eigen::VectorXd p_sigma = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p_c = Eigen::VectorXd::Zero(n);
  int evals = 0;
  int generation = 0;

  auto consider = [&](const Eigen::VectorXd &x, const Evaluation &ev) {
    if (ev.value < out.best_value) {
      out.best_value = ev.value;
      out.best_x = x;
    }
    if (ev.acceptable && !out.found_acceptable) {
      out.found_acceptable = true;
      if (stop_on_acceptable) {
        // Feasibility mode stops here; the certificate is the result.
        out.best_value = ev.value;
        out.best_x = x;
      }
    }
  };

  // Seed candidates (the mean and any caller-provided points).
  {
    std::vector<Eigen::VectorXd> seeds;
    seeds.push_back(mean);
    for (const auto &c : config.initial_candidates) {
      if (c.size() != n) throw std::invalid_argument("minimize: candidate dimension mismatch");
      seeds.push_back(c);
    }
    for (const auto &x : seeds) {
      if (evals >= config.max_evals) break;
      const Evaluation ev = objective(x);
      ++evals;
      consider(x, ev);
      if (stop_on_acceptable && out.found_acceptable) {
        out.evals_used = evals;
        out.state.mean = mean;
        out.state.covariance = C;
        out.state.sigma = sigma;
        out.state.path_sigma = p_sigma;
        out.state.path_c = p_c;
        out.state.generations = generation;
        return out;
      }
    }
  }

  double stagnation_best = out.best_value;
  int stagnation_count = 0;

  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd D = Eigen::VectorXd::Ones(n);

  while (evals < config.max_evals) {
    ++generation;

    // Refresh the eigendecomposition; floor eigenvalues to keep C positive
    // definite.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    Eigen::VectorXd evals_vec = eig.eigenvalues().cwiseMax(kEigenFloor);
    B = eig.eigenvectors();
    D = evals_vec.cwiseSqrt();
    C = B * evals_vec.asDiagonal() * B.transpose();
    C = 0.5 * (C + C.transpose());

    // Sample and evaluate the population in index order.
    std::vector<Eigen::VectorXd> ys(static_cast<size_t>(lambda));
    std::vector<double> fs(static_cast<size_t>(lambda));
    std::vector<int> order(static_cast<size_t>(lambda));
    int sampled = 0;
    for (int k = 0; k < lambda && evals < config.max_evals; ++k) {
      const Eigen::VectorXd zk = rng.normal_vector(n);
      ys[static_cast<size_t>(k)] = B * (D.asDiagonal() * zk);
      const Eigen::VectorXd xk = mean + sigma * ys[static_cast<size_t>(k)];
      const Evaluation ev = objective(xk);
      ++evals;
      ++sampled;
      fs[static_cast<size_t>(k)] = ev.value;
      consider(xk, ev);
      if (stop_on_acceptable && out.found_acceptable) break;
    }
    if (stop_on_acceptable && out.found_acceptable) break;
    if (sampled < lambda) break;  // budget exhausted mid-generation

    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return fs[static_cast<size_t>(a)] < fs[static_cast<size_t>(b)];
    });

    // Recombination.
    Eigen::VectorXd y_w = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < wt.mu; ++i) y_w += wt.w(i) * ys[static_cast<size_t>(order[static_cast<size_t>(i)])];
    mean += sigma * y_w;

    // Step-size path (uses C^{-1/2} y_w).
    const Eigen::VectorXd c_inv_sqrt_yw = B * (D.cwiseInverse().asDiagonal() * (B.transpose() * y_w));
    p_sigma = (1.0 - wt.c_sigma) * p_sigma +
              std::sqrt(wt.c_sigma * (2.0 - wt.c_sigma) * wt.mu_eff) * c_inv_sqrt_yw;
    const double expected_shrink =
        std::sqrt(1.0 - std::pow(1.0 - wt.c_sigma, 2.0 * generation));
    const bool h_sigma =
        p_sigma.norm() / expected_shrink < (1.4 + 2.0 / (n + 1.0)) * wt.chi_n;

    // Covariance paths and updates.
    p_c = (1.0 - wt.c_c) * p_c;
    if (h_sigma) p_c += std::sqrt(wt.c_c * (2.0 - wt.c_c) * wt.mu_eff) * y_w;
    const double delta_h = (h_sigma ? 0.0 : 1.0) * wt.c_c * (2.0 - wt.c_c);

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < wt.mu; ++i) {
      const Eigen::VectorXd &yi = ys[static_cast<size_t>(order[static_cast<size_t>(i)])];
      rank_mu += wt.w(i) * yi * yi.transpose();
    }
    C = (1.0 - wt.c_1 - wt.c_mu) * C + wt.c_1 * (p_c * p_c.transpose() + delta_h * C) +
        wt.c_mu * rank_mu;
    C = 0.5 * (C + C.transpose());

    sigma *= std::exp((wt.c_sigma / wt.d_sigma) * (p_sigma.norm() / wt.chi_n - 1.0));

    // Stagnation rule for the optimizing mode.
    if (!stop_on_acceptable) {
      if (stagnation_best - out.best_value > kStagnationTol) {
        stagnation_best = out.best_value;
        stagnation_count = 0;
      } else if (++stagnation_count >= kStagnationGenerations) {
        break;
      }
    }
  }

  out.evals_used = evals;
  out.state.mean = mean;
  out.state.covariance = C;
  out.state.sigma = sigma;
  out.state.path_sigma = p_sigma;
  out.state.path_c = p_c;
  out.state.generations = generation;
  return out;
}

RunResult run(const PTProblem &problem, const CmaConfig &config) {
  const int n = problem.num_polytopes();

  RunResult out;

  // Single-polytope problems have a constant softmax: one inner solve.
  if (n == 1) {
    const Proportions s{Eigen::VectorXd::Ones(1)};
    const conic::ConicProgram prog = conic::build_slack_relaxation(problem, s, config.slack_weight);
    const conic::Solution sol = conic::solve(prog);
    out.best_s = s;
    out.evals_used = 1;
    out.best_fitness = sol.status == conic::SolveStatus::Optimal
                           ? sol.objective
                           : kPenalty + conic::geometry_violation(problem, s);
    out.feasible = sol.status == conic::SolveStatus::Optimal && sol.alpha &&
                   *sol.alpha <= config.feasibility_tol;
    if (sol.status == conic::SolveStatus::Optimal) out.best_solution = sol;
    return out;
  }

  struct Best {
    conic::Solution solution;
    bool valid = false;
  };
  Best best;

  auto objective = [&](const Eigen::VectorXd &z) -> Evaluation {
    const Proportions s = simplex_map(z);
    const conic::ConicProgram prog = conic::build_slack_relaxation(problem, s, config.slack_weight);
    const conic::Solution sol = conic::solve(prog);
    Evaluation ev;
    if (sol.status == conic::SolveStatus::Optimal) {
      ev.value = sol.objective;
      ev.acceptable = sol.alpha && *sol.alpha <= config.feasibility_tol;
    } else {
      ev.value = kPenalty + conic::geometry_violation(problem, s);
      ev.acceptable = false;
    }
    return ev;
  };

  // Track the solution belonging to the best z seen (the minimizer only
  // reports values, and re-solving at the end keeps determinism).
  const MinimizeResult res =
      minimize(objective, n, config, config.mode == Mode::Feasibility);

  out.evals_used = res.evals_used;
  out.best_fitness = res.best_value;
  out.state = res.state;
  if (res.best_x.size() > 0) {
    out.best_s = simplex_map(res.best_x);
    const conic::ConicProgram prog =
        conic::build_slack_relaxation(problem, out.best_s, config.slack_weight);
    const conic::Solution sol = conic::solve(prog);
    if (sol.status == conic::SolveStatus::Optimal) {
      best.solution = sol;
      best.valid = true;
      out.feasible = sol.alpha && *sol.alpha <= config.feasibility_tol;
    }
  }
  if (best.valid) out.best_solution = best.solution;
  return out;
}

}  // namespace polytraj::cma
