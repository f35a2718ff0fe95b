#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polytraj/conic.hpp"
#include "polytraj/problem.hpp"

namespace polytraj::bench {

struct Cell {
  int polytopes = 2;
  int degree = 5;
};

struct BenchConfig {
  std::vector<Cell> cells;
  int problems_per_cell = 100;
  std::vector<std::string> methods = {"N", "O", "Oh", "C-feas"};
  std::uint64_t seed = 0;
  int timing_reps = 20;
  std::string output_dir = ".";
  int dim = 2;

  // generator knobs for the study
  problem::BoundaryVelocityMode boundary_velocity = problem::BoundaryVelocityMode::Free;
  double decel_prob = 0.4;

  // method knobs
  double naive_T = 1000.0;
  double slack_weight = 1e4;
  int cma_feas_evals = 800;
  int cma_opt_evals = 5000;
  int verify_samples = 1000;
  double verify_tol = 1e-6;

  int threads = 0;  // 0: POLYTRAJ_THREADS env or hardware concurrency
};

struct BenchRecord {
  int cell_polytopes = 0;
  int cell_degree = 0;
  std::uint64_t seed = 0;  // problem seed
  std::string method;
  conic::SolveStatus status = conic::SolveStatus::NumericalFailure;
  std::optional<double> T, y, alpha;
  bool success = false;
  double wall_ms_median = 0.0;  // timing fields live in the separate file
  double wall_ms_mean = 0.0;
};

struct CellReport {
  std::vector<BenchRecord> records;
  bool abandoned = false;  // generator exhausted 100x oversampling
  int problems_generated = 0;
  int problems_certified = 0;
};

/// Generate problems until problems_per_cell are CMA-feasibility-certified
/// (the denominator), then run every enabled method on each.
CellReport run_cell(const BenchConfig &config, const Cell &cell);

struct SummaryRow {
  int polytopes = 0;
  int degree = 0;
  std::string method;
  int successes = 0;
  int total = 0;
};

struct Summary {
  std::vector<SummaryRow> success_matrix;
  // (method, polytope count) -> average success rate over degrees
  std::vector<std::string> methods;
  std::vector<int> polytope_counts;
  std::vector<std::vector<double>> success_by_polytopes;  // [method][polytope index]
  // mean optimal T per method over successful records
  std::vector<double> mean_time_per_method;
  std::vector<int> mean_time_counts;
  std::vector<std::string> footers;
};

Summary summarize(const std::vector<BenchRecord> &records);

std::string records_csv(const std::vector<BenchRecord> &records);
std::string timing_csv(const std::vector<BenchRecord> &records);
std::string success_matrix_csv(const Summary &summary);
std::string mean_time_csv(const Summary &summary);

/// Polyline chart of per-method success rate vs polytope count.
std::string success_svg(const Summary &summary);
/// Polyline chart of median solve time (ms, log scale) vs polytope count.
std::string timing_svg(const std::vector<BenchRecord> &records);

/// Entry point behind the `polytraj` binary. argv excludes the program name.
int run_cli(const std::vector<std::string> &argv);

}  // namespace polytraj::bench
