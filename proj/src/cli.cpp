#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "polytraj/bench.hpp"
#include "polytraj/cma.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/heuristics.hpp"

namespace polytraj::bench {

namespace {

using problem::PTProblem;
using problem::Proportions;

std::string read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string &path, const std::string &content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file '" + path + "'");
  out << content;
}

void emit(const std::string &out_path, const std::string &content) {
  if (out_path.empty()) {
    std::cout << content;
    if (!content.empty() && content.back() != '\n') std::cout << '\n';
  } else {
    write_file(out_path, content);
  }
}

problem::BoundaryVelocityMode parse_boundary_mode(const std::string &name) {
  if (name == "zero") return problem::BoundaryVelocityMode::Zero;
  if (name == "random") return problem::BoundaryVelocityMode::Random;
  if (name == "free") return problem::BoundaryVelocityMode::Free;
  throw CLI::ValidationError("--boundary-velocity", "must be zero|random|free");
}

std::vector<double> parse_csv_numbers(const std::string &text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    out.push_back(std::stod(tok));
  }
  return out;
}

std::vector<Cell> parse_cells(const std::string &text) {
  std::vector<Cell> cells;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto x = tok.find('x');
    if (x == std::string::npos) {
      throw CLI::ValidationError("--cells", "expected <polytopes>x<degree> pairs");
    }
    Cell c;
    c.polytopes = std::stoi(tok.substr(0, x));
    c.degree = std::stoi(tok.substr(x + 1));
    cells.push_back(c);
  }
  if (cells.empty()) throw CLI::ValidationError("--cells", "no cells given");
  return cells;
}

std::string verify_report_json(const conic::VerifyReport &rep, double tol) {
  std::ostringstream os;
  os.precision(17);
  os << "{\n"
     << "  \"polytope\": " << rep.polytope << ",\n"
     << "  \"velocity\": " << rep.velocity << ",\n"
     << "  \"acceleration\": " << rep.acceleration << ",\n"
     << "  \"boundary\": " << rep.boundary << ",\n"
     << "  \"time_floor\": " << rep.time_floor << ",\n"
     << "  \"saturation_gap\": " << rep.saturation_gap << ",\n"
     << "  \"max_violation\": " << rep.max_violation() << ",\n"
     << "  \"tolerance\": " << tol << ",\n"
     << "  \"ok\": " << (rep.ok(tol) ? "true" : "false") << "\n"
     << "}";
  return os.str();
}

int cmd_gen(const problem::GeneratorConfig &cfg, const std::string &out_path) {
  const PTProblem p = problem::generate(cfg);
  emit(out_path, problem::to_json(p));
  return 0;
}

int cmd_solve(const std::string &problem_path, const std::string &proportions_source,
              const std::string &explicit_s, const std::string &out_path, int samples, double tol) {
  const PTProblem prob = problem::from_json(read_file(problem_path));
  const int m = prob.num_polytopes() - 1;

  Proportions s = heuristics::even_proportions(m);
  if (proportions_source == "distance") {
    s = heuristics::distance_proportions(prob);
  } else if (proportions_source == "explicit") {
    const auto values = parse_csv_numbers(explicit_s);
    Eigen::VectorXd v(values.size());
    for (size_t i = 0; i < values.size(); ++i) v(static_cast<int>(i)) = values[i];
    s = Proportions(v);
  } else if (proportions_source != "even") {
    throw CLI::ValidationError("--proportions", "must be even|distance|explicit");
  }

  const conic::Solution sol = conic::solve(conic::build_relaxation(prob, s));
  std::string text = conic::solution_to_json(sol, s);
  if (sol.status == conic::SolveStatus::Optimal) {
    const auto rep = conic::verify(prob, s, sol, samples, tol);
    text.pop_back();  // strip the closing brace; append the report
    text = text.substr(0, text.find_last_not_of(" \n}") + 1);
    text += ",\n  \"verify\": " + verify_report_json(rep, tol) + "\n}";
  }
  emit(out_path, text);
  return sol.status == conic::SolveStatus::Optimal ? 0 : 1;
}

int cmd_cma(const std::string &problem_path, const std::string &mode, int max_evals,
            std::uint64_t seed, double sigma0, int population, const std::string &out_path) {
  const PTProblem prob = problem::from_json(read_file(problem_path));
  cma::CmaConfig cfg;
  cfg.mode = mode == "optimize" ? cma::Mode::Optimize : cma::Mode::Feasibility;
  cfg.max_evals = max_evals;
  cfg.seed = seed;
  cfg.sigma0 = sigma0;
  cfg.population = population;
  if (cfg.mode == cma::Mode::Optimize) {
    try {
      cfg.initial_candidates.push_back(
          heuristics::distance_proportions(prob).values().array().log().matrix());
    } catch (const InvalidProblemError &) {
    }
  }
  const cma::RunResult res = cma::run(prob, cfg);

  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"feasible\": " << (res.feasible ? "true" : "false") << ",\n"
     << "  \"evals_used\": " << res.evals_used << ",\n"
     << "  \"best_fitness\": " << res.best_fitness << ",\n"
     << "  \"solution\": ";
  if (res.best_solution) {
    os << conic::solution_to_json(*res.best_solution, res.best_s);
  } else {
    os << "null";
  }
  os << "\n}";
  emit(out_path, os.str());
  return res.feasible ? 0 : 1;
}

int cmd_verify(const std::string &problem_path, const std::string &solution_path, int samples,
               double tol, const std::string &out_path) {
  const PTProblem prob = problem::from_json(read_file(problem_path));
  const auto [sol, s] = conic::solution_from_json(read_file(solution_path));
  if (sol.status != conic::SolveStatus::Optimal) {
    std::cerr << "verify: solution status is " << conic::to_string(sol.status) << "\n";
    return 1;
  }
  const auto rep = conic::verify(prob, s, sol, samples, tol);
  emit(out_path, verify_report_json(rep, tol));
  return rep.ok(tol) ? 0 : 1;
}

int cmd_bench(BenchConfig cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);

  std::vector<BenchRecord> all;
  std::vector<std::string> footers;
  for (const Cell &cell : cfg.cells) {
    const CellReport rep = run_cell(cfg, cell);
    all.insert(all.end(), rep.records.begin(), rep.records.end());
    if (rep.abandoned) {
      footers.push_back("cell " + std::to_string(cell.polytopes) + "x" +
                        std::to_string(cell.degree) + " abandoned: only " +
                        std::to_string(rep.problems_certified) + "/" +
                        std::to_string(cfg.problems_per_cell) + " problems certified after " +
                        std::to_string(rep.problems_generated) + " candidates");
      std::cerr << "polytraj bench: " << footers.back() << "\n";
    }
  }

  Summary summary = summarize(all);
  for (const auto &m : cfg.methods) {
    if (std::find(summary.methods.begin(), summary.methods.end(), m) == summary.methods.end()) {
      summary.footers.push_back("method " + m + ": no records");
    }
  }
  summary.footers.insert(summary.footers.end(), footers.begin(), footers.end());

  const fs::path dir(cfg.output_dir);
  write_file((dir / "records.csv").string(), records_csv(all));
  write_file((dir / "timing.csv").string(), timing_csv(all));
  write_file((dir / "success_rates.csv").string(), success_matrix_csv(summary));
  write_file((dir / "mean_time.csv").string(), mean_time_csv(summary));
  write_file((dir / "success_by_polytopes.svg").string(), success_svg(summary));
  write_file((dir / "timing.svg").string(), timing_svg(all));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string> &argv) {
  CLI::App app{"Minimum-time polytope-traversal trajectories via convex relaxation"};
  app.require_subcommand(1);

  // --- gen -----------------------------------------------------------------
  auto *gen = app.add_subcommand("gen", "Generate a random problem as JSON");
  problem::GeneratorConfig gen_cfg;
  std::string gen_boundary = "zero";
  std::string gen_out;
  std::pair<double, double> vel_range{0.5, 2.0}, acc_range{0.5, 2.0};
  gen->add_option("--dim", gen_cfg.dim, "Problem dimension (2 or 3)");
  gen->add_option("--polytopes", gen_cfg.n_polytopes, "Number of polytopes");
  gen->add_option("--degree", gen_cfg.degree, "Bezier curve degree");
  gen->add_option("--seed", gen_cfg.seed, "Generator seed");
  gen->add_option("--points", gen_cfg.points_per_polytope, "Samples per polytope hull");
  gen->add_option("--decel-prob", gen_cfg.decel_impossible_prob,
                  "Probability of a deceleration-impossible axis");
  gen->add_option("--translation-scale", gen_cfg.translation_scale, "Per-index x translation");
  gen->add_option("--vel-range", vel_range, "Velocity bound range (lo hi)");
  gen->add_option("--acc-range", acc_range, "Acceleration bound range (lo hi)");
  gen->add_option("--boundary-velocity", gen_boundary, "zero|random|free");
  gen->add_option("--out", gen_out, "Output file (default stdout)");

  // --- solve ---------------------------------------------------------------
  auto *solve = app.add_subcommand("solve", "Solve the fixed-proportion relaxation");
  std::string solve_problem, solve_props = "even", solve_s, solve_out;
  int solve_samples = 1000;
  double solve_tol = 1e-6;
  solve->add_option("--problem", solve_problem, "Problem JSON file")->required();
  solve->add_option("--proportions", solve_props, "even|distance|explicit");
  solve->add_option("--s", solve_s, "Comma-separated proportions for --proportions explicit");
  solve->add_option("--out", solve_out, "Output file (default stdout)");
  solve->add_option("--samples", solve_samples, "Verification samples");
  solve->add_option("--tol", solve_tol, "Verification tolerance");

  // --- cma -----------------------------------------------------------------
  auto *cma_cmd = app.add_subcommand("cma", "Search proportions with CMA-ES");
  std::string cma_problem, cma_mode = "feasibility", cma_out;
  int cma_evals = 5000, cma_pop = 0;
  std::uint64_t cma_seed = 0;
  double cma_sigma = 0.3;
  cma_cmd->add_option("--problem", cma_problem, "Problem JSON file")->required();
  cma_cmd->add_option("--mode", cma_mode, "feasibility|optimize");
  cma_cmd->add_option("--max-evals", cma_evals, "Evaluation budget");
  cma_cmd->add_option("--seed", cma_seed, "CMA-ES seed");
  cma_cmd->add_option("--sigma0", cma_sigma, "Initial step size");
  cma_cmd->add_option("--population", cma_pop, "Population size (0 = default)");
  cma_cmd->add_option("--out", cma_out, "Output file (default stdout)");

  // --- bench ---------------------------------------------------------------
  auto *bench_cmd = app.add_subcommand("bench", "Run the benchmark study");
  BenchConfig bench_cfg;
  std::string bench_cells = "2x5", bench_methods = "N,O,Oh,C-feas", bench_boundary = "free";
  bench_cmd->add_option("--cells", bench_cells, "Comma list of <polytopes>x<degree>");
  bench_cmd->add_option("--problems", bench_cfg.problems_per_cell, "Certified problems per cell");
  bench_cmd->add_option("--methods", bench_methods, "Subset of N,O,Oh,C-feas,C-opt");
  bench_cmd->add_option("--seed", bench_cfg.seed, "Study seed");
  bench_cmd->add_option("--reps", bench_cfg.timing_reps, "Timing repetitions per solve");
  bench_cmd->add_option("--out-dir", bench_cfg.output_dir, "Output directory");
  bench_cmd->add_option("--dim", bench_cfg.dim, "Problem dimension");
  bench_cmd->add_option("--threads", bench_cfg.threads, "Worker threads (0 = auto)");
  bench_cmd->add_option("--boundary-velocity", bench_boundary, "zero|random|free");
  bench_cmd->add_option("--decel-prob", bench_cfg.decel_prob, "Deceleration bias probability");
  bench_cmd->add_option("--cma-feas-evals", bench_cfg.cma_feas_evals, "C-feas budget");
  bench_cmd->add_option("--cma-opt-evals", bench_cfg.cma_opt_evals, "C-opt budget");
  bench_cmd->add_option("--naive-T", bench_cfg.naive_T, "Fixed time for method N");

  // --- verify ----------------------------------------------------------------
  auto *verify_cmd = app.add_subcommand("verify", "Check a solution against a problem");
  std::string verify_problem, verify_solution, verify_out;
  int verify_samples = 1000;
  double verify_tol = 1e-6;
  verify_cmd->add_option("--problem", verify_problem, "Problem JSON file")->required();
  verify_cmd->add_option("--solution", verify_solution, "Solution JSON file")->required();
  verify_cmd->add_option("--samples", verify_samples, "Sample count");
  verify_cmd->add_option("--tol", verify_tol, "Tolerance");
  verify_cmd->add_option("--out", verify_out, "Output file (default stdout)");

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    app.exit(e);  // prints help or error text
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      gen_cfg.boundary_velocity = parse_boundary_mode(gen_boundary);
      gen_cfg.velocity_bound_range = vel_range;
      gen_cfg.acceleration_bound_range = acc_range;
      return cmd_gen(gen_cfg, gen_out);
    }
    if (solve->parsed()) {
      return cmd_solve(solve_problem, solve_props, solve_s, solve_out, solve_samples, solve_tol);
    }
    if (cma_cmd->parsed()) {
      return cmd_cma(cma_problem, cma_mode, cma_evals, cma_seed, cma_sigma, cma_pop, cma_out);
    }
    if (bench_cmd->parsed()) {
      bench_cfg.cells = parse_cells(bench_cells);
      bench_cfg.boundary_velocity = parse_boundary_mode(bench_boundary);
      bench_cfg.methods.clear();
      std::stringstream ss(bench_methods);
      std::string tok;
      while (std::getline(ss, tok, ',')) bench_cfg.methods.push_back(tok);
      return cmd_bench(bench_cfg);
    }
    if (verify_cmd->parsed()) {
      return cmd_verify(verify_problem, verify_solution, verify_samples, verify_tol, verify_out);
    }
  } catch (const CLI::ValidationError &e) {
    std::cerr << "polytraj: " << e.what() << "\n";
    return 2;
  } catch (const ParseError &e) {
    std::cerr << "polytraj: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument &e) {
    std::cerr << "polytraj: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "polytraj: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace polytraj::bench
