#include "polytraj/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "polytraj/cma.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/heuristics.hpp"

namespace polytraj::bench {

namespace {

using problem::PTProblem;
using problem::Proportions;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix64(a ^ splitmix64(b)); }

int worker_count(int configured) {
  if (configured > 0) return configured;
  if (const char *env = std::getenv("POLYTRAJ_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Index-ordered parallel map; results land in a caller-provided slot per
// index so thread count never changes the outcome.
void parallel_for(int count, int threads, const std::function<void(int)> &fn) {
  if (count <= 0) return;
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto &th : pool) th.join();
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double> &v) {
  return v ? format_double(*v) : std::string();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct Candidate {
  std::uint64_t seed = 0;
  std::optional<PTProblem> prob;
  cma::RunResult feas;
  double feas_seconds = 0.0;
  bool certified = false;
};

const std::vector<std::string> kMethodOrder = {"N", "O", "Oh", "C-feas", "C-opt"};

}  // namespace

CellReport run_cell(const BenchConfig &config, const Cell &cell) {
  CellReport report;
  const int threads = worker_count(config.threads);
  const int needed = config.problems_per_cell;
  const int budget = 100 * needed;

  problem::GeneratorConfig gen;
  gen.dim = config.dim;
  gen.n_polytopes = cell.polytopes;
  gen.degree = cell.degree;
  gen.boundary_velocity = config.boundary_velocity;
  gen.decel_impossible_prob = config.decel_prob;

  const std::uint64_t cell_salt =
      mix(config.seed, (static_cast<std::uint64_t>(cell.polytopes) << 32) |
                           static_cast<std::uint64_t>(cell.degree));

  // Phase 1: certify problems with the CMA-ES ground truth, batch by batch,
  // keeping the first `needed` feasible ones in index order.
  std::vector<Candidate> pool;
  int certified = 0;
  int examined = 0;
  while (certified < needed && examined < budget) {
    const int batch = std::min(std::max(2 * threads, needed - certified), budget - examined);
    const int base = examined;
    pool.resize(static_cast<size_t>(base + batch));
    parallel_for(batch, threads, [&](int k) {
      Candidate &cand = pool[static_cast<size_t>(base + k)];
      cand.seed = mix(cell_salt, static_cast<std::uint64_t>(base + k));
      problem::GeneratorConfig g = gen;
      g.seed = cand.seed;
      try {
        cand.prob = problem::generate(g);
      } catch (const GenerationError &) {
        return;
      }
      cma::CmaConfig cfg;
      cfg.mode = cma::Mode::Feasibility;
      cfg.max_evals = config.cma_feas_evals;
      cfg.seed = mix(cand.seed, 0xfea5ull);
      cfg.slack_weight = config.slack_weight;
      const auto t0 = std::chrono::steady_clock::now();
      cand.feas = cma::run(*cand.prob, cfg);
      cand.feas_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      cand.certified = cand.feas.feasible;
    });
    examined += batch;
    certified = 0;
    for (const auto &c : pool) certified += c.certified ? 1 : 0;
  }

  std::vector<const Candidate *> batch_problems;
  for (const auto &c : pool) {
    if (c.certified) batch_problems.push_back(&c);
    if (static_cast<int>(batch_problems.size()) == needed) break;
  }
  report.problems_generated = examined;
  report.problems_certified = static_cast<int>(batch_problems.size());
  report.abandoned = report.problems_certified < needed;

  // Phase 2: run the enabled methods on every certified problem.
  std::vector<std::vector<BenchRecord>> per_problem(batch_problems.size());
  parallel_for(static_cast<int>(batch_problems.size()), threads, [&](int idx) {
    const Candidate &cand = *batch_problems[static_cast<size_t>(idx)];
    const PTProblem &prob = *cand.prob;
    auto &records = per_problem[static_cast<size_t>(idx)];

    const Proportions even = heuristics::even_proportions(prob.num_polytopes() - 1);
    std::optional<Proportions> dist;
    try {
      dist = heuristics::distance_proportions(prob);
    } catch (const InvalidProblemError &) {
    }

    auto base_record = [&](const std::string &method) {
      BenchRecord r;
      r.cell_polytopes = cell.polytopes;
      r.cell_degree = cell.degree;
      r.seed = cand.seed;
      r.method = method;
      return r;
    };

    auto run_program = [&](const std::string &method, const conic::ConicProgram &program,
                           const Proportions &s) {
      BenchRecord r = base_record(method);
      std::vector<double> times;
      conic::Solution sol;
      const int reps = std::max(1, config.timing_reps);
      for (int rep = 0; rep < reps; ++rep) {
        sol = conic::solve(program);
        times.push_back(sol.wall_time * 1e3);
      }
      r.status = sol.status;
      if (sol.status == conic::SolveStatus::Optimal) {
        r.T = sol.T;
        r.y = sol.y;
        r.alpha = sol.alpha;
        r.success = conic::verify(prob, s, sol, config.verify_samples, config.verify_tol)
                        .ok(config.verify_tol);
      }
      r.wall_ms_median = median(times);
      double sum = 0.0;
      for (double t : times) sum += t;
      r.wall_ms_mean = sum / static_cast<double>(times.size());
      records.push_back(std::move(r));
    };

    for (const std::string &method : config.methods) {
      if (method == "N") {
        run_program("N", conic::build_naive_lp(prob, even, config.naive_T), even);
      } else if (method == "O") {
        run_program("O", conic::build_relaxation(prob, even), even);
      } else if (method == "Oh") {
        if (dist) {
          run_program("Oh", conic::build_relaxation(prob, *dist), *dist);
        } else {
          records.push_back(base_record("Oh"));
        }
      } else if (method == "C-feas") {
        BenchRecord r = base_record("C-feas");
        r.success = cand.feas.feasible;
        if (cand.feas.best_solution) {
          const auto &sol = *cand.feas.best_solution;
          r.status = sol.status;
          r.T = sol.T;
          r.y = sol.y;
          r.alpha = sol.alpha;
        }
        r.wall_ms_median = cand.feas_seconds * 1e3;
        r.wall_ms_mean = cand.feas_seconds * 1e3;
        records.push_back(std::move(r));
      } else if (method == "C-opt") {
        cma::CmaConfig cfg;
        cfg.mode = cma::Mode::Optimize;
        cfg.max_evals = config.cma_opt_evals;
        cfg.seed = mix(cand.seed, 0x0b7ull);
        cfg.slack_weight = config.slack_weight;
        if (dist) cfg.initial_candidates.push_back(dist->values().array().log().matrix());
        const auto t0 = std::chrono::steady_clock::now();
        const cma::RunResult res = cma::run(prob, cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        BenchRecord r = base_record("C-opt");
        r.success = res.feasible;
        if (res.best_solution) {
          const auto &sol = *res.best_solution;
          r.status = sol.status;
          r.T = sol.T;
          r.y = sol.y;
          r.alpha = sol.alpha;
        }
        r.wall_ms_median = seconds * 1e3;
        r.wall_ms_mean = seconds * 1e3;
        records.push_back(std::move(r));
      } else {
        throw std::invalid_argument("run_cell: unknown method '" + method + "'");
      }
    }
  });

  for (auto &list : per_problem) {
    for (auto &r : list) report.records.push_back(std::move(r));
  }
  std::stable_sort(report.records.begin(), report.records.end(),
                   [](const BenchRecord &a, const BenchRecord &b) {
                     if (a.seed != b.seed) return a.seed < b.seed;
                     return a.method < b.method;
                   });
  return report;
}

Summary summarize(const std::vector<BenchRecord> &records) {
  Summary out;

  std::map<std::tuple<int, int, std::string>, std::pair<int, int>> matrix;
  std::set<int> polytope_counts;
  std::set<std::string> methods_seen;
  for (const auto &r : records) {
    auto &cell = matrix[{r.cell_polytopes, r.cell_degree, r.method}];
    cell.second += 1;
    cell.first += r.success ? 1 : 0;
    polytope_counts.insert(r.cell_polytopes);
    methods_seen.insert(r.method);
  }
  for (const auto &[key, counts] : matrix) {
    SummaryRow row;
    row.polytopes = std::get<0>(key);
    row.degree = std::get<1>(key);
    row.method = std::get<2>(key);
    row.successes = counts.first;
    row.total = counts.second;
    out.success_matrix.push_back(row);
  }

  for (const auto &m : kMethodOrder) {
    if (methods_seen.count(m)) out.methods.push_back(m);
  }
  out.polytope_counts.assign(polytope_counts.begin(), polytope_counts.end());

  for (const auto &method : out.methods) {
    std::vector<double> by_count;
    for (int pc : out.polytope_counts) {
      double sum = 0.0;
      int cells = 0;
      for (const auto &row : out.success_matrix) {
        if (row.method == method && row.polytopes == pc && row.total > 0) {
          sum += static_cast<double>(row.successes) / row.total;
          ++cells;
        }
      }
      by_count.push_back(cells > 0 ? sum / cells : 0.0);
    }
    out.success_by_polytopes.push_back(by_count);
  }

  for (const auto &method : out.methods) {
    double sum = 0.0;
    int count = 0;
    for (const auto &r : records) {
      if (r.method == method && r.success && r.T) {
        sum += *r.T;
        ++count;
      }
    }
    out.mean_time_per_method.push_back(count > 0 ? sum / count : 0.0);
    out.mean_time_counts.push_back(count);
  }
  return out;
}

std::string records_csv(const std::vector<BenchRecord> &records) {
  std::ostringstream os;
  os << "cell_polytopes,cell_degree,seed,method,status,T,y,alpha,success\n";
  for (const auto &r : records) {
    os << r.cell_polytopes << ',' << r.cell_degree << ',' << r.seed << ',' << r.method << ','
       << conic::to_string(r.status) << ',' << format_optional(r.T) << ','
       << format_optional(r.y) << ',' << format_optional(r.alpha) << ',' << (r.success ? 1 : 0)
       << '\n';
  }
  return os.str();
}

std::string timing_csv(const std::vector<BenchRecord> &records) {
  std::ostringstream os;
  os << "cell_polytopes,cell_degree,seed,method,wall_ms_median,wall_ms_mean\n";
  for (const auto &r : records) {
    os << r.cell_polytopes << ',' << r.cell_degree << ',' << r.seed << ',' << r.method << ','
       << format_double(r.wall_ms_median) << ',' << format_double(r.wall_ms_mean) << '\n';
  }
  return os.str();
}

std::string success_matrix_csv(const Summary &summary) {
  std::ostringstream os;
  os << "cell_polytopes,cell_degree,method,successes,total,rate\n";
  for (const auto &row : summary.success_matrix) {
    os << row.polytopes << ',' << row.degree << ',' << row.method << ',' << row.successes << ','
       << row.total << ','
       << format_double(row.total > 0 ? static_cast<double>(row.successes) / row.total : 0.0)
       << '\n';
  }
  for (const auto &note : summary.footers) os << "# " << note << '\n';
  return os.str();
}

std::string mean_time_csv(const Summary &summary) {
  std::ostringstream os;
  os << "method,mean_T,successes\n";
  for (size_t i = 0; i < summary.methods.size(); ++i) {
    os << summary.methods[i] << ',' << format_double(summary.mean_time_per_method[i]) << ','
       << summary.mean_time_counts[i] << '\n';
  }
  for (const auto &note : summary.footers) os << "# " << note << '\n';
  return os.str();
}

namespace {

const char *kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

struct ChartFrame {
  double x0 = 70, y0 = 40, x1 = 600, y1 = 360;  // plot area corners
  double width = 660, height = 430;
};

void svg_header(std::ostringstream &os, const ChartFrame &f, const std::string &title,
                const std::string &ylabel) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\""
     << f.height << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << (f.x0 + f.x1) / 2 << "\" y=\"22\" text-anchor=\"middle\" "
     << "font-family=\"sans-serif\" font-size=\"15\">" << title << "</text>\n";
  os << "<text x=\"18\" y=\"" << (f.y0 + f.y1) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 18 " << (f.y0 + f.y1) / 2 << ")\">" << ylabel << "</text>\n";
  os << "<line x1=\"" << f.x0 << "\" y1=\"" << f.y1 << "\" x2=\"" << f.x1 << "\" y2=\"" << f.y1
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << f.x0 << "\" y1=\"" << f.y0 << "\" x2=\"" << f.x0 << "\" y2=\"" << f.y1
     << "\" stroke=\"black\"/>\n";
}

}  // namespace

std::string success_svg(const Summary &summary) {
  ChartFrame f;
  std::ostringstream os;
  svg_header(os, f, "Success rate by polytope count", "success rate");

  const int nx = static_cast<int>(summary.polytope_counts.size());
  auto xpos = [&](int i) {
    return nx <= 1 ? (f.x0 + f.x1) / 2 : f.x0 + (f.x1 - f.x0) * i / (nx - 1);
  };
  auto ypos = [&](double rate) { return f.y1 - (f.y1 - f.y0) * rate; };

  for (int tick = 0; tick <= 5; ++tick) {
    const double rate = tick / 5.0;
    os << "<line x1=\"" << f.x0 - 4 << "\" y1=\"" << ypos(rate) << "\" x2=\"" << f.x0 << "\" y2=\""
       << ypos(rate) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << f.x0 - 8 << "\" y=\"" << ypos(rate) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << rate
       << "</text>\n";
  }
  for (int i = 0; i < nx; ++i) {
    os << "<text x=\"" << xpos(i) << "\" y=\"" << f.y1 + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << summary.polytope_counts[static_cast<size_t>(i)] << "</text>\n";
  }
  os << "<text x=\"" << (f.x0 + f.x1) / 2 << "\" y=\"" << f.y1 + 38
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">polytopes</text>\n";

  for (size_t mi = 0; mi < summary.methods.size(); ++mi) {
    const char *color = kPalette[mi % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (int i = 0; i < nx; ++i) {
      os << xpos(i) << ',' << ypos(summary.success_by_polytopes[mi][static_cast<size_t>(i)]) << ' ';
    }
    os << "\"/>\n";
    for (int i = 0; i < nx; ++i) {
      os << "<circle cx=\"" << xpos(i) << "\" cy=\""
         << ypos(summary.success_by_polytopes[mi][static_cast<size_t>(i)]) << "\" r=\"3\" fill=\""
         << color << "\"/>\n";
    }
    os << "<text x=\"" << f.x1 - 90 << "\" y=\"" << f.y0 + 16 * (mi + 1)
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">"
       << summary.methods[mi] << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string timing_svg(const std::vector<BenchRecord> &records) {
  // Median of medians per (method, polytope count).
  std::map<std::string, std::map<int, std::vector<double>>> samples;
  std::set<int> counts;
  for (const auto &r : records) {
    samples[r.method][r.cell_polytopes].push_back(r.wall_ms_median);
    counts.insert(r.cell_polytopes);
  }

  double lo = std::numeric_limits<double>::max(), hi = 0.0;
  std::map<std::string, std::map<int, double>> med;
  for (auto &[method, per_count] : samples) {
    for (auto &[pc, values] : per_count) {
      const double m = std::max(median(values), 1e-4);
      med[method][pc] = m;
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  }
  if (med.empty()) {
    lo = 0.1;
    hi = 10.0;
  }
  const double log_lo = std::floor(std::log10(lo));
  const double log_hi = std::ceil(std::log10(std::max(hi, lo * 1.01)));

  ChartFrame f;
  std::ostringstream os;
  svg_header(os, f, "Median solve time", "wall time [ms]");

  const std::vector<int> xs(counts.begin(), counts.end());
  const int nx = static_cast<int>(xs.size());
  auto xpos = [&](int i) {
    return nx <= 1 ? (f.x0 + f.x1) / 2 : f.x0 + (f.x1 - f.x0) * i / (nx - 1);
  };
  auto ypos = [&](double ms) {
    const double t = (std::log10(ms) - log_lo) / std::max(log_hi - log_lo, 1.0);
    return f.y1 - (f.y1 - f.y0) * std::clamp(t, 0.0, 1.0);
  };

  for (int e = static_cast<int>(log_lo); e <= static_cast<int>(log_hi); ++e) {
    const double ms = std::pow(10.0, e);
    os << "<line x1=\"" << f.x0 - 4 << "\" y1=\"" << ypos(ms) << "\" x2=\"" << f.x0 << "\" y2=\""
       << ypos(ms) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << f.x0 - 8 << "\" y=\"" << ypos(ms) + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
       << "</text>\n";
  }
  for (int i = 0; i < nx; ++i) {
    os << "<text x=\"" << xpos(i) << "\" y=\"" << f.y1 + 18
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << xs[static_cast<size_t>(i)] << "</text>\n";
  }
  os << "<text x=\"" << (f.x0 + f.x1) / 2 << "\" y=\"" << f.y1 + 38
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">polytopes</text>\n";

  int mi = 0;
  for (const auto &[method, per_count] : med) {
    const char *color = kPalette[mi % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (int i = 0; i < nx; ++i) {
      const auto it = per_count.find(xs[static_cast<size_t>(i)]);
      if (it != per_count.end()) os << xpos(i) << ',' << ypos(it->second) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << f.x1 - 90 << "\" y=\"" << f.y0 + 16 * (mi + 1)
       << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << color << "\">" << method
       << "</text>\n";
    ++mi;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace polytraj::bench
