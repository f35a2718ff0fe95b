#include "polytraj/conic.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "polytraj/curves.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/geometry.hpp"
#include "polytraj/socp.hpp"

namespace polytraj::conic {

namespace {

using assemble::ConstraintBlock;
using assemble::RhsScale;
using problem::Relation;
using nlohmann::json;

constexpr double kRowTol = 1e-7;

struct Layout {
  bool with_T = false;
  bool with_y = false;
  bool with_alpha = false;
  bool with_soc = false;
  double fixed_time = 0.0;  // > 0: substitute T by the constant
};

// Shared lowering of constraint blocks into a ConicProgram.
ConicProgram assemble_program(const PTProblem &problem, const Proportions &s, const Layout &lay,
                              double slack_weight) {
  const int nx = (problem.degree + 1) * problem.dim;
  ConicProgram prog;
  prog.degree = problem.degree;
  prog.dim = problem.dim;
  prog.num_control_vars = nx;
  prog.fixed_time = lay.fixed_time;

  int nv = nx;
  if (lay.with_T) prog.idx_T = nv++;
  if (lay.with_y) prog.idx_y = nv++;
  if (lay.with_alpha) prog.idx_alpha = nv++;
  prog.num_vars = nv;

  const auto blocks = assemble::all_blocks(problem, s);

  int eq_rows = 0, ineq_rows = 0;
  for (const auto &b : blocks) {
    (b.relation == Relation::Equality ? eq_rows : ineq_rows) += static_cast<int>(b.matrix.rows());
  }
  if (lay.with_T) ineq_rows += 1;               // T >= 1
  if (lay.with_y && !lay.with_T) ineq_rows += 1;  // y >= 1 in the sqrt recovery LP
  if (lay.with_alpha) ineq_rows += 1;           // alpha >= 0

  prog.eq_matrix.setZero(eq_rows, nv);
  prog.eq_rhs.setZero(eq_rows);
  prog.ineq_matrix.setZero(ineq_rows, nv);
  prog.ineq_rhs.setZero(ineq_rows);

  int ei = 0, ii = 0;
  for (const auto &b : blocks) {
    const int rows = static_cast<int>(b.matrix.rows());
    const bool eq = b.relation == Relation::Equality;
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(rows, nv);
    lhs.leftCols(nx) = b.matrix;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);

    switch (b.rhs_scale) {
      case RhsScale::Constant:
        rhs = b.offset;
        break;
      case RhsScale::Time:
        if (lay.fixed_time > 0.0) {
          rhs = b.offset * lay.fixed_time;
        } else if (lay.with_T) {
          lhs.col(prog.idx_T) = -b.offset;
        } else {
          // No T variable: only offset-free rows are representable.
          if (b.offset.cwiseAbs().maxCoeff() != 0.0) {
            throw MisuseError("conic: velocity rows with nonzero offsets need the T variable");
          }
        }
        break;
      case RhsScale::TimeSquared:
        if (lay.fixed_time > 0.0) {
          rhs = b.offset * lay.fixed_time * lay.fixed_time;
        } else if (lay.with_y) {
          lhs.col(prog.idx_y) = -b.offset;
        } else {
          if (b.offset.cwiseAbs().maxCoeff() != 0.0) {
            throw MisuseError("conic: acceleration rows with nonzero offsets need the y variable");
          }
        }
        break;
    }

    // Slack relaxation applies to derivative inequalities only.
    if (!eq && lay.with_alpha && b.rhs_scale != RhsScale::Constant) {
      lhs.col(prog.idx_alpha).setConstant(-1.0);
    }

    if (eq) {
      prog.eq_matrix.middleRows(ei, rows) = lhs;
      prog.eq_rhs.segment(ei, rows) = rhs;
      ei += rows;
    } else {
      prog.ineq_matrix.middleRows(ii, rows) = lhs;
      prog.ineq_rhs.segment(ii, rows) = rhs;
      ii += rows;
    }
  }

  if (lay.with_T) {
    prog.ineq_matrix(ii, prog.idx_T) = -1.0;
    prog.ineq_rhs(ii) = -1.0;
    ++ii;
  }
  if (lay.with_y && !lay.with_T) {
    prog.ineq_matrix(ii, prog.idx_y) = -1.0;
    prog.ineq_rhs(ii) = -1.0;
    ++ii;
  }
  if (lay.with_alpha) {
    prog.ineq_matrix(ii, prog.idx_alpha) = -1.0;
    prog.ineq_rhs(ii) = 0.0;
    ++ii;
  }

  prog.objective.setZero(nv);
  if (lay.with_T && lay.with_y) {
    prog.objective(prog.idx_T) = -1.0;  // min y - T
    prog.objective(prog.idx_y) = 1.0;
  } else if (lay.with_T) {
    prog.objective(prog.idx_T) = 1.0;  // min T
  } else if (lay.with_y) {
    prog.objective(prog.idx_y) = 1.0;  // min y
  }
  if (lay.with_alpha) prog.objective(prog.idx_alpha) = slack_weight;

  if (lay.with_soc) {
    // ||(2T, y-1)|| <= y+1, exact for y >= -1 which T >= 1 guarantees.
    prog.soc_matrix.setZero(3, nv);
    prog.soc_rhs.setZero(3);
    prog.soc_matrix(0, prog.idx_y) = -1.0;
    prog.soc_rhs(0) = 1.0;
    prog.soc_matrix(1, prog.idx_T) = -2.0;
    prog.soc_rhs(1) = 0.0;
    prog.soc_matrix(2, prog.idx_y) = -1.0;
    prog.soc_rhs(2) = -1.0;
  }

  prog.time_from_sqrt_y = !lay.with_T && lay.with_y;
  return prog;
}

socp::Problem lower(const ConicProgram &prog) {
  socp::Problem p;
  p.c = prog.objective;
  p.A = prog.eq_matrix;
  p.b = prog.eq_rhs;
  const int soc = static_cast<int>(prog.soc_matrix.rows());
  p.G.resize(prog.ineq_matrix.rows() + soc, prog.num_vars);
  p.h.resize(prog.ineq_rhs.size() + soc);
  p.G.topRows(prog.ineq_matrix.rows()) = prog.ineq_matrix;
  p.h.head(prog.ineq_rhs.size()) = prog.ineq_rhs;
  if (soc > 0) {
    p.G.bottomRows(soc) = prog.soc_matrix;
    p.h.tail(soc) = prog.soc_rhs;
    p.soc_dims = {soc};
  }
  p.lp_dim = static_cast<int>(prog.ineq_matrix.rows());
  return p;
}

// Worst unscaled violation of the program rows at z.
double residual(const ConicProgram &prog, const Eigen::VectorXd &z) {
  double viol = 0.0;
  if (prog.eq_matrix.rows() > 0) {
    viol = (prog.eq_matrix * z - prog.eq_rhs).cwiseAbs().maxCoeff();
  }
  if (prog.ineq_matrix.rows() > 0) {
    viol = std::max(viol, (prog.ineq_matrix * z - prog.ineq_rhs).maxCoeff());
  }
  if (prog.soc_matrix.rows() > 0) {
    const Eigen::VectorXd sv = prog.soc_rhs - prog.soc_matrix * z;
    viol = std::max(viol, sv.tail(sv.size() - 1).norm() - sv(0));
  }
  return viol;
}

}  // namespace

ConicProgram build_relaxation(const PTProblem &problem, const Proportions &s) {
  Layout lay;
  lay.with_T = true;
  lay.with_y = true;
  lay.with_soc = true;
  return assemble_program(problem, s, lay, 0.0);
}

ConicProgram build_slack_relaxation(const PTProblem &problem, const Proportions &s, double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("build_slack_relaxation: w must be nonnegative");
  Layout lay;
  lay.with_T = true;
  lay.with_y = true;
  lay.with_soc = true;
  lay.with_alpha = true;
  return assemble_program(problem, s, lay, w);
}

ConicProgram build_lp_special(const PTProblem &problem, const Proportions &s, LpSpecialCase which) {
  Layout lay;
  if (which == LpSpecialCase::NoAcceleration) {
    for (const auto &b : problem.acceleration_bounds) {
      if (b.offset.cwiseAbs().maxCoeff() != 0.0) {
        throw MisuseError("build_lp_special: acceleration family present");
      }
    }
    lay.with_T = true;
  } else {
    if (problem.start_velocity && problem.start_velocity->cwiseAbs().maxCoeff() != 0.0) {
      throw MisuseError("build_lp_special: velocity family present (start velocity)");
    }
    if (problem.end_velocity && problem.end_velocity->cwiseAbs().maxCoeff() != 0.0) {
      throw MisuseError("build_lp_special: velocity family present (end velocity)");
    }
    for (const auto &b : problem.velocity_bounds) {
      if (b.offset.cwiseAbs().maxCoeff() != 0.0) {
        throw MisuseError("build_lp_special: velocity family present");
      }
    }
    lay.with_y = true;
  }
  return assemble_program(problem, s, lay, 0.0);
}

ConicProgram build_naive_lp(const PTProblem &problem, const Proportions &s, double T_fixed) {
  if (!(T_fixed > 0.0)) throw std::invalid_argument("build_naive_lp: T_fixed must be positive");
  Layout lay;
  lay.fixed_time = T_fixed;
  return assemble_program(problem, s, lay, 0.0);
}

Solution solve(const ConicProgram &program) {
  const socp::Problem lowered = lower(program);

  const auto t0 = std::chrono::steady_clock::now();
  const socp::Result res = socp::solve(lowered);
  const auto t1 = std::chrono::steady_clock::now();

  Solution sol;
  sol.wall_time = std::chrono::duration<double>(t1 - t0).count();

  switch (res.status) {
    case socp::Status::Optimal:
    case socp::Status::OptimalInaccurate:
      sol.status = SolveStatus::Optimal;
      break;
    case socp::Status::PrimalInfeasible:
      sol.status = SolveStatus::Infeasible;
      break;
    default:
      sol.status = SolveStatus::NumericalFailure;
      break;
  }
  if (sol.status != SolveStatus::Optimal) return sol;

  // Solution contract: optimal status implies the rows hold to 1e-7.
  const double scale = 1.0 + res.x.cwiseAbs().maxCoeff();
  if (residual(program, res.x) > kRowTol * scale) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }

  sol.control_points.resize(program.degree + 1, program.dim);
  for (int i = 0; i <= program.degree; ++i) {
    sol.control_points.row(i) = res.x.segment(i * program.dim, program.dim).transpose();
  }
  if (program.fixed_time > 0.0) {
    sol.T = program.fixed_time;
    sol.y = program.fixed_time * program.fixed_time;
  } else if (program.time_from_sqrt_y) {
    sol.y = res.x(program.idx_y);
    sol.T = std::sqrt(std::max(sol.y, 0.0));
  } else {
    sol.T = res.x(program.idx_T);
    sol.y = program.idx_y >= 0 ? res.x(program.idx_y) : sol.T * sol.T;
  }
  if (program.idx_alpha >= 0) sol.alpha = res.x(program.idx_alpha);
  sol.objective = res.primal_objective;

  if ((program.idx_T >= 0 && sol.T < 1.0 - 1e-9) ||
      (program.idx_y >= 0 && sol.T * sol.T > sol.y + kRowTol * std::max(1.0, sol.y))) {
    sol.status = SolveStatus::NumericalFailure;
  }
  return sol;
}

double VerifyReport::max_violation() const {
  return std::max({polytope, velocity, acceleration, boundary, time_floor});
}

VerifyReport verify(const PTProblem &problem, const Proportions &s, const Solution &solution,
                    int n_samples, double tol) {
  (void)tol;  // the report carries raw violations; callers compare via ok(tol)
  if (solution.status != SolveStatus::Optimal) {
    throw std::invalid_argument("verify: solution is not optimal");
  }
  if (n_samples < 2) throw std::invalid_argument("verify: need at least two samples");

  VerifyReport rep;
  const double T = solution.T;
  const curves::BezierCurve curve(solution.control_points, T);
  const curves::BezierCurve vel = curves::derivative_curve(curve, 1);
  const bool has_acc = problem.degree >= 2;
  const curves::BezierCurve acc =
      has_acc ? curves::derivative_curve(curve, 2) : vel;

  // Cumulative window edges.
  std::vector<double> edges(static_cast<size_t>(s.segments()) + 1, 0.0);
  for (int j = 0; j < s.segments(); ++j) edges[static_cast<size_t>(j) + 1] = edges[static_cast<size_t>(j)] + s[j];
  edges.back() = 1.0;

  for (int k = 0; k < n_samples; ++k) {
    const double f = static_cast<double>(k) / (n_samples - 1);
    const double t = std::min(f * T, T);

    const Eigen::VectorXd x = curves::evaluate(curve, t);
    int window = 0;
    while (window + 1 < s.segments() && f > edges[static_cast<size_t>(window) + 1]) ++window;
    const auto &poly = problem.polytopes[static_cast<size_t>(window)];
    rep.polytope = std::max(rep.polytope, (poly.normals() * x - poly.offsets()).maxCoeff());

    const Eigen::VectorXd v = curves::evaluate(vel, t);
    for (const auto &bound : problem.velocity_bounds) {
      const Eigen::VectorXd r = bound.matrix * v - bound.offset;
      const double viol = bound.relation == Relation::Equality ? r.cwiseAbs().maxCoeff() : r.maxCoeff();
      rep.velocity = std::max(rep.velocity, viol);
    }
    if (has_acc && !problem.acceleration_bounds.empty()) {
      const Eigen::VectorXd a = curves::evaluate(acc, t);
      for (const auto &bound : problem.acceleration_bounds) {
        const Eigen::VectorXd r = bound.matrix * a - bound.offset;
        const double viol =
            bound.relation == Relation::Equality ? r.cwiseAbs().maxCoeff() : r.maxCoeff();
        rep.acceleration = std::max(rep.acceleration, viol);
      }
    }
  }

  rep.boundary = std::max((curves::evaluate(curve, 0.0) - problem.start_position).cwiseAbs().maxCoeff(),
                          (curves::evaluate(curve, T) - problem.end_position).cwiseAbs().maxCoeff());
  if (problem.start_velocity) {
    rep.boundary = std::max(
        rep.boundary, (curves::evaluate(vel, 0.0) - *problem.start_velocity).cwiseAbs().maxCoeff());
  }
  if (problem.end_velocity) {
    rep.boundary = std::max(
        rep.boundary, (curves::evaluate(vel, T) - *problem.end_velocity).cwiseAbs().maxCoeff());
  }

  rep.time_floor = std::max(0.0, 1.0 - T);
  rep.saturation_gap = std::abs(T * T - solution.y);
  return rep;
}

double geometry_violation(const PTProblem &problem, const Proportions &s) {
  // min g  s.t.  boundary equalities, polytope rows <= offsets + g, g >= 0.
  const int nx = (problem.degree + 1) * problem.dim;
  const auto boundary = assemble::boundary_blocks(problem);
  const auto polys = assemble::polytope_blocks(problem, s);

  int rows = 1;
  for (const auto &b : polys) rows += static_cast<int>(b.matrix.rows());

  socp::Problem lp;
  lp.c = Eigen::VectorXd::Zero(nx + 1);
  lp.c(nx) = 1.0;
  lp.A.setZero(boundary.matrix.rows(), nx + 1);
  lp.A.leftCols(nx) = boundary.matrix;
  lp.b = boundary.offset;
  lp.G.setZero(rows, nx + 1);
  lp.h.setZero(rows);
  int ri = 0;
  for (const auto &b : polys) {
    const int r = static_cast<int>(b.matrix.rows());
    lp.G.block(ri, 0, r, nx) = b.matrix;
    lp.G.block(ri, nx, r, 1).setConstant(-1.0);
    lp.h.segment(ri, r) = b.offset;
    ri += r;
  }
  lp.G(ri, nx) = -1.0;
  lp.h(ri) = 0.0;
  lp.lp_dim = rows;

  const socp::Result res = socp::solve(lp);
  if (res.status != socp::Status::Optimal && res.status != socp::Status::OptimalInaccurate) {
    return 1e6;
  }
  return std::max(0.0, res.primal_objective);
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

std::string solution_to_json(const Solution &solution, const Proportions &s) {
  json j;
  j["status"] = to_string(solution.status);
  j["proportions"] = std::vector<double>(s.values().data(), s.values().data() + s.values().size());
  j["wall_time_ms"] = solution.wall_time * 1e3;
  if (solution.status == SolveStatus::Optimal) {
    j["T"] = solution.T;
    j["y"] = solution.y;
    if (solution.alpha) {
      j["alpha"] = *solution.alpha;
    } else {
      j["alpha"] = nullptr;
    }
    j["objective"] = solution.objective;
    json pts = json::array();
    for (int i = 0; i < solution.control_points.rows(); ++i) {
      json row = json::array();
      for (int k = 0; k < solution.control_points.cols(); ++k) row.push_back(solution.control_points(i, k));
      pts.push_back(row);
    }
    j["control_points"] = pts;
  }
  return j.dump(2);
}

std::pair<Solution, Proportions> solution_from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed solution document: ") + e.what());
  }
  auto get = [&](const char *name) -> const json & {
    const auto it = j.find(name);
    if (it == j.end()) throw ParseError(std::string("missing field '") + name + "'");
    return *it;
  };

  Solution sol;
  const std::string status = get("status").get<std::string>();
  if (status == "optimal") {
    sol.status = SolveStatus::Optimal;
  } else if (status == "infeasible") {
    sol.status = SolveStatus::Infeasible;
  } else {
    sol.status = SolveStatus::NumericalFailure;
  }

  const json &jp = get("proportions");
  Eigen::VectorXd sv(jp.size());
  int i = 0;
  for (const auto &e : jp) sv(i++) = e.get<double>();

  if (sol.status == SolveStatus::Optimal) {
    sol.T = get("T").get<double>();
    sol.y = get("y").get<double>();
    if (!get("alpha").is_null()) sol.alpha = get("alpha").get<double>();
    sol.objective = get("objective").get<double>();
    const json &pts = get("control_points");
    if (!pts.is_array() || pts.empty()) throw ParseError("field 'control_points' must be a nonempty array");
    sol.control_points.resize(pts.size(), pts.front().size());
    int r = 0;
    for (const auto &row : pts) {
      if (static_cast<int>(row.size()) != sol.control_points.cols()) {
        throw ParseError("field 'control_points' has ragged rows");
      }
      int c = 0;
      for (const auto &e : row) sol.control_points(r, c++) = e.get<double>();
      ++r;
    }
  }
  return {sol, Proportions(sv)};
}

}  // namespace polytraj::conic
