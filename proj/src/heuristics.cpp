#include "polytraj/heuristics.hpp"

#include <stdexcept>
#include <vector>

#include "polytraj/errors.hpp"
#include "polytraj/socp.hpp"

namespace polytraj::heuristics {

namespace {

constexpr double kProportionFloor = 1e-4;

}  // namespace

Proportions even_proportions(int m) {
  if (m < 0) throw std::invalid_argument("even_proportions: m must be >= 0");
  return Proportions(Eigen::VectorXd::Constant(m + 1, 1.0 / (m + 1)));
}

Eigen::MatrixXd shortest_path_waypoints(const PTProblem &problem) {
  const int d = problem.dim;
  const int m = problem.num_polytopes() - 1;

  Eigen::MatrixXd waypoints(m + 2, d);
  waypoints.row(0) = problem.start_position.transpose();
  waypoints.row(m + 1) = problem.end_position.transpose();
  if (m == 0) return waypoints;

  // Variables: w_1..w_m (interior waypoints), then t_0..t_m (segment lengths).
  const int nw = m * d;
  const int nv = nw + (m + 1);
  auto wcol = [&](int j, int k) { return (j - 1) * d + k; };  // j in 1..m

  int lp_rows = 0;
  for (int j = 1; j <= m; ++j) {
    lp_rows += problem.polytopes[static_cast<size_t>(j - 1)].num_facets() +
               problem.polytopes[static_cast<size_t>(j)].num_facets();
  }

  socp::Problem prog;
  prog.c = Eigen::VectorXd::Zero(nv);
  prog.c.tail(m + 1).setOnes();

  const int soc_rows = (m + 1) * (d + 1);
  prog.G.setZero(lp_rows + soc_rows, nv);
  prog.h.setZero(lp_rows + soc_rows);
  prog.lp_dim = lp_rows;

  int row = 0;
  for (int j = 1; j <= m; ++j) {
    for (const auto *poly : {&problem.polytopes[static_cast<size_t>(j - 1)],
                             &problem.polytopes[static_cast<size_t>(j)]}) {
      const int r = poly->num_facets();
      prog.G.block(row, (j - 1) * d, r, d) = poly->normals();
      prog.h.segment(row, r) = poly->offsets();
      row += r;
    }
  }

  // One cone per segment: (t_j, w_{j+1} - w_j) in Q_{d+1}.
  for (int j = 0; j <= m; ++j) {
    prog.G(row, nw + j) = -1.0;
    prog.h(row) = 0.0;
    ++row;
    for (int k = 0; k < d; ++k) {
      if (j == 0) {
        prog.G(row, wcol(1, k)) = -1.0;
        prog.h(row) = -problem.start_position(k);
      } else if (j == m) {
        prog.G(row, wcol(m, k)) = 1.0;
        prog.h(row) = problem.end_position(k);
      } else {
        prog.G(row, wcol(j + 1, k)) = -1.0;
        prog.G(row, wcol(j, k)) = 1.0;
        prog.h(row) = 0.0;
      }
      ++row;
    }
    prog.soc_dims.push_back(d + 1);
  }

  const socp::Result res = socp::solve(prog);
  if (res.status == socp::Status::PrimalInfeasible) {
    throw InvalidProblemError("distance_proportions: empty consecutive polytope intersection");
  }
  if (res.status != socp::Status::Optimal && res.status != socp::Status::OptimalInaccurate) {
    throw InvalidProblemError("distance_proportions: shortest-path solve failed");
  }

  for (int j = 1; j <= m; ++j) {
    waypoints.row(j) = res.x.segment((j - 1) * d, d).transpose();
  }
  return waypoints;
}

Proportions distance_proportions(const PTProblem &problem) {
  const int m = problem.num_polytopes() - 1;
  if (m == 0) return Proportions(Eigen::VectorXd::Ones(1));

  const Eigen::MatrixXd waypoints = shortest_path_waypoints(problem);
  Eigen::VectorXd lengths(m + 1);
  for (int j = 0; j <= m; ++j) {
    lengths(j) = (waypoints.row(j + 1) - waypoints.row(j)).norm();
  }
  lengths = lengths.cwiseMax(kProportionFloor);
  lengths /= lengths.sum();
  lengths /= lengths.sum();  // second pass tightens the sum to 1 exactly
  return Proportions(lengths);
}

}  // namespace polytraj::heuristics
