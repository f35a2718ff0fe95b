#include "polytraj/assemble.hpp"

#include <iostream>

#include "polytraj/curves.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/geometry.hpp"

namespace polytraj::assemble {

Eigen::MatrixXd kron(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

std::vector<ConstraintBlock> polytope_blocks(const PTProblem &problem, const Proportions &s) {
  if (s.segments() != problem.num_polytopes()) {
    throw std::invalid_argument("polytope_blocks: proportions/polytope count mismatch");
  }
  const auto sets = curves::traversal_split_maps(problem.degree, s.values());
  std::vector<ConstraintBlock> blocks;
  blocks.reserve(sets.size());
  for (size_t j = 0; j < sets.size(); ++j) {
    const auto &poly = problem.polytopes[j];
    ConstraintBlock b;
    b.matrix = kron(sets[j].entries(), poly.normals());
    b.offset = poly.offsets().replicate(problem.degree + 1, 1);
    b.relation = Relation::Inequality;
    b.rhs_scale = RhsScale::Constant;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<ConstraintBlock> velocity_blocks(const PTProblem &problem) {
  const int n = problem.degree;
  const int d = problem.dim;
  std::vector<ConstraintBlock> blocks;
  const Eigen::MatrixXd d1 = curves::derivative_maps(n, 1).entries();

  for (const auto &bound : problem.velocity_bounds) {
    ConstraintBlock b;
    b.matrix = kron(d1, bound.matrix);
    b.offset = bound.offset.replicate(n, 1);
    b.relation = bound.relation;
    b.rhs_scale = RhsScale::Time;
    blocks.push_back(std::move(b));
  }

  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  if (problem.start_velocity) {
    ConstraintBlock b;
    b.matrix = kron(d1.row(0), id);
    b.offset = *problem.start_velocity;
    b.relation = Relation::Equality;
    b.rhs_scale = RhsScale::Time;
    blocks.push_back(std::move(b));
  }
  if (problem.end_velocity) {
    ConstraintBlock b;
    b.matrix = kron(d1.row(n - 1), id);
    b.offset = *problem.end_velocity;
    b.relation = Relation::Equality;
    b.rhs_scale = RhsScale::Time;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

std::vector<ConstraintBlock> acceleration_blocks(const PTProblem &problem) {
  std::vector<ConstraintBlock> blocks;
  if (problem.acceleration_bounds.empty()) return blocks;
  if (problem.degree < 2) {
    throw UnsupportedDegreeError("acceleration_blocks: degree < 2 with acceleration bounds");
  }
  const Eigen::MatrixXd d2 = curves::derivative_maps(problem.degree, 2).entries();
  for (const auto &bound : problem.acceleration_bounds) {
    ConstraintBlock b;
    b.matrix = kron(d2, bound.matrix);
    b.offset = bound.offset.replicate(problem.degree - 1, 1);
    b.relation = bound.relation;
    b.rhs_scale = RhsScale::TimeSquared;
    blocks.push_back(std::move(b));
  }
  return blocks;
}

ConstraintBlock boundary_blocks(const PTProblem &problem) {
  const int n = problem.degree;
  const int d = problem.dim;
  if (!geometry::contains(problem.polytopes.front(), problem.start_position, 1e-9)) {
    std::cerr << "polytraj: warning: start position lies outside the first polytope\n";
  }
  if (!geometry::contains(problem.polytopes.back(), problem.end_position, 1e-9)) {
    std::cerr << "polytraj: warning: end position lies outside the last polytope\n";
  }
  ConstraintBlock b;
  b.matrix.setZero(2 * d, (n + 1) * d);
  b.matrix.block(0, 0, d, d) = Eigen::MatrixXd::Identity(d, d);
  b.matrix.block(d, n * d, d, d) = Eigen::MatrixXd::Identity(d, d);
  b.offset.resize(2 * d);
  b.offset.head(d) = problem.start_position;
  b.offset.tail(d) = problem.end_position;
  b.relation = Relation::Equality;
  b.rhs_scale = RhsScale::Constant;
  return b;
}

std::vector<ConstraintBlock> all_blocks(const PTProblem &problem, const Proportions &s) {
  std::vector<ConstraintBlock> blocks;
  blocks.push_back(boundary_blocks(problem));
  for (auto &b : polytope_blocks(problem, s)) blocks.push_back(std::move(b));
  for (auto &b : velocity_blocks(problem)) blocks.push_back(std::move(b));
  for (auto &b : acceleration_blocks(problem)) blocks.push_back(std::move(b));
  return blocks;
}

bool velocity_rows_lp_preserving(const PTProblem &problem) {
  if (problem.start_velocity || problem.end_velocity) return false;
  for (const auto &bound : problem.velocity_bounds) {
    if (bound.relation == Relation::Equality) return false;
    // Null velocity admissible: M * 0 <= l requires l >= 0.
    if ((bound.offset.array() < 0.0).any()) return false;
  }
  return true;
}

}  // namespace polytraj::assemble
