#pragma once

#include <Eigen/Dense>

#include <vector>

#include "polytraj/problem.hpp"

namespace polytraj::assemble {

using problem::PTProblem;
using problem::Proportions;
using problem::Relation;

/// Scaling applied to the right-hand side of a constraint block: offsets of
/// position rows are plain constants, velocity rows scale with T and
/// acceleration rows with T^2 (the y variable after relaxation).
enum class RhsScale { Constant, Time, TimeSquared };

/// Linear constraint block over the stacked control-point vector
/// x = [x_0; x_1; ...; x_n] (point-major, coordinate index fastest):
/// matrix * x (relation) offset * scale.
struct ConstraintBlock {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd offset;
  Relation relation = Relation::Inequality;
  RhsScale rhs_scale = RhsScale::Constant;
};

/// One block per polytope: every control point of sub-curve j (per the
/// traversal split at s) lies in polytope j. rows = (n+1) * facets(H_j).
std::vector<ConstraintBlock> polytope_blocks(const PTProblem &problem, const Proportions &s);

/// Derivative-bound rows L D1_i x (rel) l T for every velocity control point,
/// plus boundary velocity equalities on the first/last velocity point.
std::vector<ConstraintBlock> velocity_blocks(const PTProblem &problem);

/// Acceleration analogue with D2_i and T^2 scaling. Throws
/// UnsupportedDegreeError when bounds are present but degree < 2.
std::vector<ConstraintBlock> acceleration_blocks(const PTProblem &problem);

/// Equality rows pinning the first/last control point to start/end.
ConstraintBlock boundary_blocks(const PTProblem &problem);

/// All blocks of the fixed-proportion problem, in a fixed order:
/// boundary, polytope, velocity, acceleration.
std::vector<ConstraintBlock> all_blocks(const PTProblem &problem, const Proportions &s);

/// Footnote condition under which the problem stays an LP: no velocity
/// equalities and the velocity bounds admit the null velocity.
bool velocity_rows_lp_preserving(const PTProblem &problem);

/// Kronecker helper: constraint row for (map row) x (coefficient row).
Eigen::MatrixXd kron(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b);

}  // namespace polytraj::assemble
