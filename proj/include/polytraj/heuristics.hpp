#pragma once

#include <Eigen/Dense>

#include "polytraj/problem.hpp"

namespace polytraj::heuristics {

using problem::PTProblem;
using problem::Proportions;

/// Uniform proportions 1/(m+1).
Proportions even_proportions(int m);

/// Shortest geometric path through the corridor (waypoint j constrained to
/// the intersection of consecutive polytopes, sum of segment norms
/// minimized), converted to proportions by segment-length ratio with a 1e-4
/// floor. Throws InvalidProblemError when some intersection is empty.
Proportions distance_proportions(const PTProblem &problem);

/// The waypoints of the shortest path, including the fixed endpoints
/// (m+2 rows). Exposed for diagnostics and tests.
Eigen::MatrixXd shortest_path_waypoints(const PTProblem &problem);

}  // namespace polytraj::heuristics
