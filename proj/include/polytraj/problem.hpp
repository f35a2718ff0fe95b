#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polytraj/geometry.hpp"

namespace polytraj::problem {

enum class Relation { Equality, Inequality };

/// Linear constraint set on a derivative of the trajectory:
/// { x | matrix * x (relation) offset }.
struct DerivativeBound {
  Eigen::MatrixXd matrix;  // rows x dim
  Eigen::VectorXd offset;  // rows
  Relation relation = Relation::Inequality;
};

/// Strictly positive traversal proportions summing to one.
class Proportions {
 public:
  explicit Proportions(Eigen::VectorXd values);

  int segments() const { return static_cast<int>(values_.size()); }
  const Eigen::VectorXd &values() const { return values_; }
  double operator[](int j) const { return values_(j); }

 private:
  Eigen::VectorXd values_;
};

/// Polytope-traversal problem instance: an ordered corridor of polytopes, a
/// Bezier degree, boundary states and derivative bounds.
struct PTProblem {
  std::vector<geometry::Polytope> polytopes;
  int dim = 0;
  int degree = 0;
  Eigen::VectorXd start_position;
  Eigen::VectorXd end_position;
  std::optional<Eigen::VectorXd> start_velocity;  // equality target, scaled by T
  std::optional<Eigen::VectorXd> end_velocity;
  std::vector<DerivativeBound> velocity_bounds;
  std::vector<DerivativeBound> acceleration_bounds;

  int num_polytopes() const { return static_cast<int>(polytopes.size()); }

  /// Shape consistency checks; throws std::invalid_argument on violation.
  void validate() const;
};

enum class BoundaryVelocityMode {
  Zero,    // rest-to-rest equality targets
  Random,  // equality targets sampled inside the velocity box
  Free,    // no boundary velocity equalities
};

struct GeneratorConfig {
  int dim = 2;
  int n_polytopes = 2;
  int degree = 5;
  int points_per_polytope = 10;
  double decel_impossible_prob = 0.4;
  std::uint64_t seed = 0;
  double translation_scale = 1.0;
  std::pair<double, double> velocity_bound_range{0.5, 2.0};
  std::pair<double, double> acceleration_bound_range{0.5, 2.0};
  std::pair<double, double> decel_floor_range{0.0, 0.3};
  BoundaryVelocityMode boundary_velocity = BoundaryVelocityMode::Zero;
};

/// Pseudo-random problem generator. Deterministic for a fixed seed: polytopes
/// are hulls of uniform samples translated along x by index, consecutive
/// hulls are glued through a shared segment point, boundary states are
/// interior samples, velocity bounds are axis-aligned boxes, and with
/// probability decel_impossible_prob one axis gets a one-sided acceleration
/// bound that excludes deceleration.
PTProblem generate(const GeneratorConfig &config);

/// LP feasibility of every consecutive polytope intersection.
bool consecutive_intersections_nonempty(const PTProblem &problem);

std::string to_json(const PTProblem &problem);
PTProblem from_json(const std::string &text);

}  // namespace polytraj::problem
