#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace polytraj::curves {

/// Dense linear map acting per coordinate axis on the control points of a
/// Bezier curve. Control points are stored as a (n+1) x dim matrix with one
/// point per row; apply() multiplies from the left, so row k of entries()
/// expresses output point k as a combination of the input points. The same
/// matrix applies to every axis.
class LinearMap {
 public:
  explicit LinearMap(Eigen::MatrixXd entries);

  int rows() const { return static_cast<int>(entries_.rows()); }
  int cols() const { return static_cast<int>(entries_.cols()); }
  const Eigen::MatrixXd &entries() const { return entries_; }

  /// points: cols() x dim (one control point per row). Returns rows() x dim.
  Eigen::MatrixXd apply(const Eigen::MatrixXd &points) const;

 private:
  Eigen::MatrixXd entries_;
};

/// Polynomial curve of degree n in Bernstein form on [0, T].
class BezierCurve {
 public:
  /// control_points: (degree+1) x dim, one point per row; duration > 0.
  BezierCurve(Eigen::MatrixXd control_points, double duration);

  int degree() const { return static_cast<int>(control_points_.rows()) - 1; }
  int dim() const { return static_cast<int>(control_points_.cols()); }
  double duration() const { return duration_; }
  const Eigen::MatrixXd &control_points() const { return control_points_; }

 private:
  Eigen::MatrixXd control_points_;
  double duration_;
};

/// Bernstein basis polynomial value C(n,i) u^i (1-u)^(n-i).
double bernstein(int n, int i, double u);

/// Curve position at time t in [0, duration], via the De Casteljau recurrence.
Eigen::VectorXd evaluate(const BezierCurve &curve, double t);

/// Control-point maps of the order-th derivative curve (order 1 or 2),
/// excluding the 1/T^order factor. Row i of the returned (n+1-order) x (n+1)
/// map gives derivative control point i.
LinearMap derivative_maps(int n, int order);

/// Derivative curve including the 1/T^order time scaling.
BezierCurve derivative_curve(const BezierCurve &curve, int order);

/// De Casteljau subdivision at local parameter u in [0, 1]. Returns the
/// (left, right) map pair; row i of each (n+1) x (n+1) map gives control
/// point i of the sub-curve on [0, u*T] respectively [u*T, T].
std::pair<LinearMap, LinearMap> decasteljau_split_maps(int n, double u);

/// Recursive traversal decomposition for proportions s (all positive, summing
/// to one). Returns m+1 map-sets; map-set j reproduces the original curve on
/// the cumulative window [s_{j-1} T, s_j T] and acts on the original control
/// points.
std::vector<LinearMap> traversal_split_maps(int n, const Eigen::VectorXd &proportions);

}  // namespace polytraj::curves
