#include "polytraj/curves.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polytraj::curves {

namespace {

constexpr double kProportionSumTol = 1e-12;
constexpr double kMinProportion = 1e-9;
constexpr double kRemainderFloor = 1e-12;

double binomial(int n, int k) {
  if (k > n - k) k = n - k;
  double result = 1.0;
  for (int j = 1; j <= k; ++j) {
    result *= static_cast<double>(n - k + j) / static_cast<double>(j);
  }
  return result;
}

}  // namespace

LinearMap::LinearMap(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0 || !entries_.allFinite()) {
    throw std::invalid_argument("LinearMap: entries must be nonempty and finite");
  }
}

Eigen::MatrixXd LinearMap::apply(const Eigen::MatrixXd &points) const {
  if (points.rows() != entries_.cols()) {
    throw std::invalid_argument("LinearMap::apply: control point count mismatch");
  }
  return entries_ * points;
}

BezierCurve::BezierCurve(Eigen::MatrixXd control_points, double duration)
    : control_points_(std::move(control_points)), duration_(duration) {
  if (control_points_.rows() < 1 || control_points_.cols() < 1) {
    throw std::invalid_argument("BezierCurve: need at least one control point and dim >= 1");
  }
  if (!control_points_.allFinite()) {
    throw std::invalid_argument("BezierCurve: control points must be finite");
  }
  if (!(duration_ > 0.0)) {
    throw std::invalid_argument("BezierCurve: duration must be positive");
  }
}

double bernstein(int n, int i, double u) {
  if (n < 0 || i < 0 || i > n) {
    throw std::invalid_argument("bernstein: index out of range");
  }
  if (u < 0.0 || u > 1.0) {
    throw std::invalid_argument("bernstein: parameter outside [0, 1]");
  }
  // Endpoints first so 0^0 never arises.
  if (u == 0.0) return i == 0 ? 1.0 : 0.0;
  if (u == 1.0) return i == n ? 1.0 : 0.0;
  return binomial(n, i) * std::pow(u, i) * std::pow(1.0 - u, n - i);
}

Eigen::VectorXd evaluate(const BezierCurve &curve, double t) {
  if (t < 0.0 || t > curve.duration()) {
    throw std::invalid_argument("evaluate: time outside [0, duration]");
  }
  const double u = t / curve.duration();
  Eigen::MatrixXd pts = curve.control_points();
  for (int level = curve.degree(); level >= 1; --level) {
    for (int i = 0; i < level; ++i) {
      pts.row(i) = (1.0 - u) * pts.row(i) + u * pts.row(i + 1);
    }
  }
  return pts.row(0).transpose();
}

LinearMap derivative_maps(int n, int order) {
  if (order != 1 && order != 2) {
    throw std::invalid_argument("derivative_maps: order must be 1 or 2");
  }
  if (n < order) {
    throw std::invalid_argument("derivative_maps: order exceeds degree");
  }
  Eigen::MatrixXd map = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int k = 0; k < order; ++k) {
    const int deg = n - k;
    Eigen::MatrixXd diff = Eigen::MatrixXd::Zero(deg, deg + 1);
    for (int i = 0; i < deg; ++i) {
      diff(i, i) = -static_cast<double>(deg);
      diff(i, i + 1) = static_cast<double>(deg);
    }
    map = diff * map;
  }
  return LinearMap(map);
}

BezierCurve derivative_curve(const BezierCurve &curve, int order) {
  const LinearMap maps = derivative_maps(curve.degree(), order);
  const double scale = 1.0 / std::pow(curve.duration(), order);
  return BezierCurve(scale * maps.apply(curve.control_points()), curve.duration());
}

std::pair<LinearMap, LinearMap> decasteljau_split_maps(int n, double u) {
  if (n < 1) {
    throw std::invalid_argument("decasteljau_split_maps: degree must be >= 1");
  }
  if (u < 0.0 || u > 1.0) {
    throw std::invalid_argument("decasteljau_split_maps: parameter outside [0, 1]");
  }
  // Run the recurrence on the rows of the identity; row i of `levels[k]`
  // holds the map producing the k-th level De Casteljau point b_i^(k).
  std::vector<Eigen::MatrixXd> levels(n + 1);
  levels[0] = Eigen::MatrixXd::Identity(n + 1, n + 1);
  for (int k = 1; k <= n; ++k) {
    const int count = n + 1 - k;
    levels[k].resize(count, n + 1);
    for (int i = 0; i < count; ++i) {
      levels[k].row(i) = (1.0 - u) * levels[k - 1].row(i) + u * levels[k - 1].row(i + 1);
    }
  }
  Eigen::MatrixXd left(n + 1, n + 1);
  Eigen::MatrixXd right(n + 1, n + 1);
  for (int i = 0; i <= n; ++i) {
    left.row(i) = levels[i].row(0);
    right.row(i) = levels[n - i].row(i);
  }
  return {LinearMap(left), LinearMap(right)};
}

std::vector<LinearMap> traversal_split_maps(int n, const Eigen::VectorXd &proportions) {
  const int segments = static_cast<int>(proportions.size());
  if (segments < 1) {
    throw std::invalid_argument("traversal_split_maps: empty proportion vector");
  }
  for (int j = 0; j < segments; ++j) {
    if (!(proportions(j) > kMinProportion)) {
      throw std::invalid_argument("traversal_split_maps: proportion " + std::to_string(j) +
                                  " is non-positive or degenerate");
    }
  }
  if (std::abs(proportions.sum() - 1.0) > kProportionSumTol) {
    throw std::invalid_argument("traversal_split_maps: proportions must sum to one");
  }

  std::vector<LinearMap> sets;
  sets.reserve(segments);

  // Left-to-right: split the running remainder at the renormalized local
  // parameter, composing so every map-set acts on the original points.
  Eigen::MatrixXd remainder = Eigen::MatrixXd::Identity(n + 1, n + 1);
  double remaining = 1.0;
  for (int j = 0; j + 1 < segments; ++j) {
    if (remaining < kRemainderFloor) {
      throw std::invalid_argument("traversal_split_maps: remaining proportion underflow");
    }
    const double u = std::min(proportions(j) / remaining, 1.0);
    auto [left, right] = decasteljau_split_maps(n, u);
    sets.emplace_back(left.entries() * remainder);
    remainder = right.entries() * remainder;
    remaining -= proportions(j);
  }
  sets.emplace_back(remainder);
  return sets;
}

}  // namespace polytraj::curves
