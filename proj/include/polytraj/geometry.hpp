#pragma once

#include <Eigen/Dense>

#include "polytraj/rng.hpp"

namespace polytraj::geometry {

/// Bounded convex polytope in half-space form H y <= h. Facet rows are
/// normalized to unit length at construction so containment tolerances are
/// geometric distances. Instances built by convex_hull() additionally carry
/// their vertex set, which sample_interior() uses as a rejection box.
class Polytope {
 public:
  Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets);
  Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets, Eigen::MatrixXd vertices);

  int dim() const { return static_cast<int>(normals_.cols()); }
  int num_facets() const { return static_cast<int>(normals_.rows()); }
  const Eigen::MatrixXd &normals() const { return normals_; }
  const Eigen::VectorXd &offsets() const { return offsets_; }

  bool has_vertices() const { return vertices_.rows() > 0; }
  /// Hull vertices, one per row; empty when unknown (e.g. parsed from JSON).
  const Eigen::MatrixXd &vertices() const { return vertices_; }

 private:
  Eigen::MatrixXd normals_;
  Eigen::VectorXd offsets_;
  Eigen::MatrixXd vertices_;
};

/// Half-space representation of conv(points) via quickhull; points are given
/// one per row and must span the full dimension (2 or 3). Coplanar facets are
/// merged at a 1e-9 signed-distance tolerance. Throws DegeneracyError on
/// affinely dependent input.
Polytope convex_hull(const Eigen::MatrixXd &points);

/// Componentwise test H y <= h + tol.
bool contains(const Polytope &p, const Eigen::VectorXd &y, double tol);

/// Shift the polytope by v: offsets become h + H v, normals unchanged.
Polytope translate(const Polytope &p, const Eigen::VectorXd &v);

/// Uniform interior point by rejection over the vertex bounding box. Throws
/// SamplingError after 10,000 consecutive rejections.
Eigen::VectorXd sample_interior(const Polytope &p, RandomEngine &rng);

}  // namespace polytraj::geometry
