#include "polytraj/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "polytraj/errors.hpp"

namespace polytraj::geometry {

namespace {

constexpr double kCoplanarTol = 1e-9;
constexpr int kMaxRejections = 10000;

struct Facet {
  Eigen::VectorXd normal;
  double offset;
};

// Deduplicate facets whose planes coincide within the coplanarity tolerance.
std::vector<Facet> merge_facets(std::vector<Facet> facets) {
  std::vector<Facet> merged;
  for (const Facet &f : facets) {
    bool duplicate = false;
    for (const Facet &g : merged) {
      if ((f.normal - g.normal).lpNorm<Eigen::Infinity>() < kCoplanarTol &&
          std::abs(f.offset - g.offset) < kCoplanarTol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) merged.push_back(f);
  }
  return merged;
}

// ---------------------------------------------------------------------------
// 2D quickhull
// ---------------------------------------------------------------------------

double cross2(const Eigen::Vector2d &o, const Eigen::Vector2d &a, const Eigen::Vector2d &b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

void quickhull2_side(const std::vector<Eigen::Vector2d> &pts, const Eigen::Vector2d &a,
                     const Eigen::Vector2d &b, const std::vector<int> &candidates, double eps,
                     std::vector<Eigen::Vector2d> &out) {
  int best = -1;
  double best_dist = eps;
  for (int idx : candidates) {
    const double d = cross2(a, b, pts[idx]);
    if (d > best_dist) {
      best_dist = d;
      best = idx;
    }
  }
  if (best < 0) return;
  const Eigen::Vector2d c = pts[best];
  std::vector<int> left_ac, left_cb;
  for (int idx : candidates) {
    if (cross2(a, c, pts[idx]) > eps) left_ac.push_back(idx);
    if (cross2(c, b, pts[idx]) > eps) left_cb.push_back(idx);
  }
  quickhull2_side(pts, a, c, left_ac, eps, out);
  out.push_back(c);
  quickhull2_side(pts, c, b, left_cb, eps, out);
}

// Returns hull vertices in counter-clockwise order.
std::vector<Eigen::Vector2d> quickhull2(const Eigen::MatrixXd &points) {
  const int n = static_cast<int>(points.rows());
  std::vector<Eigen::Vector2d> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = points.row(i).transpose();

  double scale = 0.0;
  for (const auto &p : pts) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  const double eps = 1e-12 * std::max(1.0, scale);

  int lo = 0, hi = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i].x() < pts[lo].x() || (pts[i].x() == pts[lo].x() && pts[i].y() < pts[lo].y())) lo = i;
    if (pts[i].x() > pts[hi].x() || (pts[i].x() == pts[hi].x() && pts[i].y() > pts[hi].y())) hi = i;
  }
  if (lo == hi) throw DegeneracyError("convex_hull: all points coincide");

  const Eigen::Vector2d a = pts[lo], b = pts[hi];
  std::vector<int> upper, lower;
  bool spans_plane = false;
  for (int i = 0; i < n; ++i) {
    const double d = cross2(a, b, pts[i]);
    if (d > eps) {
      upper.push_back(i);
      spans_plane = true;
    } else if (d < -eps) {
      lower.push_back(i);
      spans_plane = true;
    }
  }
  if (!spans_plane) throw DegeneracyError("convex_hull: points are collinear");

  std::vector<Eigen::Vector2d> hull;
  hull.push_back(a);
  quickhull2_side(pts, a, b, upper, eps, hull);
  hull.push_back(b);
  quickhull2_side(pts, b, a, lower, eps, hull);
  // The recursion emits the boundary clockwise; flip to the CCW contract.
  std::reverse(hull.begin(), hull.end());
  return hull;
}

// ---------------------------------------------------------------------------
// 3D quickhull
// ---------------------------------------------------------------------------

struct Triangle {
  std::array<int, 3> v;
  Eigen::Vector3d normal;  // unit, outward
  double offset;
  std::vector<int> outside;
  bool alive = true;
};

Triangle make_triangle(const std::vector<Eigen::Vector3d> &pts, int a, int b, int c,
                       const Eigen::Vector3d &interior) {
  Triangle t;
  t.v = {a, b, c};
  Eigen::Vector3d nrm = (pts[b] - pts[a]).cross(pts[c] - pts[a]);
  const double len = nrm.norm();
  if (len <= 0.0) throw DegeneracyError("convex_hull: degenerate facet");
  nrm /= len;
  double off = nrm.dot(pts[a]);
  if (nrm.dot(interior) > off) {
    nrm = -nrm;
    off = -off;
    std::swap(t.v[1], t.v[2]);
  }
  t.normal = nrm;
  t.offset = off;
  return t;
}

std::vector<Triangle> quickhull3(const Eigen::MatrixXd &points) {
  const int n = static_cast<int>(points.rows());
  std::vector<Eigen::Vector3d> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = points.row(i).transpose();

  double scale = 0.0;
  for (const auto &p : pts) scale = std::max(scale, p.lpNorm<Eigen::Infinity>());
  const double eps = 1e-10 * std::max(1.0, scale);

  // Initial simplex: extreme pair, then farthest from the line, then from the plane.
  int i0 = 0, i1 = 0;
  for (int i = 1; i < n; ++i) {
    if (pts[i].x() < pts[i0].x()) i0 = i;
    if (pts[i].x() > pts[i1].x()) i1 = i;
  }
  if ((pts[i1] - pts[i0]).norm() < eps) {
    // Degenerate along x; fall back to the globally farthest pair.
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if ((pts[j] - pts[i]).norm() > (pts[i1] - pts[i0]).norm()) {
          i0 = i;
          i1 = j;
        }
    if ((pts[i1] - pts[i0]).norm() < eps) throw DegeneracyError("convex_hull: all points coincide");
  }
  const Eigen::Vector3d dir = (pts[i1] - pts[i0]).normalized();
  int i2 = -1;
  double best = eps;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d rel = pts[i] - pts[i0];
    const double d = (rel - rel.dot(dir) * dir).norm();
    if (d > best) {
      best = d;
      i2 = i;
    }
  }
  if (i2 < 0) throw DegeneracyError("convex_hull: points are collinear");
  Eigen::Vector3d plane_n = (pts[i1] - pts[i0]).cross(pts[i2] - pts[i0]).normalized();
  int i3 = -1;
  best = eps;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(plane_n.dot(pts[i] - pts[i0]));
    if (d > best) {
      best = d;
      i3 = i;
    }
  }
  if (i3 < 0) throw DegeneracyError("convex_hull: points are coplanar");

  const Eigen::Vector3d interior = 0.25 * (pts[i0] + pts[i1] + pts[i2] + pts[i3]);
  std::vector<Triangle> faces;
  faces.push_back(make_triangle(pts, i0, i1, i2, interior));
  faces.push_back(make_triangle(pts, i0, i1, i3, interior));
  faces.push_back(make_triangle(pts, i0, i2, i3, interior));
  faces.push_back(make_triangle(pts, i1, i2, i3, interior));

  auto assign_outside = [&](Triangle &t, const std::vector<int> &candidates) {
    for (int idx : candidates) {
      if (t.normal.dot(pts[idx]) - t.offset > eps) t.outside.push_back(idx);
    }
  };
  {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    for (Triangle &t : faces) assign_outside(t, all);
  }

  while (true) {
    int fi = -1;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
      if (faces[i].alive && !faces[i].outside.empty()) {
        fi = i;
        break;
      }
    }
    if (fi < 0) break;

    // Farthest outside point of that face.
    int apex = faces[fi].outside[0];
    double apex_d = faces[fi].normal.dot(pts[apex]) - faces[fi].offset;
    for (int idx : faces[fi].outside) {
      const double d = faces[fi].normal.dot(pts[idx]) - faces[fi].offset;
      if (d > apex_d) {
        apex_d = d;
        apex = idx;
      }
    }

    // Visible faces and their horizon.
    std::vector<int> visible;
    for (int i = 0; i < static_cast<int>(faces.size()); ++i) {
      if (faces[i].alive && faces[i].normal.dot(pts[apex]) - faces[i].offset > eps) {
        visible.push_back(i);
      }
    }
    std::map<std::pair<int, int>, int> edge_count;
    for (int i : visible) {
      for (int e = 0; e < 3; ++e) {
        int a = faces[i].v[e], b = faces[i].v[(e + 1) % 3];
        if (a > b) std::swap(a, b);
        edge_count[{a, b}]++;
      }
    }
    std::vector<int> orphans;
    for (int i : visible) {
      faces[i].alive = false;
      for (int idx : faces[i].outside) {
        if (idx != apex) orphans.push_back(idx);
      }
      faces[i].outside.clear();
    }
    for (const auto &[edge, count] : edge_count) {
      if (count != 1) continue;
      Triangle t = make_triangle(pts, edge.first, edge.second, apex, interior);
      assign_outside(t, orphans);
      faces.push_back(t);
    }
  }

  std::vector<Triangle> alive;
  for (const Triangle &t : faces) {
    if (t.alive) alive.push_back(t);
  }
  return alive;
}

Eigen::MatrixXd rows_from(const std::vector<Eigen::VectorXd> &rows) {
  Eigen::MatrixXd m(static_cast<int>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (int i = 0; i < m.rows(); ++i) m.row(i) = rows[static_cast<size_t>(i)].transpose();
  return m;
}

}  // namespace

Polytope::Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets)
    : Polytope(std::move(normals), std::move(offsets), Eigen::MatrixXd()) {}

Polytope::Polytope(Eigen::MatrixXd normals, Eigen::VectorXd offsets, Eigen::MatrixXd vertices)
    : normals_(std::move(normals)), offsets_(std::move(offsets)), vertices_(std::move(vertices)) {
  if (normals_.rows() != offsets_.size()) {
    throw std::invalid_argument("Polytope: facet row count mismatch");
  }
  if (normals_.rows() == 0 || normals_.cols() == 0) {
    throw std::invalid_argument("Polytope: empty facet description");
  }
  if (!normals_.allFinite() || !offsets_.allFinite()) {
    throw std::invalid_argument("Polytope: non-finite facet data");
  }
  for (int i = 0; i < normals_.rows(); ++i) {
    const double len = normals_.row(i).norm();
    if (len < 1e-14) {
      throw std::invalid_argument("Polytope: zero facet normal");
    }
    normals_.row(i) /= len;
    offsets_(i) /= len;
  }
  if (vertices_.rows() > 0 && vertices_.cols() != normals_.cols()) {
    throw std::invalid_argument("Polytope: vertex dimension mismatch");
  }
}

Polytope convex_hull(const Eigen::MatrixXd &points) {
  const int d = static_cast<int>(points.cols());
  if (d != 2 && d != 3) {
    throw std::invalid_argument("convex_hull: only 2D and 3D are supported");
  }
  if (points.rows() < d + 1) {
    throw DegeneracyError("convex_hull: need at least dim+1 points");
  }
  if (!points.allFinite()) {
    throw std::invalid_argument("convex_hull: non-finite input point");
  }

  std::vector<Facet> facets;
  std::vector<Eigen::VectorXd> vertex_rows;

  if (d == 2) {
    const auto hull = quickhull2(points);
    const int k = static_cast<int>(hull.size());
    for (int i = 0; i < k; ++i) {
      const Eigen::Vector2d a = hull[i];
      const Eigen::Vector2d b = hull[(i + 1) % k];
      Eigen::Vector2d edge = b - a;
      const double len = edge.norm();
      if (len < 1e-14) continue;
      // CCW polygon: outward normal is the edge direction rotated -90 deg.
      Eigen::VectorXd nrm(2);
      nrm << edge.y() / len, -edge.x() / len;
      facets.push_back({nrm, nrm.dot(a)});
      vertex_rows.emplace_back(a);
    }
  } else {
    const auto triangles = quickhull3(points);
    std::vector<int> vertex_ids;
    for (const Triangle &t : triangles) {
      Eigen::VectorXd nrm = t.normal;
      facets.push_back({nrm, t.offset});
      for (int vid : t.v) vertex_ids.push_back(vid);
    }
    std::sort(vertex_ids.begin(), vertex_ids.end());
    vertex_ids.erase(std::unique(vertex_ids.begin(), vertex_ids.end()), vertex_ids.end());
    for (int vid : vertex_ids) vertex_rows.emplace_back(points.row(vid).transpose());
  }

  facets = merge_facets(std::move(facets));
  Eigen::MatrixXd H(static_cast<int>(facets.size()), d);
  Eigen::VectorXd h(static_cast<int>(facets.size()));
  for (int i = 0; i < H.rows(); ++i) {
    H.row(i) = facets[static_cast<size_t>(i)].normal.transpose();
    h(i) = facets[static_cast<size_t>(i)].offset;
  }

  Polytope poly(H, h, rows_from(vertex_rows));
  for (int i = 0; i < points.rows(); ++i) {
    if (!contains(poly, points.row(i).transpose(), 1e-9)) {
      throw DegeneracyError("convex_hull: input point escapes the computed hull");
    }
  }
  return poly;
}

bool contains(const Polytope &p, const Eigen::VectorXd &y, double tol) {
  if (y.size() != p.dim()) {
    throw std::invalid_argument("contains: dimension mismatch");
  }
  return ((p.normals() * y - p.offsets()).array() <= tol).all();
}

Polytope translate(const Polytope &p, const Eigen::VectorXd &v) {
  if (v.size() != p.dim()) {
    throw std::invalid_argument("translate: dimension mismatch");
  }
  Eigen::MatrixXd vertices = p.vertices();
  for (int i = 0; i < vertices.rows(); ++i) vertices.row(i) += v.transpose();
  return Polytope(p.normals(), p.offsets() + p.normals() * v, vertices);
}

Eigen::VectorXd sample_interior(const Polytope &p, RandomEngine &rng) {
  if (!p.has_vertices()) {
    throw std::invalid_argument("sample_interior: polytope carries no vertex bounding box");
  }
  const Eigen::VectorXd lo = p.vertices().colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = p.vertices().colwise().maxCoeff().transpose();
  Eigen::VectorXd y(p.dim());
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    for (int k = 0; k < p.dim(); ++k) y(k) = rng.uniform(lo(k), hi(k));
    if (contains(p, y, 0.0)) return y;
  }
  throw SamplingError("sample_interior: rejection budget exhausted (near-empty interior)");
}

}  // namespace polytraj::geometry
