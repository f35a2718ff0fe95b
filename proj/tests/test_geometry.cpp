#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "polytraj/errors.hpp"
#include "polytraj/geometry.hpp"
#include "polytraj/rng.hpp"

using namespace polytraj;
using namespace polytraj::geometry;

namespace {

// Brute-force facet enumeration: every point pair (2D) or triple (3D) whose
// supporting plane has all points on one side is a hull facet.
std::vector<std::pair<Eigen::VectorXd, double>> brute_force_facets(const Eigen::MatrixXd &pts) {
  const int n = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  std::vector<std::pair<Eigen::VectorXd, double>> facets;
  auto consider = [&](Eigen::VectorXd normal, double offset) {
    const double len = normal.norm();
    if (len < 1e-12) return;
    normal /= len;
    offset /= len;
    int above = 0, below = 0;
    for (int i = 0; i < n; ++i) {
      const double v = normal.dot(pts.row(i).transpose()) - offset;
      if (v > 1e-9) ++above;
      if (v < -1e-9) ++below;
    }
    if (above > 0 && below > 0) return;
    if (above > 0) {
      normal = -normal;
      offset = -offset;
    }
    for (const auto &[fn, fo] : facets) {
      if ((fn - normal).lpNorm<Eigen::Infinity>() < 1e-7 && std::abs(fo - offset) < 1e-7) return;
    }
    facets.emplace_back(normal, offset);
  };

  if (d == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Eigen::Vector2d e = pts.row(j) - pts.row(i);
        Eigen::VectorXd normal(2);
        normal << e.y(), -e.x();
        consider(normal, normal.dot(pts.row(i).transpose()));
      }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) {
          Eigen::Vector3d a = pts.row(i), b = pts.row(j), c = pts.row(k);
          Eigen::Vector3d nrm = (b - a).cross(c - a);
          Eigen::VectorXd normal = nrm;
          consider(normal, normal.dot(a));
        }
  }
  return facets;
}

Eigen::MatrixXd unit_square_corners() {
  Eigen::MatrixXd pts(5, 2);
  pts << 0, 0, 1, 0, 1, 1, 0, 1, 0.5, 0.5;
  return pts;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("square hull has four facets and contains its interior point") {
  Polytope p = convex_hull(unit_square_corners());
  CHECK(p.num_facets() == 4);
  Eigen::Vector2d inside(0.5, 0.5);
  CHECK(contains(p, inside, 0.0));
  // Strict interior: every facet slack is positive.
  CHECK(((p.offsets() - p.normals() * inside).array() > 0.0).all());
}

TEST_CASE("tetrahedron hull has four facets") {
  Eigen::MatrixXd pts(4, 3);
  pts << 0, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 1;
  Polytope p = convex_hull(pts);
  CHECK(p.num_facets() == 4);
  Eigen::Vector3d inside(0.2, 0.2, 0.2);
  CHECK(contains(p, inside, 0.0));
  CHECK_FALSE(contains(p, Eigen::Vector3d(0.5, 0.5, 0.5), 0.0));
}

TEST_CASE("random hulls match brute-force facet enumeration") {
  RandomEngine rng(11);
  for (int d : {2, 3}) {
    for (int rep = 0; rep < 10; ++rep) {
      Eigen::MatrixXd pts(10, d);
      for (int i = 0; i < 10; ++i)
        for (int k = 0; k < d; ++k) pts(i, k) = rng.uniform01();
      Polytope p = convex_hull(pts);

      for (int i = 0; i < pts.rows(); ++i) {
        CHECK(contains(p, pts.row(i).transpose(), 1e-9));
      }
      // Hull vertices touch at least dim facets with equality.
      REQUIRE(p.has_vertices());
      for (int i = 0; i < p.vertices().rows(); ++i) {
        const Eigen::VectorXd v = p.vertices().row(i).transpose();
        const Eigen::VectorXd slack = p.offsets() - p.normals() * v;
        int tight = 0;
        for (int r = 0; r < slack.size(); ++r) {
          if (std::abs(slack(r)) <= 1e-8) ++tight;
        }
        CHECK(tight >= d);
      }

      const auto expected = brute_force_facets(pts);
      REQUIRE(static_cast<int>(expected.size()) == p.num_facets());
      for (const auto &[nrm, off] : expected) {
        bool found = false;
        for (int r = 0; r < p.num_facets(); ++r) {
          if ((p.normals().row(r).transpose() - nrm).lpNorm<Eigen::Infinity>() < 1e-7 &&
              std::abs(p.offsets()(r) - off) < 1e-7) {
            found = true;
            break;
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("degenerate hull input is rejected") {
  Eigen::MatrixXd collinear(4, 2);
  collinear << 0, 0, 1, 1, 2, 2, 3, 3;
  CHECK_THROWS_AS(convex_hull(collinear), DegeneracyError);

  Eigen::MatrixXd coplanar(5, 3);
  coplanar << 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 1, 0, 0.3, 0.4, 0;
  CHECK_THROWS_AS(convex_hull(coplanar), DegeneracyError);

  Eigen::MatrixXd too_few(2, 2);
  too_few << 0, 0, 1, 1;
  CHECK_THROWS_AS(convex_hull(too_few), DegeneracyError);
}

TEST_CASE("contains honors the tolerance") {
  Polytope box = convex_hull(unit_square_corners());
  CHECK(contains(box, Eigen::Vector2d(0.5, 0.5), 0.0));
  CHECK_FALSE(contains(box, Eigen::Vector2d(1.1, 0.5), 0.0));
  CHECK(contains(box, Eigen::Vector2d(1.05, 0.5), 0.1));
  Eigen::VectorXd wrong(3);
  wrong.setZero();
  CHECK_THROWS_AS(contains(box, wrong, 0.0), std::invalid_argument);
}

TEST_CASE("translate shifts offsets only") {
  Polytope box = convex_hull(unit_square_corners());
  Polytope moved = translate(box, Eigen::Vector2d(1.0, 0.0));
  CHECK(contains(moved, Eigen::Vector2d(1.5, 0.5), 0.0));
  CHECK_FALSE(contains(moved, Eigen::Vector2d(0.5, 0.5), 0.0));
  CHECK((moved.normals() - box.normals()).lpNorm<Eigen::Infinity>() == 0.0);

  Polytope same = translate(box, Eigen::Vector2d(0.0, 0.0));
  CHECK((same.offsets() - box.offsets()).lpNorm<Eigen::Infinity>() == 0.0);

  Polytope back = translate(moved, Eigen::Vector2d(-1.0, 0.0));
  CHECK((back.offsets() - box.offsets()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("sample_interior is contained and roughly uniform") {
  Polytope box = convex_hull(unit_square_corners());
  RandomEngine rng(5);
  Eigen::Vector2d mean(0.0, 0.0);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::VectorXd y = sample_interior(box, rng);
    CHECK(contains(box, y, 0.0));
    mean += y;
  }
  mean /= 1000.0;
  CHECK((mean - Eigen::Vector2d(0.5, 0.5)).lpNorm<Eigen::Infinity>() <= 0.1);

  // Points outside the vertex bounding box are never contained.
  for (int i = 0; i < 200; ++i) {
    Eigen::Vector2d p(rng.uniform(1.5, 5.0), rng.uniform(-4.0, 4.0));
    if (rng.bernoulli(0.5)) p = -p;
    CHECK_FALSE(contains(box, p, 0.0));
  }
}

TEST_CASE("sample_interior fails cleanly on empty interiors") {
  // Square facets plus a pinching pair x >= 0.5, x <= 0.5 leave a segment.
  Polytope box = convex_hull(unit_square_corners());
  Eigen::MatrixXd H(box.num_facets() + 2, 2);
  Eigen::VectorXd h(box.num_facets() + 2);
  H.topRows(box.num_facets()) = box.normals();
  h.head(box.num_facets()) = box.offsets();
  H.row(box.num_facets()) << 1.0, 0.0;
  h(box.num_facets()) = 0.5;
  H.row(box.num_facets() + 1) << -1.0, 0.0;
  h(box.num_facets() + 1) = -0.5;
  Polytope pinched(H, h, box.vertices());

  RandomEngine rng(9);
  CHECK_THROWS_AS(sample_interior(pinched, rng), SamplingError);
}

TEST_CASE("hull of hull vertices describes the same set") {
  RandomEngine rng(31);
  for (int d : {2, 3}) {
    Eigen::MatrixXd pts(12, d);
    for (int i = 0; i < 12; ++i)
      for (int k = 0; k < d; ++k) pts(i, k) = rng.uniform(-1.0, 2.0);
    Polytope p = convex_hull(pts);
    REQUIRE(p.has_vertices());
    Polytope q = convex_hull(p.vertices());

    for (int rep = 0; rep < 200; ++rep) {
      const Eigen::VectorXd y = sample_interior(p, rng);
      CHECK(contains(q, y, 1e-8));
      const Eigen::VectorXd w = sample_interior(q, rng);
      CHECK(contains(p, w, 1e-8));
    }
  }
}

}  // TEST_SUITE
