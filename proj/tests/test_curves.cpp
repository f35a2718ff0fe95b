#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "polytraj/curves.hpp"

#include "fd_oracle.hpp"
#include "polytraj/rng.hpp"

using namespace polytraj;
using namespace polytraj::curves;

namespace {

BezierCurve random_curve(RandomEngine &rng, int max_degree, int max_dim) {
  const int n = 1 + rng.uniform_int(max_degree);
  const int d = 1 + rng.uniform_int(max_dim);
  Eigen::MatrixXd pts(n + 1, d);
  for (int i = 0; i <= n; ++i)
    for (int k = 0; k < d; ++k) pts(i, k) = rng.uniform(-5.0, 5.0);
  return BezierCurve(pts, rng.uniform(0.5, 10.0));
}

}  // namespace

TEST_SUITE("curves") {

TEST_CASE("bernstein basis values") {
  CHECK(bernstein(2, 1, 0.5) == doctest::Approx(0.5));
  CHECK(bernstein(5, 0, 0.0) == doctest::Approx(1.0));
  CHECK(bernstein(5, 3, 0.0) == doctest::Approx(0.0));
  CHECK(bernstein(5, 5, 1.0) == doctest::Approx(1.0));

  for (int n : {1, 3, 7, 12}) {
    for (double u : {0.0, 0.3, 0.7, 1.0}) {
      double sum = 0.0;
      for (int i = 0; i <= n; ++i) sum += bernstein(n, i, u);
      CHECK(std::abs(sum - 1.0) <= 1e-12);
    }
  }

  CHECK_THROWS_AS(bernstein(3, 4, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bernstein(3, -1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bernstein(3, 1, 1.5), std::invalid_argument);
}

TEST_CASE("evaluate interpolates endpoints and known values") {
  Eigen::MatrixXd line(2, 1);
  line << 0.0, 1.0;
  BezierCurve linear(line, 2.0);
  CHECK(evaluate(linear, 1.0)(0) == doctest::Approx(0.5));
  CHECK(evaluate(linear, 0.0)(0) == doctest::Approx(0.0));
  CHECK(evaluate(linear, 2.0)(0) == doctest::Approx(1.0));

  Eigen::MatrixXd quad(3, 1);
  quad << 0.0, 0.0, 1.0;
  BezierCurve parab(quad, 1.0);
  CHECK(evaluate(parab, 0.5)(0) == doctest::Approx(0.25));

  CHECK_THROWS_AS(evaluate(parab, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate(parab, 1.1), std::invalid_argument);

  RandomEngine rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    BezierCurve c = random_curve(rng, 10, 3);
    CHECK((evaluate(c, 0.0) - c.control_points().row(0).transpose()).norm() <= 1e-12);
    CHECK((evaluate(c, c.duration()) -
           c.control_points().row(c.degree()).transpose())
              .norm() <= 1e-12);
  }
}

TEST_CASE("derivative maps match hodograph formulas") {
  const LinearMap d1 = derivative_maps(1, 1);
  REQUIRE(d1.rows() == 1);
  CHECK(d1.entries()(0, 0) == doctest::Approx(-1.0));
  CHECK(d1.entries()(0, 1) == doctest::Approx(1.0));

  const LinearMap d2 = derivative_maps(2, 1);
  REQUIRE(d2.rows() == 2);
  Eigen::MatrixXd pts(3, 1);
  pts << 1.0, 4.0, 9.0;
  Eigen::MatrixXd vel = d2.apply(pts);
  CHECK(vel(0, 0) == doctest::Approx(2.0 * (4.0 - 1.0)));
  CHECK(vel(1, 0) == doctest::Approx(2.0 * (9.0 - 4.0)));

  const LinearMap dd = derivative_maps(2, 2);
  REQUIRE(dd.rows() == 1);
  CHECK(dd.apply(pts)(0, 0) == doctest::Approx(2.0 * (9.0 - 2.0 * 4.0 + 1.0)));

  CHECK_THROWS_AS(derivative_maps(1, 2), std::invalid_argument);
}

TEST_CASE("second derivative map equals first applied twice") {
  for (int n : {2, 5, 11}) {
    const Eigen::MatrixXd once = derivative_maps(n, 1).entries();
    const Eigen::MatrixXd again = derivative_maps(n - 1, 1).entries();
    const Eigen::MatrixXd composed = again * once;
    CHECK((composed - derivative_maps(n, 2).entries()).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("derivative curves agree with central finite differences") {
  RandomEngine rng(21);
  for (int rep = 0; rep < 30; ++rep) {
    BezierCurve c = random_curve(rng, 12, 3);
    if (c.degree() < 2) continue;
    const double T = c.duration();
    const double step = 1e-5 * T;
    for (int order : {1, 2}) {
      BezierCurve dc = derivative_curve(c, order);
      const double dscale = std::max(1.0, dc.control_points().cwiseAbs().maxCoeff());
      for (double f : {0.25, 0.5, 0.75}) {
        const double t = f * T;
        const Eigen::VectorXd fd =
            fd_oracle::central_difference(c.control_points(), T, t, order, step);
        const Eigen::VectorXd an = evaluate(dc, t);
        CHECK((fd - an).lpNorm<Eigen::Infinity>() / dscale <= 1e-6);
      }
    }
  }
}

TEST_CASE("de casteljau split maps: hand cases") {
  auto [left1, right1] = decasteljau_split_maps(1, 0.5);
  Eigen::MatrixXd pts(2, 1);
  pts << 0.0, 1.0;
  Eigen::MatrixXd lp = left1.apply(pts);
  Eigen::MatrixXd rp = right1.apply(pts);
  CHECK(lp(0, 0) == doctest::Approx(0.0));
  CHECK(lp(1, 0) == doctest::Approx(0.5));
  CHECK(rp(0, 0) == doctest::Approx(0.5));
  CHECK(rp(1, 0) == doctest::Approx(1.0));

  auto [left2, right2] = decasteljau_split_maps(2, 0.5);
  Eigen::MatrixXd q(3, 1);
  q << 1.0, 3.0, 7.0;
  Eigen::MatrixXd lq = left2.apply(q);
  CHECK(lq(0, 0) == doctest::Approx(1.0));
  CHECK(lq(1, 0) == doctest::Approx(2.0));                          // (x0+x1)/2
  CHECK(lq(2, 0) == doctest::Approx((1.0 + 2 * 3.0 + 7.0) / 4.0));  // (x0+2x1+x2)/4

  auto [left0, right0] = decasteljau_split_maps(4, 0.0);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(5, 5);
  CHECK((right0.entries() - id).lpNorm<Eigen::Infinity>() <= 1e-15);
  for (int i = 0; i < 5; ++i) {
    CHECK((left0.entries().row(i) - id.row(0)).lpNorm<Eigen::Infinity>() <= 1e-15);
  }
}

TEST_CASE("split exactness over random curves") {
  RandomEngine rng(99);
  for (int rep = 0; rep < 60; ++rep) {
    BezierCurve c = random_curve(rng, 20, 3);
    const double u = rng.uniform(0.05, 0.95);
    auto [left, right] = decasteljau_split_maps(c.degree(), u);
    const double tc = u * c.duration();
    BezierCurve cl(left.apply(c.control_points()), std::max(tc, 1e-9));
    BezierCurve cr(right.apply(c.control_points()), std::max(c.duration() - tc, 1e-9));
    double scale = std::max(1.0, c.control_points().cwiseAbs().maxCoeff());
    for (int k = 0; k <= 100; ++k) {
      const double f = k / 100.0;
      const Eigen::VectorXd pl = evaluate(cl, std::min(f * cl.duration(), cl.duration()));
      const Eigen::VectorXd ol = evaluate(c, f * tc);
      CHECK((pl - ol).lpNorm<Eigen::Infinity>() / scale <= 1e-9);
      const Eigen::VectorXd pr = evaluate(cr, std::min(f * cr.duration(), cr.duration()));
      const Eigen::VectorXd orr = evaluate(c, std::min(tc + f * (c.duration() - tc), c.duration()));
      CHECK((pr - orr).lpNorm<Eigen::Infinity>() / scale <= 1e-9);
    }
  }
}

TEST_CASE("traversal maps: identity, two-way equivalence, validation") {
  Eigen::VectorXd one(1);
  one << 1.0;
  auto sets = traversal_split_maps(3, one);
  REQUIRE(sets.size() == 1);
  CHECK((sets[0].entries() - Eigen::MatrixXd::Identity(4, 4)).lpNorm<Eigen::Infinity>() <= 1e-15);

  Eigen::VectorXd halves(2);
  halves << 0.5, 0.5;
  auto two = traversal_split_maps(1, halves);
  auto [l, r] = decasteljau_split_maps(1, 0.5);
  CHECK((two[0].entries() - l.entries()).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((two[1].entries() - r.entries()).lpNorm<Eigen::Infinity>() <= 1e-12);

  // s = (a, 1-a) equals a plain split at u = a, entrywise.
  for (double a : {0.2, 0.5, 0.9}) {
    Eigen::VectorXd s(2);
    s << a, 1.0 - a;
    auto sets2 = traversal_split_maps(6, s);
    auto [la, ra] = decasteljau_split_maps(6, a);
    CHECK((sets2[0].entries() - la.entries()).lpNorm<Eigen::Infinity>() <= 1e-12);
    CHECK((sets2[1].entries() - ra.entries()).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  Eigen::VectorXd bad(2);
  bad << 0.7, 0.7;
  CHECK_THROWS_AS(traversal_split_maps(3, bad), std::invalid_argument);
  Eigen::VectorXd zero(2);
  zero << 1.0, 0.0;
  CHECK_THROWS_AS(traversal_split_maps(3, zero), std::invalid_argument);
}

TEST_CASE("traversal decomposition reproduces the curve") {
  Eigen::VectorXd s(3);
  s << 0.2, 0.3, 0.5;
  RandomEngine rng(3);
  Eigen::MatrixXd pts(6, 2);
  for (int i = 0; i < 6; ++i)
    for (int k = 0; k < 2; ++k) pts(i, k) = rng.uniform(-2.0, 2.0);
  BezierCurve c(pts, 4.0);
  auto sets = traversal_split_maps(5, s);
  REQUIRE(sets.size() == 3);

  double cum = 0.0;
  for (int j = 0; j < 3; ++j) {
    const double t0 = cum * c.duration();
    const double seg = s(j) * c.duration();
    BezierCurve sub(sets[static_cast<size_t>(j)].apply(c.control_points()), seg);
    for (int k = 0; k <= 100; ++k) {
      const double f = k / 100.0;
      const Eigen::VectorXd got = evaluate(sub, f * seg);
      const Eigen::VectorXd want = evaluate(c, std::min(t0 + f * seg, c.duration()));
      CHECK((got - want).lpNorm<Eigen::Infinity>() <= 1e-9);
    }
    cum += s(j);
  }
}

}  // TEST_SUITE
