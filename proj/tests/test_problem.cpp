#include "doctest.h"

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "polytraj/errors.hpp"
#include "polytraj/geometry.hpp"
#include "polytraj/problem.hpp"

using namespace polytraj;
using namespace polytraj::problem;

namespace {

GeneratorConfig small_config(std::uint64_t seed) {
  GeneratorConfig cfg;
  cfg.dim = 2;
  cfg.n_polytopes = 2;
  cfg.degree = 5;
  cfg.seed = seed;
  return cfg;
}

bool has_decel_axis(const PTProblem &p) {
  for (const auto &b : p.acceleration_bounds) {
    if ((b.offset.array() < 0.0).any()) return true;
  }
  return false;
}

bool identical(const PTProblem &a, const PTProblem &b) {
  if (a.dim != b.dim || a.degree != b.degree) return false;
  if (a.polytopes.size() != b.polytopes.size()) return false;
  for (size_t i = 0; i < a.polytopes.size(); ++i) {
    if (a.polytopes[i].normals() != b.polytopes[i].normals()) return false;
    if (a.polytopes[i].offsets() != b.polytopes[i].offsets()) return false;
  }
  if (a.start_position != b.start_position || a.end_position != b.end_position) return false;
  if (a.start_velocity.has_value() != b.start_velocity.has_value()) return false;
  if (a.start_velocity && *a.start_velocity != *b.start_velocity) return false;
  if (a.end_velocity.has_value() != b.end_velocity.has_value()) return false;
  if (a.end_velocity && *a.end_velocity != *b.end_velocity) return false;
  if (a.velocity_bounds.size() != b.velocity_bounds.size()) return false;
  for (size_t i = 0; i < a.velocity_bounds.size(); ++i) {
    if (a.velocity_bounds[i].matrix != b.velocity_bounds[i].matrix) return false;
    if (a.velocity_bounds[i].offset != b.velocity_bounds[i].offset) return false;
  }
  for (size_t i = 0; i < a.acceleration_bounds.size(); ++i) {
    if (a.acceleration_bounds[i].matrix != b.acceleration_bounds[i].matrix) return false;
    if (a.acceleration_bounds[i].offset != b.acceleration_bounds[i].offset) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("problem") {

TEST_CASE("proportions invariants") {
  Eigen::VectorXd good(2);
  good << 0.25, 0.75;
  CHECK_NOTHROW(Proportions{good});

  Eigen::VectorXd negative(2);
  negative << -0.25, 1.25;
  CHECK_THROWS_AS(Proportions{negative}, std::invalid_argument);

  Eigen::VectorXd off_sum(2);
  off_sum << 0.25, 0.74;
  CHECK_THROWS_AS(Proportions{off_sum}, std::invalid_argument);
}

TEST_CASE("generation is deterministic per seed") {
  const PTProblem a = generate(small_config(12345));
  const PTProblem b = generate(small_config(12345));
  CHECK(identical(a, b));

  const PTProblem c = generate(small_config(54321));
  CHECK_FALSE(identical(a, c));
}

TEST_CASE("generated problems are structurally valid") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
    for (int dim : {2, 3}) {
      GeneratorConfig cfg = small_config(seed);
      cfg.dim = dim;
      cfg.n_polytopes = 3;
      const PTProblem p = generate(cfg);
      CHECK(p.num_polytopes() == 3);
      CHECK(p.dim == dim);
      CHECK(geometry::contains(p.polytopes.front(), p.start_position, 1e-9));
      CHECK(geometry::contains(p.polytopes.back(), p.end_position, 1e-9));
      CHECK(consecutive_intersections_nonempty(p));
      // Rest-to-rest defaults.
      REQUIRE(p.start_velocity.has_value());
      CHECK(p.start_velocity->cwiseAbs().maxCoeff() == 0.0);
      REQUIRE(p.end_velocity.has_value());
      CHECK(p.end_velocity->cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("deceleration bias matches the configured probability") {
  int hits = 0;
  const int trials = 1000;
  for (int i = 0; i < trials; ++i) {
    GeneratorConfig cfg = small_config(700000 + static_cast<std::uint64_t>(i));
    cfg.n_polytopes = 1;
    cfg.points_per_polytope = 6;
    if (has_decel_axis(generate(cfg))) ++hits;
  }
  const double fraction = static_cast<double>(hits) / trials;
  CHECK(fraction >= 0.35);
  CHECK(fraction <= 0.45);
}

TEST_CASE("random boundary velocities stay inside the velocity box") {
  GeneratorConfig cfg = small_config(99);
  cfg.boundary_velocity = BoundaryVelocityMode::Random;
  const PTProblem p = generate(cfg);
  REQUIRE(p.start_velocity.has_value());
  REQUIRE(p.end_velocity.has_value());
  const auto &box = p.velocity_bounds.front();
  CHECK(((box.matrix * *p.start_velocity - box.offset).array() <= 0.0).all());
  CHECK(((box.matrix * *p.end_velocity - box.offset).array() <= 0.0).all());

  cfg.boundary_velocity = BoundaryVelocityMode::Free;
  const PTProblem q = generate(cfg);
  CHECK_FALSE(q.start_velocity.has_value());
  CHECK_FALSE(q.end_velocity.has_value());
}

TEST_CASE("json round-trip is exact") {
  GeneratorConfig cfg = small_config(2024);
  cfg.n_polytopes = 3;
  cfg.boundary_velocity = BoundaryVelocityMode::Random;
  const PTProblem p = generate(cfg);
  const PTProblem q = from_json(to_json(p));
  CHECK(identical(p, q));
  // And the serialized text itself is reproducible.
  CHECK(to_json(p) == to_json(q));
}

TEST_CASE("parse errors name the offending field") {
  CHECK_THROWS_WITH_AS(from_json("{\"dim\": 2}"), doctest::Contains("degree"), ParseError);

  const PTProblem p = generate(small_config(7));
  std::string text = to_json(p);
  const auto pos = text.find("\"polytopes\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 11, "\"polygons\"");
  try {
    from_json(text);
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find("polytopes") != std::string::npos);
  }

  CHECK_THROWS_AS(from_json("not json at all"), ParseError);
}

TEST_CASE("non-normalized facet rows are renormalized on load") {
  const std::string doc = R"({
    "version": 1, "dim": 2, "degree": 3,
    "polytopes": [{"H": [2, 0, 0, 2, -2, 0, 0, -2], "h": [2, 2, 0, 0]}],
    "start": [0.25, 0.25], "end": [0.75, 0.75],
    "start_velocity": null, "end_velocity": null,
    "velocity_bounds": [], "acceleration_bounds": []
  })";
  const PTProblem p = from_json(doc);
  REQUIRE(p.num_polytopes() == 1);
  for (int i = 0; i < p.polytopes[0].normals().rows(); ++i) {
    CHECK(p.polytopes[0].normals().row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(p.polytopes[0].offsets()(0) == doctest::Approx(1.0));
  CHECK(geometry::contains(p.polytopes[0], Eigen::Vector2d(0.5, 0.5), 0.0));
}

TEST_CASE("generator rejects invalid configurations") {
  GeneratorConfig cfg = small_config(1);
  cfg.dim = 4;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.n_polytopes = 0;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.degree = 1;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
  cfg = small_config(1);
  cfg.points_per_polytope = 2;
  CHECK_THROWS_AS(generate(cfg), std::invalid_argument);
}

}  // TEST_SUITE
