#include "polytraj/problem.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "json.hpp"
#include "polytraj/errors.hpp"
#include "polytraj/rng.hpp"
#include "polytraj/socp.hpp"

namespace polytraj::problem {

namespace {

using geometry::Polytope;
using nlohmann::json;

constexpr int kHullRetries = 100;

void check_bound(const DerivativeBound &b, int dim, const char *family) {
  if (b.matrix.rows() != b.offset.size() || b.matrix.cols() != dim) {
    throw std::invalid_argument(std::string(family) + " bound has inconsistent dimensions");
  }
  if (!b.matrix.allFinite() || !b.offset.allFinite()) {
    throw std::invalid_argument(std::string(family) + " bound has non-finite entries");
  }
}

// Phase-1 LP: is { y | H1 y <= h1, H2 y <= h2 } nonempty? Minimizes a shared
// violation t over (y, t) with t >= 0 free to absorb both row sets.
bool intersection_nonempty(const Polytope &a, const Polytope &b) {
  const int d = a.dim();
  const int rows = a.num_facets() + b.num_facets();
  socp::Problem lp;
  lp.c = Eigen::VectorXd::Zero(d + 1);
  lp.c(d) = 1.0;
  lp.G.setZero(rows + 1, d + 1);
  lp.h.setZero(rows + 1);
  lp.G.block(0, 0, a.num_facets(), d) = a.normals();
  lp.G.block(0, d, a.num_facets(), 1).setConstant(-1.0);
  lp.h.head(a.num_facets()) = a.offsets();
  lp.G.block(a.num_facets(), 0, b.num_facets(), d) = b.normals();
  lp.G.block(a.num_facets(), d, b.num_facets(), 1).setConstant(-1.0);
  lp.h.segment(a.num_facets(), b.num_facets()) = b.offsets();
  lp.G(rows, d) = -1.0;  // t >= 0
  lp.lp_dim = rows + 1;

  const socp::Result res = socp::solve(lp);
  if (res.status != socp::Status::Optimal && res.status != socp::Status::OptimalInaccurate) {
    return false;
  }
  return res.primal_objective <= 1e-7;
}

json bound_to_json(const DerivativeBound &b) {
  json out;
  // Eigen stores column-major; emit row-major as documented.
  std::vector<double> rowmajor;
  rowmajor.reserve(static_cast<size_t>(b.matrix.size()));
  for (int i = 0; i < b.matrix.rows(); ++i)
    for (int j = 0; j < b.matrix.cols(); ++j) rowmajor.push_back(b.matrix(i, j));
  out["M"] = rowmajor;
  out["b"] = std::vector<double>(b.offset.data(), b.offset.data() + b.offset.size());
  out["relation"] = b.relation == Relation::Equality ? "equality" : "inequality";
  return out;
}

const json &require_field(const json &j, const char *name) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ParseError(std::string("missing field '") + name + "'");
  }
  return *it;
}

Eigen::VectorXd vector_from_json(const json &j, const char *name) {
  if (!j.is_array()) throw ParseError(std::string("field '") + name + "' must be an array");
  Eigen::VectorXd v(j.size());
  int i = 0;
  for (const auto &e : j) {
    if (!e.is_number()) throw ParseError(std::string("field '") + name + "' must be numeric");
    v(i++) = e.get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_flat(const Eigen::VectorXd &flat, int cols, const char *name) {
  if (cols <= 0 || flat.size() % cols != 0) {
    throw ParseError(std::string("field '") + name + "' has a length incompatible with dim");
  }
  const int rows = static_cast<int>(flat.size()) / cols;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = flat(i * cols + j);
  return m;
}

DerivativeBound bound_from_json(const json &j, int dim, const char *name) {
  DerivativeBound b;
  b.matrix = matrix_from_flat(vector_from_json(require_field(j, "M"), "M"), dim, name);
  b.offset = vector_from_json(require_field(j, "b"), "b");
  const std::string rel = require_field(j, "relation").get<std::string>();
  if (rel == "equality") {
    b.relation = Relation::Equality;
  } else if (rel == "inequality") {
    b.relation = Relation::Inequality;
  } else {
    throw ParseError(std::string("field 'relation' in '") + name + "' must be equality|inequality");
  }
  if (b.matrix.rows() != b.offset.size()) {
    throw ParseError(std::string("field '") + name + "' has mismatched M/b row counts");
  }
  return b;
}

}  // namespace

Proportions::Proportions(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() < 1) {
    throw std::invalid_argument("Proportions: empty vector");
  }
  for (int j = 0; j < values_.size(); ++j) {
    if (!(values_(j) > 1e-9)) {
      throw std::invalid_argument("Proportions: entries must be positive");
    }
  }
  if (std::abs(values_.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("Proportions: entries must sum to one");
  }
}

void PTProblem::validate() const {
  if (polytopes.empty()) throw std::invalid_argument("PTProblem: no polytopes");
  if (dim < 1) throw std::invalid_argument("PTProblem: dim must be >= 1");
  if (degree < 1) throw std::invalid_argument("PTProblem: degree must be >= 1");
  for (const auto &p : polytopes) {
    if (p.dim() != dim) throw std::invalid_argument("PTProblem: polytope dimension mismatch");
  }
  if (start_position.size() != dim || end_position.size() != dim) {
    throw std::invalid_argument("PTProblem: boundary position dimension mismatch");
  }
  if (start_velocity && start_velocity->size() != dim) {
    throw std::invalid_argument("PTProblem: start velocity dimension mismatch");
  }
  if (end_velocity && end_velocity->size() != dim) {
    throw std::invalid_argument("PTProblem: end velocity dimension mismatch");
  }
  for (const auto &b : velocity_bounds) check_bound(b, dim, "velocity");
  for (const auto &b : acceleration_bounds) check_bound(b, dim, "acceleration");
}

PTProblem generate(const GeneratorConfig &config) {
  if (config.dim != 2 && config.dim != 3) {
    throw std::invalid_argument("generate: dim must be 2 or 3");
  }
  if (config.n_polytopes < 1) {
    throw std::invalid_argument("generate: need at least one polytope");
  }
  if (config.points_per_polytope < config.dim + 1) {
    throw std::invalid_argument("generate: too few points per polytope");
  }
  if (config.decel_impossible_prob < 0.0 || config.decel_impossible_prob > 1.0) {
    throw std::invalid_argument("generate: probability outside [0, 1]");
  }
  if (config.degree < 2) {
    throw std::invalid_argument("generate: degree must be >= 2 (acceleration bounds)");
  }
  for (const auto &range : {config.velocity_bound_range, config.acceleration_bound_range}) {
    if (!(range.first > 0.0) || range.second < range.first) {
      throw std::invalid_argument("generate: bound ranges must be positive and ordered");
    }
  }
  if (config.decel_floor_range.first < 0.0 ||
      config.decel_floor_range.second < config.decel_floor_range.first) {
    throw std::invalid_argument("generate: deceleration floor range must be nonnegative and ordered");
  }
  if (!(config.translation_scale > 0.0)) {
    throw std::invalid_argument("generate: translation scale must be positive");
  }

  RandomEngine rng(config.seed);
  const int d = config.dim;
  const int m1 = config.n_polytopes;

  for (int attempt = 0; attempt < kHullRetries; ++attempt) {
    try {
      // (a) vertex clouds, translated along x by index and randomly elsewhere
      std::vector<Eigen::MatrixXd> clouds(static_cast<size_t>(m1));
      for (int j = 0; j < m1; ++j) {
        Eigen::MatrixXd pts(config.points_per_polytope, d);
        for (int i = 0; i < pts.rows(); ++i)
          for (int k = 0; k < d; ++k) pts(i, k) = rng.uniform01();
        Eigen::VectorXd shift(d);
        shift(0) = rng.uniform01() * j * config.translation_scale;
        for (int k = 1; k < d; ++k) {
          shift(k) = rng.uniform(-0.5, 0.5) * config.translation_scale;
        }
        pts.rowwise() += shift.transpose();
        clouds[static_cast<size_t>(j)] = pts;
      }
      std::vector<geometry::Polytope> polys;
      polys.reserve(static_cast<size_t>(m1));
      for (int j = 0; j < m1; ++j) polys.push_back(geometry::convex_hull(clouds[static_cast<size_t>(j)]));

      // (b) glue consecutive hulls through a point on a random segment
      for (int j = 0; j + 1 < m1; ++j) {
        const Eigen::VectorXd a = geometry::sample_interior(polys[static_cast<size_t>(j)], rng);
        const Eigen::VectorXd b = geometry::sample_interior(polys[static_cast<size_t>(j + 1)], rng);
        const Eigen::VectorXd q = a + rng.uniform01() * (b - a);
        for (int side = 0; side < 2; ++side) {
          Eigen::MatrixXd &cloud = clouds[static_cast<size_t>(j + side)];
          cloud.conservativeResize(cloud.rows() + 1, Eigen::NoChange);
          cloud.row(cloud.rows() - 1) = q.transpose();
          polys[static_cast<size_t>(j + side)] = geometry::convex_hull(cloud);
        }
      }

      PTProblem out;
      out.dim = d;
      out.degree = config.degree;
      out.polytopes = polys;

      // (c) boundary positions
      out.start_position = geometry::sample_interior(polys.front(), rng);
      out.end_position = geometry::sample_interior(polys.back(), rng);

      // (d) axis-aligned velocity box
      Eigen::VectorXd vmax(d);
      for (int k = 0; k < d; ++k) {
        vmax(k) = rng.uniform(config.velocity_bound_range.first, config.velocity_bound_range.second);
      }
      DerivativeBound vel;
      vel.matrix.resize(2 * d, d);
      vel.matrix.topRows(d) = Eigen::MatrixXd::Identity(d, d);
      vel.matrix.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
      vel.offset.resize(2 * d);
      vel.offset.head(d) = vmax;
      vel.offset.tail(d) = vmax;
      vel.relation = Relation::Inequality;
      out.velocity_bounds.push_back(vel);

      // (e) acceleration box, with an optional deceleration-impossible axis
      Eigen::VectorXd amax(d);
      for (int k = 0; k < d; ++k) {
        amax(k) = rng.uniform(config.acceleration_bound_range.first,
                              config.acceleration_bound_range.second);
      }
      const bool decel_impossible = rng.bernoulli(config.decel_impossible_prob);
      const int decel_axis = rng.uniform_int(d);
      const double decel_floor =
          rng.uniform(config.decel_floor_range.first, config.decel_floor_range.second);
      DerivativeBound acc;
      acc.matrix.resize(2 * d, d);
      acc.matrix.topRows(d) = Eigen::MatrixXd::Identity(d, d);
      acc.matrix.bottomRows(d) = -Eigen::MatrixXd::Identity(d, d);
      acc.offset.resize(2 * d);
      acc.offset.head(d) = amax;
      acc.offset.tail(d) = amax;
      if (decel_impossible) {
        // -a_k <= -c, i.e. a_k >= c: the axis cannot decelerate.
        acc.offset(d + decel_axis) = -decel_floor;
      }
      acc.relation = Relation::Inequality;
      out.acceleration_bounds.push_back(acc);

      // boundary velocities
      switch (config.boundary_velocity) {
        case BoundaryVelocityMode::Zero:
          out.start_velocity = Eigen::VectorXd::Zero(d);
          out.end_velocity = Eigen::VectorXd::Zero(d);
          break;
        case BoundaryVelocityMode::Random: {
          Eigen::VectorXd vs(d), ve(d);
          for (int k = 0; k < d; ++k) {
            vs(k) = rng.uniform(-0.5, 0.5) * vmax(k);
            ve(k) = rng.uniform(-0.5, 0.5) * vmax(k);
          }
          out.start_velocity = vs;
          out.end_velocity = ve;
          break;
        }
        case BoundaryVelocityMode::Free:
          break;
      }

      out.validate();
      if (!consecutive_intersections_nonempty(out)) {
        continue;  // pathological hull arithmetic; resample
      }
      return out;
    } catch (const DegeneracyError &) {
      // resample this attempt
    } catch (const SamplingError &) {
      // resample this attempt
    }
  }
  throw GenerationError("generate: no valid instance after 100 attempts");
}

bool consecutive_intersections_nonempty(const PTProblem &problem) {
  for (size_t j = 0; j + 1 < problem.polytopes.size(); ++j) {
    if (!intersection_nonempty(problem.polytopes[j], problem.polytopes[j + 1])) {
      return false;
    }
  }
  return true;
}

std::string to_json(const PTProblem &problem) {
  json j;
  j["version"] = 1;
  j["dim"] = problem.dim;
  j["degree"] = problem.degree;
  j["polytopes"] = json::array();
  for (const auto &p : problem.polytopes) {
    json jp;
    std::vector<double> H;
    H.reserve(static_cast<size_t>(p.normals().size()));
    for (int i = 0; i < p.normals().rows(); ++i)
      for (int k = 0; k < p.normals().cols(); ++k) H.push_back(p.normals()(i, k));
    jp["H"] = H;
    jp["h"] = std::vector<double>(p.offsets().data(), p.offsets().data() + p.offsets().size());
    j["polytopes"].push_back(jp);
  }
  j["start"] = std::vector<double>(problem.start_position.data(),
                                   problem.start_position.data() + problem.start_position.size());
  j["end"] = std::vector<double>(problem.end_position.data(),
                                 problem.end_position.data() + problem.end_position.size());
  if (problem.start_velocity) {
    j["start_velocity"] = std::vector<double>(
        problem.start_velocity->data(), problem.start_velocity->data() + problem.start_velocity->size());
  } else {
    j["start_velocity"] = nullptr;
  }
  if (problem.end_velocity) {
    j["end_velocity"] = std::vector<double>(
        problem.end_velocity->data(), problem.end_velocity->data() + problem.end_velocity->size());
  } else {
    j["end_velocity"] = nullptr;
  }
  j["velocity_bounds"] = json::array();
  for (const auto &b : problem.velocity_bounds) j["velocity_bounds"].push_back(bound_to_json(b));
  j["acceleration_bounds"] = json::array();
  for (const auto &b : problem.acceleration_bounds)
    j["acceleration_bounds"].push_back(bound_to_json(b));
  return j.dump(2);
}

PTProblem from_json(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("malformed JSON document: ") + e.what());
  }

  PTProblem out;
  out.dim = require_field(j, "dim").get<int>();
  out.degree = require_field(j, "degree").get<int>();

  const json &jpolys = require_field(j, "polytopes");
  if (!jpolys.is_array() || jpolys.empty()) {
    throw ParseError("field 'polytopes' must be a nonempty array");
  }
  for (const auto &jp : jpolys) {
    const Eigen::MatrixXd H =
        matrix_from_flat(vector_from_json(require_field(jp, "H"), "H"), out.dim, "H");
    const Eigen::VectorXd h = vector_from_json(require_field(jp, "h"), "h");
    if (H.rows() != h.size()) {
      throw ParseError("field 'polytopes' entry has mismatched H/h row counts");
    }
    out.polytopes.emplace_back(H, h);
  }

  out.start_position = vector_from_json(require_field(j, "start"), "start");
  out.end_position = vector_from_json(require_field(j, "end"), "end");
  const json &jsv = require_field(j, "start_velocity");
  if (!jsv.is_null()) out.start_velocity = vector_from_json(jsv, "start_velocity");
  const json &jev = require_field(j, "end_velocity");
  if (!jev.is_null()) out.end_velocity = vector_from_json(jev, "end_velocity");

  const json &jvb = require_field(j, "velocity_bounds");
  for (const auto &jb : jvb) out.velocity_bounds.push_back(bound_from_json(jb, out.dim, "velocity_bounds"));
  const json &jab = require_field(j, "acceleration_bounds");
  for (const auto &jb : jab)
    out.acceleration_bounds.push_back(bound_from_json(jb, out.dim, "acceleration_bounds"));

  try {
    out.validate();
  } catch (const std::invalid_argument &e) {
    throw ParseError(std::string("invalid problem document: ") + e.what());
  }
  return out;
}

}  // namespace polytraj::problem
