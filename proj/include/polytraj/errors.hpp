#pragma once

#include <stdexcept>
#include <string>

namespace polytraj {

/// Convex hull construction received affinely dependent input.
class DegeneracyError : public std::runtime_error {
 public:
  explicit DegeneracyError(const std::string &what) : std::runtime_error(what) {}
};

/// Rejection sampling exceeded its retry budget (near-empty interior).
class SamplingError : public std::runtime_error {
 public:
  explicit SamplingError(const std::string &what) : std::runtime_error(what) {}
};

/// Problem generation could not produce a valid instance.
class GenerationError : public std::runtime_error {
 public:
  explicit GenerationError(const std::string &what) : std::runtime_error(what) {}
};

/// Schema violation while reading a serialized document.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string &what) : std::runtime_error(what) {}
};

/// The problem violates a structural precondition (e.g. empty corridor intersection).
class InvalidProblemError : public std::runtime_error {
 public:
  explicit InvalidProblemError(const std::string &what) : std::runtime_error(what) {}
};

/// Curve degree too low for the requested derivative constraints.
class UnsupportedDegreeError : public std::runtime_error {
 public:
  explicit UnsupportedDegreeError(const std::string &what) : std::runtime_error(what) {}
};

/// An operation was called on inputs its contract excludes.
class MisuseError : public std::logic_error {
 public:
  explicit MisuseError(const std::string &what) : std::logic_error(what) {}
};

}  // namespace polytraj
