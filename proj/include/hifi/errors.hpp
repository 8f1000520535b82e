#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hifi {

/// Malformed or inconsistent configuration input (bad key, bad value,
/// violated parameter domain discovered while loading a file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed artifact / trace file (syntax, schema, or shape mismatch).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// No admissible filter exists for the requested attenuation level.
/// Carries the best attained feasibility margin for each weighting that
/// was tried, so callers can report how far from feasible the search got.
class SynthesisInfeasible : public std::runtime_error {
 public:
  SynthesisInfeasible(const std::string& what,
                      std::vector<std::pair<double, double>> q1_margins)
      : std::runtime_error(what), q1_margins(std::move(q1_margins)) {}

  /// (q1 weight, best margin reached) per attempted grid point.
  std::vector<std::pair<double, double>> q1_margins;
};

/// A filter was recovered from a feasible design problem but the
/// independent delay-dependent certificate could not be re-established.
class CertificationFailure : public std::runtime_error {
 public:
  explicit CertificationFailure(const std::string& what)
      : std::runtime_error(what) {}
};

/// An iterative numerical routine failed to converge or hit a
/// degenerate configuration (singular coupling, stalled iteration).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace hifi
