#pragma once

#include <string>

#include "hifi/model.hpp"
#include "hifi/synthesis.hpp"

namespace hifi {

inline constexpr int kArtifactSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

/// On-disk form of a synthesized design: the gains, the certificate
/// blocks, and the system they were designed for, so the artifact is
/// self-contained for later verification and simulation.
struct GainsArtifact {
  int schema_version = kArtifactSchemaVersion;
  std::string tool_version = kToolVersion;
  std::string config_hash;

  FilterGains gains;
  Matrix10 P = Matrix10::Zero();
  Matrix5 Q1 = Matrix5::Zero();
  double Q2 = 0.0;
  double gamma = 0.0;
  double tau_max = 0.0;
  double q1_selected = 0.0;
  double margin = 0.0;

  AugmentedDelaySystem system{};
};

GainsArtifact make_artifact(const SynthesisResult& result,
                            const AugmentedDelaySystem& sys,
                            const std::string& config_hash);

/// Writes the artifact as schema-versioned JSON with row-major matrix
/// arrays. Throws ParseError on I/O failure.
void write_artifact(const std::string& path, const GainsArtifact& artifact);

/// Reads an artifact back, validating schema version and every matrix
/// shape. Throws ParseError on malformed input.
GainsArtifact read_artifact(const std::string& path);

}  // namespace hifi
