#pragma once

#include <string>

#include "hifi/model.hpp"
#include "hifi/simulator.hpp"

namespace hifi {

/// Flat sectioned key-value configuration. Every key has a documented
/// default except the suspension parameters, which must be given.
/// Unknown sections or keys are rejected.
struct Config {
  SuspensionParams suspension{};

  // [augment]
  double d_r = 1.0;
  Vector3 d_0 = Vector3::Constant(0.01);
  double d_1 = 0.01;
  double tau_min = 0.0;
  double tau_max = 0.5;
  double road_decay = 0.0;

  // [synthesis]
  double gamma = 0.5;
  double epsilon = 0.0;  ///< 0 = automatic strictness
  double q1_min = 1e-3;
  double q1_max = 1e3;

  // [simulation]
  SimConfig sim;
  DelayProfile delay = DelayProfile::constant(0.2);

  // [kalman]
  double q_w = 1.0;
  Vector3 r_diag = Vector3::Constant(1e-4);
};

/// Parses and validates a configuration file; every domain invariant is
/// re-checked on load. Throws ConfigError with file/line context.
Config load_config(const std::string& path);

/// Quarter-car plant for the configuration (suspension parameters plus
/// the configured measurement noise couplings).
Plant make_plant(const Config& config);

/// Delay-augmented system for the configuration.
AugmentedDelaySystem make_system(const Config& config);

/// FNV-1a 64-bit digest of the raw configuration bytes, as
/// "fnv1a64:<hex>"; recorded in artifacts for provenance.
std::string hash_file(const std::string& path);

}  // namespace hifi
