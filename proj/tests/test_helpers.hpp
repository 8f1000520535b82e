#pragma once

#include <string>

#include "hifi/config.hpp"
#include "hifi/model.hpp"
#include "hifi/synthesis.hpp"

namespace test_helpers {

/// Physical parameters used throughout the suite (the bundled study car).
inline hifi::SuspensionParams car_params() {
  return {290.0, 60.0, 16800.0, 19000.0, 200.0, 0.1};
}

inline std::string study_config_path() {
  return std::string(HIFI_CONFIG_DIR) + "/section5.cfg";
}

inline const hifi::Config& study_config() {
  static const hifi::Config config = hifi::load_config(study_config_path());
  return config;
}

inline const hifi::AugmentedDelaySystem& study_system() {
  static const hifi::AugmentedDelaySystem sys =
      hifi::make_system(study_config());
  return sys;
}

/// One synthesis run shared by every test that needs a certified design;
/// computed on first use.
inline const hifi::SynthesisResult& study_design() {
  static const hifi::SynthesisResult result =
      hifi::synthesize(study_system(), study_config().gamma);
  return result;
}

}  // namespace test_helpers
