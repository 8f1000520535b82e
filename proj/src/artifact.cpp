#include "hifi/artifact.hpp"

#include <fstream>
#include <string>
#include <utility>

#include <json.hpp>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, Eigen::Index rows,
                                 Eigen::Index cols, const std::string& name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw ParseError("artifact field '" + name + "' must be a " +
                     std::to_string(rows) + "x" + std::to_string(cols) +
                     " array");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw ParseError("artifact field '" + name + "' row " +
                       std::to_string(i) + " must hold " +
                       std::to_string(cols) + " numbers");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      const json& cell = row.at(static_cast<std::size_t>(k));
      if (!cell.is_number()) {
        throw ParseError("artifact field '" + name + "' contains a non-number");
      }
      m(i, k) = cell.get<double>();
    }
  }
  return m;
}

double number_field(const json& j, const std::string& name) {
  if (!j.contains(name) || !j.at(name).is_number()) {
    throw ParseError("artifact is missing numeric field '" + name + "'");
  }
  return j.at(name).get<double>();
}

const json& object_field(const json& j, const std::string& name) {
  if (!j.contains(name) || !j.at(name).is_object()) {
    throw ParseError("artifact is missing object field '" + name + "'");
  }
  return j.at(name);
}

}  // namespace

GainsArtifact make_artifact(const SynthesisResult& result,
                            const AugmentedDelaySystem& sys,
                            const std::string& config_hash) {
  GainsArtifact artifact;
  artifact.config_hash = config_hash;
  artifact.gains = result.gains;
  artifact.P = result.P;
  artifact.Q1 = result.Q1;
  artifact.Q2 = result.Q2;
  artifact.gamma = result.gamma;
  artifact.tau_max = result.tau_max;
  artifact.q1_selected = result.q1_selected;
  artifact.margin = result.margin;
  artifact.system = sys;
  return artifact;
}

void write_artifact(const std::string& path, const GainsArtifact& artifact) {
  json j;
  j["schema_version"] = artifact.schema_version;
  j["kind"] = "hifi-gains";
  j["provenance"] = {{"config_hash", artifact.config_hash},
                     {"tool_version", artifact.tool_version}};
  j["dims"] = {{"state", 5}, {"measurements", 4}, {"objectives", 4}};
  j["gamma"] = artifact.gamma;
  j["tau_max"] = artifact.tau_max;
  j["q1_selected"] = artifact.q1_selected;
  j["q2"] = artifact.Q2;
  j["margin"] = artifact.margin;
  j["K_A"] = matrix_to_json(artifact.gains.K_A);
  j["K_B"] = matrix_to_json(artifact.gains.K_B);
  j["K_C"] = matrix_to_json(artifact.gains.K_C);
  j["P"] = matrix_to_json(artifact.P);
  j["Q1"] = matrix_to_json(artifact.Q1);
  j["system"] = {{"A_a", matrix_to_json(artifact.system.A_a)},
                 {"B_a", matrix_to_json(artifact.system.B_a)},
                 {"C_a0", matrix_to_json(artifact.system.C_a0)},
                 {"C_a1", matrix_to_json(artifact.system.C_a1)},
                 {"D_a", matrix_to_json(artifact.system.D_a)},
                 {"E_a", matrix_to_json(artifact.system.E_a)},
                 {"d_r", artifact.system.D_r},
                 {"d_1", artifact.system.D_1},
                 {"tau_min", artifact.system.tau_min},
                 {"tau_max", artifact.system.tau_max},
                 {"road_decay", artifact.system.road_decay}};

  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw ParseError("failed while writing '" + path + "'");
}

GainsArtifact read_artifact(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");

  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ParseError("'" + path + "' must hold a JSON object");

  try {
    GainsArtifact artifact;
    if (!j.contains("schema_version") ||
        !j.at("schema_version").is_number_integer()) {
      throw ParseError("artifact is missing integer field 'schema_version'");
    }
    artifact.schema_version = j.at("schema_version").get<int>();
    if (artifact.schema_version != kArtifactSchemaVersion) {
      throw ParseError("unsupported artifact schema version " +
                       std::to_string(artifact.schema_version));
    }
    if (!j.contains("kind") || j.at("kind") != "hifi-gains") {
      throw ParseError("artifact field 'kind' must be \"hifi-gains\"");
    }
    const json& provenance = object_field(j, "provenance");
    if (!provenance.contains("config_hash") ||
        !provenance.at("config_hash").is_string()) {
      throw ParseError("artifact provenance is missing 'config_hash'");
    }
    artifact.config_hash = provenance.at("config_hash").get<std::string>();
    if (provenance.contains("tool_version") &&
        provenance.at("tool_version").is_string()) {
      artifact.tool_version = provenance.at("tool_version").get<std::string>();
    }

    artifact.gamma = number_field(j, "gamma");
    artifact.tau_max = number_field(j, "tau_max");
    artifact.q1_selected = number_field(j, "q1_selected");
    artifact.Q2 = number_field(j, "q2");
    artifact.margin = number_field(j, "margin");
    artifact.gains.K_A = matrix_from_json(j.at("K_A"), 5, 5, "K_A");
    artifact.gains.K_B = matrix_from_json(j.at("K_B"), 5, 4, "K_B");
    artifact.gains.K_C = matrix_from_json(j.at("K_C"), 4, 5, "K_C");
    artifact.P = matrix_from_json(j.at("P"), 10, 10, "P");
    artifact.Q1 = matrix_from_json(j.at("Q1"), 5, 5, "Q1");

    const json& sys = object_field(j, "system");
    artifact.system.A_a = matrix_from_json(sys.at("A_a"), 5, 5, "system.A_a");
    artifact.system.B_a = matrix_from_json(sys.at("B_a"), 5, 1, "system.B_a");
    artifact.system.C_a0 =
        matrix_from_json(sys.at("C_a0"), 4, 5, "system.C_a0");
    artifact.system.C_a1 =
        matrix_from_json(sys.at("C_a1"), 4, 5, "system.C_a1");
    artifact.system.D_a = matrix_from_json(sys.at("D_a"), 4, 1, "system.D_a");
    artifact.system.E_a = matrix_from_json(sys.at("E_a"), 4, 5, "system.E_a");
    artifact.system.D_r = number_field(sys, "d_r");
    artifact.system.D_1 = number_field(sys, "d_1");
    artifact.system.tau_min = number_field(sys, "tau_min");
    artifact.system.tau_max = number_field(sys, "tau_max");
    artifact.system.road_decay = number_field(sys, "road_decay");
    return artifact;
  } catch (const json::exception& e) {
    throw ParseError("'" + path + "' is malformed: " + std::string(e.what()));
  }
}

}  // namespace hifi
