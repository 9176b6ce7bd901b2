#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "coopest/sim.hpp"
#include "coopest/synthesis.hpp"

namespace coopest {

using Json = nlohmann::ordered_json;

/// Synthesis parameters exactly as written in a problem file. Absent keys
/// fall back to the defaults of SynthesisParams; per-estimator maps may be
/// partial (missing pi is 1, missing W is the identity).
struct ProblemParams {
  std::optional<double> alpha;
  std::optional<double> pi_all;   // "pi": <number>
  std::map<int, double> pi_each;  // "pi": {"<k>": <number>}, 0-based keys
  std::optional<double> gamma;
  std::optional<double> omega;
  bool W_identity = false;        // "W": "identity"
  std::map<int, Matrix> W_each;   // "W": {"<k>": <matrix>}, 0-based keys
  std::optional<double> strictness;
};

/// In-memory form of the problem JSON. All indices are 0-based here and
/// 1-based in the file.
struct ProblemFile {
  std::string name;
  std::string description;
  std::vector<SubsystemModel> subsystems;
  std::vector<CouplingBlock> couplings;
  std::vector<std::vector<StateIndex>> partitions;
  std::vector<std::pair<StateIndex, std::optional<int>>> assignment;  // overrides
  std::vector<std::pair<int, int>> comm_edges;
  ProblemParams params;
  std::optional<double> rank_tolerance;
};

/// Throws Error(Parse) naming the JSON location (line/column for syntax,
/// a JSON pointer for schema problems). Unknown keys are rejected.
ProblemFile parse_problem(const std::string& text);
/// Canonical form: fixed key order, two-space indent, trailing newline.
std::string serialize_problem(const ProblemFile& problem);

/// The structural objects a problem file describes. Construction errors of
/// the system are Error(Dimension | Duplicate); bad partitions are
/// Error(Validation).
struct ProblemInstance {
  InterconnectedSystem system;
  std::vector<SelectionFunction> selections;
  AssignmentFunction assignment;
  CommGraph graph;
  RankOptions rank;
};

InterconnectedSystem build_system(const ProblemFile& problem);
ProblemInstance instantiate(const ProblemFile& problem);
/// File parameters on top of SynthesisParams defaults (not yet resolved).
SynthesisParams synthesis_params(const ProblemParams& params, const EstimatorNetwork& net);

/// Synthesized certificate plus provenance.
struct GainsFile {
  std::string version;
  std::string input_hash;  // "sha256:<hex>" of the problem file bytes
  GainCertificate certificate;
};

GainsFile parse_gains(const std::string& text);
std::string serialize_gains(const GainsFile& gains);

/// Simulation scenario. Filtered-noise specs without "duration" last for
/// the whole horizon; an absent initial state is zero.
struct Scenario {
  double horizon = 0.0;
  std::optional<Vector> initial_state;
  std::optional<double> dt;
  int record_stride = 1;
  std::vector<DisturbanceSpec> disturbances;
};

Scenario parse_scenario(const std::string& text);
std::string serialize_scenario(const Scenario& scenario);

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

/// Whole file as bytes; Error(Parse) if it cannot be read.
std::string read_file(const std::string& path);
/// Writes bytes, creating nothing but the file; Error(Parse) on failure.
void write_file(const std::string& path, const std::string& bytes);

Json matrix_to_json(const Matrix& m);
/// expected_cols sizes an empty row list (e.g. a 0 x n output matrix).
Matrix matrix_from_json(const Json& node, const std::string& where, int expected_cols = -1);

/// Two-space indented dump with a trailing newline.
std::string dump_json(const Json& node);

}  // namespace coopest
