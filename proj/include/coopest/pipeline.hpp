#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "coopest/analysis.hpp"
#include "coopest/io.hpp"

namespace coopest {

/// Process exit codes shared by every command.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2 };

/// The nine-state example problem and the demo scenario, compiled into the library.
std::string_view embedded_example();
std::string_view embedded_demo_scenario();

struct ValidationResult {
  Json report;
  bool passed = false;
};

/// Runs every structural check and collects the findings. Throws
/// Error(Dimension | Duplicate) when the system itself cannot be assembled.
ValidationResult validate_problem(const ProblemFile& problem);

/// Network from a problem that passed validation; Error(Validation) otherwise.
EstimatorNetwork network_from(const ProblemFile& problem);

struct SynthRequest {
  std::optional<PerformanceMode> mode;
  std::optional<double> gamma;  // override of the file value
  std::optional<double> omega;
  std::optional<double> alpha;
  /// Fall back to the (alpha, pi) grid when the starting point is
  /// infeasible. Only used when neither alpha nor pi is fixed.
  bool allow_search = true;
};

struct SynthResult {
  SynthesisStatus status = SynthesisStatus::Infeasible;
  std::optional<GainCertificate> certificate;
  bool searched = false;
  int candidates_tried = 0;
  std::string message;
};

SynthResult synthesize(const EstimatorNetwork& net, const ProblemFile& problem, const SynthRequest& request);

/// Gains as deployed: G = P L and F = P K are rebuilt from the observer
/// gains so that the audit certifies the L and K the estimators run with.
std::vector<EstimatorGains> deployed_gains(const std::vector<EstimatorGains>& gains);

struct VerifyResult {
  Json report;
  bool passed = false;
};

VerifyResult verify_certificate(const EstimatorNetwork& net, const GainCertificate& certificate);

struct SimResult {
  SimulationTrace trace;
  PerformanceReport performance;
  Json report;
};

SimResult run_scenario(const EstimatorNetwork& net, const GainCertificate& certificate, const Scenario& scenario);

// Command entry points. Human-readable progress goes to `out`, problems to
// `err`; the return value is the process exit code.

struct ValidateCommand {
  std::string problem;
  std::optional<std::string> report;
};
int cmd_validate(const ValidateCommand& cmd, std::ostream& out, std::ostream& err);

struct GraphCommand {
  std::string problem;
  /// Prefix for <prefix>-comm.dot and <prefix>-extended.dot; stdout if empty.
  std::optional<std::string> dot;
};
int cmd_graph(const GraphCommand& cmd, std::ostream& out, std::ostream& err);

struct SynthCommand {
  std::string problem;
  std::string gains_out;
  SynthRequest request;
};
int cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err);

struct VerifyCommand {
  std::string problem;
  std::string gains;
  std::optional<std::string> report;
};
int cmd_verify(const VerifyCommand& cmd, std::ostream& out, std::ostream& err);

struct SimCommand {
  std::string problem;
  std::string gains;
  std::string scenario;
  std::optional<std::string> csv;
  std::optional<std::string> svg;
  std::optional<std::string> report;
};
int cmd_sim(const SimCommand& cmd, std::ostream& out, std::ostream& err);

struct DemoCommand {
  std::string out_dir = "demo-out";
  std::optional<double> gamma;
  std::optional<double> omega;
};
int cmd_demo(const DemoCommand& cmd, std::ostream& out, std::ostream& err);

}  // namespace coopest
