#include <CLI11.hpp>

#include <iostream>

#include "coopest/pipeline.hpp"

int main(int argc, char** argv) {
  using namespace coopest;
  CLI::App app{"Cooperative distributed state estimation: validate, synthesize, verify, simulate"};
  app.set_version_flag("--version", std::string(COOPEST_VERSION));
  app.require_subcommand(1);

  ValidateCommand validate;
  auto* v = app.add_subcommand("validate", "Check observability, partitions, assignment and communication edges");
  v->add_option("problem", validate.problem, "Problem file (JSON)")->required();
  v->add_option("--report", validate.report, "Write the JSON report here");

  GraphCommand graph;
  auto* g = app.add_subcommand("graph", "Build the communication and extended graphs");
  g->add_option("problem", graph.problem, "Problem file (JSON)")->required();
  g->add_option("--dot", graph.dot, "Write <prefix>-comm.dot and <prefix>-extended.dot");

  SynthCommand synth;
  auto* s = app.add_subcommand("synth", "Solve the coupled LMIs and write the gains");
  s->add_option("problem", synth.problem, "Problem file (JSON)")->required();
  s->add_option("--out", synth.gains_out, "Gains file to write")->required();
  s->add_option("--gamma", synth.request.gamma, "Override the measurement-noise level gamma");
  s->add_option("--omega", synth.request.omega, "Override the disturbance level omega");
  s->add_option("--alpha", synth.request.alpha, "Override the decay rate alpha (disables the search)");
  bool no_search = false;
  s->add_flag("--no-search", no_search, "Do not fall back to the (alpha, pi) grid");
  auto* min_gamma = s->add_flag("--min-gamma", "Minimize gamma at fixed omega");
  auto* min_omega = s->add_flag("--min-omega", "Minimize omega at fixed gamma");
  auto* min_trace = s->add_flag("--min-trace", "Minimize gamma^2 = omega^2");
  min_gamma->excludes(min_omega)->excludes(min_trace);
  min_omega->excludes(min_trace);

  VerifyCommand verify;
  auto* ve = app.add_subcommand("verify", "Audit gains independently of the solver");
  ve->add_option("problem", verify.problem, "Problem file (JSON)")->required();
  ve->add_option("gains", verify.gains, "Gains file (JSON)")->required();
  ve->add_option("--report", verify.report, "Write the JSON report here");

  SimCommand sim;
  auto* si = app.add_subcommand("sim", "Simulate plant and estimators and evaluate the performance bound");
  si->add_option("problem", sim.problem, "Problem file (JSON)")->required();
  si->add_option("gains", sim.gains, "Gains file (JSON)")->required();
  si->add_option("scenario", sim.scenario, "Scenario file (JSON)")->required();
  si->add_option("--csv", sim.csv, "Write the trace as CSV");
  si->add_option("--svg", sim.svg, "Plot the error norms as SVG");
  si->add_option("--report", sim.report, "Write the performance report (JSON)");

  DemoCommand demo;
  auto* d = app.add_subcommand("demo", "Run the whole pipeline on the built-in nine-state example");
  d->add_option("--out", demo.out_dir, "Output directory")->capture_default_str();
  d->add_option("--gamma", demo.gamma, "Override gamma");
  d->add_option("--omega", demo.omega, "Override omega");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (s->parsed()) {
    synth.request.allow_search = !no_search;
    if (*min_gamma) synth.request.mode = PerformanceMode::MinGamma;
    if (*min_omega) synth.request.mode = PerformanceMode::MinOmega;
    if (*min_trace) synth.request.mode = PerformanceMode::MinTrace;
    return cmd_synth(synth, std::cout, std::cerr);
  }
  if (v->parsed()) return cmd_validate(validate, std::cout, std::cerr);
  if (g->parsed()) return cmd_graph(graph, std::cout, std::cerr);
  if (ve->parsed()) return cmd_verify(verify, std::cout, std::cerr);
  if (si->parsed()) return cmd_sim(sim, std::cout, std::cerr);
  if (d->parsed()) return cmd_demo(demo, std::cout, std::cerr);
  return kExitUsage;
}
