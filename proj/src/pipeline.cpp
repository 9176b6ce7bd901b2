#include "coopest/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <ostream>

#include "coopest/graphs.hpp"

namespace coopest {

namespace {

Json complex_list(const std::vector<std::complex<double>>& values) {
  Json out = Json::array();
  for (const auto& z : values) out.push_back(Json::array({z.real(), z.imag()}));
  return out;
}

Json number_list(const std::vector<double>& values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

const char* issue_name(AssignmentIssue issue) {
  switch (issue) {
    case AssignmentIssue::NotSelectedByAssignee: return "not_selected_by_assignee";
    case AssignmentIssue::UnassignedButSelected: return "unassigned_but_selected";
    case AssignmentIssue::Uncovered: return "uncovered";
    case AssignmentIssue::UnknownEstimator: return "unknown_estimator";
  }
  return "unknown";
}

std::string edge_name(int from, int to) { return "(" + std::to_string(from + 1) + "," + std::to_string(to + 1) + ")"; }

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse:
    case ErrorKind::Dimension:
    case ErrorKind::Duplicate: return kExitUsage;
    default: return kExitFailure;
  }
}

const char* verdict(bool passed) { return passed ? "PASS" : "FAIL"; }

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

struct LoadedProblem {
  std::string bytes;
  ProblemFile file;
};

LoadedProblem load_problem(const std::string& path) {
  LoadedProblem p;
  p.bytes = read_file(path);
  p.file = parse_problem(p.bytes);
  return p;
}

std::string hash_tag(const std::string& bytes) { return "sha256:" + sha256_hex(bytes); }

void print_validation(const Json& r, std::ostream& out) {
  const auto& obs = r["observability"];
  out << "observability of (A, C): " << verdict(obs["observable"].get<bool>()) << " (rank "
      << obs["rank"].get<int>() << " of " << obs["state_dim"].get<int>() << ")\n";
  for (const auto& d : r["local_detectability"])
    out << "estimator " << d["estimator"].get<int>() << ": (A, C) restricted to its partition is "
        << (d["detectable"].get<bool>() ? "detectable" : "not detectable") << "\n";
  for (const auto& e : r["errors"]) out << "partition error: " << e.get<std::string>() << "\n";
  out << "partition covers measurements: " << verdict(r["partition"]["passed"].get<bool>()) << "\n";
  for (const auto& v : r["partition"]["violations"])
    out << "  estimator " << v["estimator"].get<int>() << " measures " << v["state"].get<std::string>()
        << " without selecting it\n";
  out << "assignment: " << verdict(r["assignment"]["passed"].get<bool>()) << "\n";
  for (const auto& v : r["assignment"]["violations"])
    out << "  " << v["state"].get<std::string>() << ": " << v["issue"].get<std::string>() << "\n";
  out << "communication graph: " << verdict(r["communication"]["passed"].get<bool>()) << "\n";
  for (const auto& e : r["communication"]["required_edges"])
    out << "  missing communication edge " << e.get<std::string>() << "\n";
  for (const auto& m : r["communication"]["missing"])
    out << "  estimator " << m["estimator"].get<int>() << " needs " << m["external"].get<std::string>()
        << " to estimate " << m["component"].get<std::string>() << "\n";
}

void print_verify(const Json& r, std::ostream& out) {
  const auto& res = r["lmi_residuals"];
  out << "LMI residuals: " << verdict(res["passed"].get<bool>()) << " (threshold " << res["threshold"].get<double>()
      << ")\n";
  for (std::size_t k = 0; k < res["margins"].size(); ++k)
    out << "  estimator " << k + 1 << ": margin " << res["margins"][k].get<double>() << "\n";
  const auto& st = r["stability"];
  out << "stability: " << verdict(st["passed"].get<bool>()) << " (spectral abscissa " << st["abscissa"].get<double>()
      << ")\n";
  const auto& fr = r["frequency"];
  if (fr.contains("sup"))
    out << "frequency audit: " << verdict(fr["passed"].get<bool>()) << " (sup " << fr["sup"].get<double>() << " at "
        << fr["at_frequency"].get<double>() << " rad/s)\n";
  else
    out << "frequency audit: FAIL (" << fr["message"].get<std::string>() << ")\n";
}

}  // namespace

ValidationResult validate_problem(const ProblemFile& problem) {
  const InterconnectedSystem sys = build_system(problem);
  const int N = sys.subsystem_count();
  RankOptions rank;
  if (problem.rank_tolerance) rank.absolute_tolerance = *problem.rank_tolerance;

  Json r = Json::object();
  bool passed = true;
  const auto obs = check_observability(sys.A, sys.C, rank);
  r["observability"] = Json{{"observable", obs.observable},
                            {"rank", obs.rank},
                            {"state_dim", obs.state_dim},
                            {"tolerance", obs.tolerance},
                            {"pbh_failures", complex_list(obs.pbh_failures)}};
  passed = passed && obs.observable;

  Json errors = Json::array();
  std::vector<SelectionFunction> selections;
  for (int k = 0; k < N; ++k) {
    try {
      selections.emplace_back(k, problem.partitions.at(k), sys.index);
    } catch (const Error& e) {
      errors.push_back("estimator " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  r["errors"] = errors;
  Json detect = Json::array();
  Json part = Json::object();
  Json assign = Json::object();
  Json comm = Json::object();
  if (!errors.empty()) {
    passed = false;
    part = Json{{"passed", false}, {"violations", Json::array()}};
    assign = Json{{"passed", false}, {"violations", Json::array()}};
    comm = Json{{"passed", false}, {"required_edges", Json::array()}, {"missing", Json::array()}};
  } else {
    for (int k = 0; k < N; ++k) {
      const auto rep = repartition(sys, selections, k);
      const auto d = check_detectability(rep.A, rep.C, rank);
      detect.push_back(Json{{"estimator", k + 1}, {"detectable", d.detectable}, {"undetectable_modes", complex_list(d.undetectable)}});
    }
    const auto pr = validate_partition(sys, selections);
    Json pv = Json::array();
    for (const auto& v : pr.violations) pv.push_back(Json{{"estimator", v.estimator + 1}, {"state", to_string(v.state)}});
    part = Json{{"passed", pr.passed()}, {"violations", pv}};
    passed = passed && pr.passed();

    AssignmentFunction zeta = default_assignment(sys.index, selections);
    for (const auto& [s, e] : problem.assignment) zeta.assign(s, e);
    const auto ar = validate_assignment(sys.index, selections, zeta);
    Json av = Json::array();
    for (const auto& v : ar.violations)
      av.push_back(Json{{"state", to_string(v.state)},
                        {"assigned", v.assigned ? Json(*v.assigned + 1) : Json(nullptr)},
                        {"issue", issue_name(v.issue)}});
    assign = Json{{"passed", ar.passed()}, {"violations", av}};
    passed = passed && ar.passed();

    const CommGraph graph(N, problem.comm_edges);
    const auto a2 = check_assumption2(sys, selections, zeta, graph);
    Json req = Json::array();
    for (const auto& [from, to] : a2.required_edges()) req.push_back(edge_name(from, to));
    Json missing = Json::array();
    for (const auto& m : a2.violations)
      missing.push_back(Json{{"estimator", m.estimator + 1},
                             {"component", to_string(m.component)},
                             {"external", to_string(m.external)},
                             {"required_from", m.required_from ? Json(*m.required_from + 1) : Json(nullptr)}});
    comm = Json{{"passed", a2.passed()}, {"required_edges", req}, {"missing", missing}};
    passed = passed && a2.passed();
  }
  r["local_detectability"] = detect;
  r["partition"] = part;
  r["assignment"] = assign;
  r["communication"] = comm;
  Json out = Json::object();
  out["passed"] = passed;
  for (auto& [key, value] : r.items()) out[key] = value;
  return {out, passed};
}

EstimatorNetwork network_from(const ProblemFile& problem) {
  const auto v = validate_problem(problem);
  if (!v.passed) throw Error(ErrorKind::Validation, "problem fails validation; run `coopest validate` for details");
  auto inst = instantiate(problem);
  return make_network(std::move(inst.system), std::move(inst.selections), std::move(inst.assignment),
                      std::move(inst.graph));
}

SynthResult synthesize(const EstimatorNetwork& net, const ProblemFile& problem, const SynthRequest& request) {
  SynthesisParams params = synthesis_params(problem.params, net);
  if (request.gamma) params.gamma = *request.gamma;
  if (request.omega) params.omega = *request.omega;
  if (request.alpha) params.alpha = *request.alpha;
  params = resolve_params(params, net);
  const bool fixed = problem.params.alpha || problem.params.pi_all || !problem.params.pi_each.empty() || request.alpha;

  SynthResult result;
  if (request.allow_search && !fixed) {
    const auto search = search_parameters(net, params);
    result.searched = search.candidates_tried > 1 || !search.found;
    result.candidates_tried = search.candidates_tried;
    if (!search.found) {
      result.status = SynthesisStatus::Infeasible;
      result.message = "infeasible for every (alpha, pi) candidate (" + std::to_string(search.candidates_tried) + " tried)";
      return result;
    }
    params = search.params;
  }
  SynthesisOutcome outcome;
  if (request.mode) {
    if (check_feasible(net, params) != SynthesisStatus::Feasible) {
      result.status = SynthesisStatus::Infeasible;
      result.message = "infeasible at the starting point of the performance optimization";
      return result;
    }
    outcome = optimize_performance(net, params, *request.mode).synthesis;
  } else {
    outcome = solve_coupled(net, params);
  }
  result.status = outcome.status;
  result.certificate = outcome.certificate;
  result.message = outcome.message.empty() ? to_string(outcome.status) : outcome.message;
  return result;
}

std::vector<EstimatorGains> deployed_gains(const std::vector<EstimatorGains>& gains) {
  std::vector<EstimatorGains> out = gains;
  for (auto& g : out) {
    g.G = g.P * g.L;
    g.F = g.P * g.K;
  }
  return out;
}

VerifyResult verify_certificate(const EstimatorNetwork& net, const GainCertificate& certificate) {
  const int N = net.estimators();
  if (static_cast<int>(certificate.gains.size()) != N)
    throw Error(ErrorKind::Dimension, "gains describe " + std::to_string(certificate.gains.size()) +
                                          " estimators, the problem has " + std::to_string(N));
  for (int k = 0; k < N; ++k) {
    const auto& g = certificate.gains[k];
    const int s = net.reps[k].sigma();
    const int r = static_cast<int>(net.reps[k].C.rows());
    if (g.P.rows() != s || g.L.rows() != s || g.L.cols() != r || g.K.rows() != s || g.K.cols() != s)
      throw Error(ErrorKind::Dimension, "gains of estimator " + std::to_string(k + 1) + " do not match its partition");
  }
  const SynthesisParams params = resolve_params(certificate.params, net);
  const auto gains = deployed_gains(certificate.gains);

  Json r = Json::object();
  double dg = 0.0, df = 0.0;
  for (int k = 0; k < N; ++k) {
    const auto& stored = certificate.gains[k];
    if (stored.G.size() == gains[k].G.size() && stored.G.size() > 0)
      dg = std::max(dg, (stored.G - gains[k].G).cwiseAbs().maxCoeff());
    if (stored.F.size() == gains[k].F.size() && stored.F.size() > 0)
      df = std::max(df, (stored.F - gains[k].F).cwiseAbs().maxCoeff());
  }
  r["gain_consistency"] = Json{{"max_abs_PL_minus_G", dg}, {"max_abs_PK_minus_F", df}};

  const auto res = check_lmi_residuals(net, gains, params);
  r["lmi_residuals"] = Json{{"passed", res.passed},
                            {"threshold", res.threshold},
                            {"margins", number_list(res.margins)},
                            {"schur_margins", number_list(res.schur_margins)},
                            {"p_margins", number_list(res.p_margins)},
                            {"stored_margins", number_list(certificate.margins)}};

  const auto es = assemble_error_system(net, gains, params.W);
  const auto st = check_stability(es, stacked_lyapunov(gains), params.alpha);
  r["stability"] = Json{{"passed", st.passed()},
                        {"abscissa", st.abscissa},
                        {"stable", st.stable},
                        {"certificate_holds", st.certificate_holds},
                        {"certificate_max_eigenvalue", st.certificate_max_eigenvalue},
                        {"certificate_tolerance", st.certificate_tolerance}};

  bool freq_passed = false;
  if (st.stable) {
    const auto fr = check_hinf_frequency(es, params.gamma, params.omega);
    freq_passed = fr.passed;
    r["frequency"] = Json{{"passed", fr.passed},
                          {"sup", fr.sup},
                          {"at_frequency", fr.at_frequency},
                          {"evaluations", fr.evaluations},
                          {"hinf_norm_bisection", hinf_norm(es.A, scaled_input(es, params.gamma, params.omega), es.C_z)}};
  } else {
    r["frequency"] = Json{{"passed", false}, {"message", "error system is not stable"}};
  }
  r["params"] = Json{{"alpha", params.alpha},
                     {"pi", number_list(params.pi)},
                     {"gamma", params.gamma},
                     {"omega", params.omega},
                     {"strictness", *params.strictness}};
  r["implication_holds"] = !res.passed || (st.stable && freq_passed);
  const bool passed = res.passed && st.passed() && freq_passed;
  Json out = Json::object();
  out["passed"] = passed;
  for (auto& [key, value] : r.items()) out[key] = value;
  return {out, passed};
}

SimResult run_scenario(const EstimatorNetwork& net, const GainCertificate& certificate, const Scenario& scenario) {
  const int n = net.system.state_dim();
  Vector x0 = Vector::Zero(n);
  if (scenario.initial_state) {
    if (scenario.initial_state->size() != n)
      throw Error(ErrorKind::Dimension, "initial_state has " + std::to_string(scenario.initial_state->size()) +
                                            " entries, the plant has " + std::to_string(n) + " states");
    x0 = *scenario.initial_state;
  }
  const SynthesisParams params = resolve_params(certificate.params, net);
  const DisturbanceSet disturbances(net, scenario.disturbances);
  SimulationOptions options;
  options.dt = scenario.dt;
  options.record_stride = scenario.record_stride;
  SimResult result;
  result.trace = simulate(net, certificate.gains, disturbances, x0, scenario.horizon, options);
  result.performance = evaluate_performance(result.trace, certificate.gains, params, x0);
  const auto& tr = result.trace;
  const auto& pr = result.performance;
  Json final_errors = Json::array();
  for (int k = 0; k < net.estimators(); ++k) final_errors.push_back(tr.error(k, tr.samples() - 1).norm());
  result.report = Json{{"passed", pr.passed},
                       {"lhs", pr.lhs},
                       {"rhs", pr.rhs},
                       {"initial_term", pr.initial_term},
                       {"ratio", pr.ratio},
                       {"quadrature_error", pr.quadrature_error},
                       {"dt", tr.dt},
                       {"steps", tr.steps},
                       {"initial_error_norm", tr.stacked_error(0).norm()},
                       {"final_error_norms", final_errors}};
  return result;
}

int cmd_validate(const ValidateCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = load_problem(cmd.problem);
    const auto v = validate_problem(problem.file);
    print_validation(v.report, out);
    if (cmd.report) write_file(*cmd.report, dump_json(v.report));
    out << "validation: " << verdict(v.passed) << "\n";
    return v.passed ? kExitOk : kExitFailure;
  });
}

int cmd_graph(const GraphCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = load_problem(cmd.problem);
    const auto net = network_from(problem.file);
    const std::string comm = export_dot(net.graph);
    const std::string ext = export_dot(net.extended);
    if (cmd.dot) {
      write_file(*cmd.dot + "-comm.dot", comm);
      write_file(*cmd.dot + "-extended.dot", ext);
      out << "wrote " << *cmd.dot << "-comm.dot and " << *cmd.dot << "-extended.dot\n";
    } else {
      out << comm << ext;
    }
    out << "extended graph: " << net.extended.vertices.size() << " vertices, " << net.extended.edges.size()
        << " edges\n";
    return kExitOk;
  });
}

int cmd_synth(const SynthCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = load_problem(cmd.problem);
    const auto net = network_from(problem.file);
    const auto result = synthesize(net, problem.file, cmd.request);
    if (result.searched) out << "parameter search: " << result.candidates_tried << " candidates tried\n";
    if (result.status != SynthesisStatus::Feasible || !result.certificate) {
      out << to_string(result.status) << ": " << result.message << "\n";
      return kExitFailure;
    }
    const auto& cert = *result.certificate;
    out << "feasible at alpha " << cert.params.alpha << ", gamma " << cert.params.gamma << ", omega "
        << cert.params.omega << ", pi";
    for (double v : cert.params.pi) out << " " << v;
    out << "\n";
    GainsFile file{COOPEST_VERSION, hash_tag(problem.bytes), cert};
    write_file(cmd.gains_out, serialize_gains(file));
    out << "wrote " << cmd.gains_out << "\n";
    return kExitOk;
  });
}

int cmd_verify(const VerifyCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = load_problem(cmd.problem);
    const auto gains = parse_gains(read_file(cmd.gains));
    const auto net = network_from(problem.file);
    const std::string actual = hash_tag(problem.bytes);
    if (gains.input_hash != actual)
      err << "warning: gains were synthesized from a different problem file (hash " << gains.input_hash
          << ", expected " << actual << ")\n";
    auto v = verify_certificate(net, gains.certificate);
    v.report["input_hash_matches"] = gains.input_hash == actual;
    print_verify(v.report, out);
    if (cmd.report) write_file(*cmd.report, dump_json(v.report));
    out << "verification: " << verdict(v.passed) << "\n";
    return v.passed ? kExitOk : kExitFailure;
  });
}

int cmd_sim(const SimCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = load_problem(cmd.problem);
    const auto gains = parse_gains(read_file(cmd.gains));
    const auto scenario = parse_scenario(read_file(cmd.scenario));
    const auto net = network_from(problem.file);
    const auto sim = run_scenario(net, gains.certificate, scenario);
    if (cmd.csv) write_file(*cmd.csv, trace_csv(sim.trace, net));
    if (cmd.svg) write_file(*cmd.svg, trace_svg(sim.trace));
    if (cmd.report) write_file(*cmd.report, dump_json(sim.report));
    const auto& pr = sim.performance;
    out << "simulated " << sim.trace.steps << " steps of " << sim.trace.dt << "\n";
    out << "performance: lhs " << pr.lhs << ", rhs " << pr.rhs << " (initial term " << pr.initial_term << "), ratio "
        << pr.ratio << ": " << verdict(pr.passed) << "\n";
    return pr.passed ? kExitOk : kExitFailure;
  });
}

int cmd_demo(const DemoCommand& cmd, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    namespace fs = std::filesystem;
    const fs::path dir(cmd.out_dir);
    fs::create_directories(dir);
    const auto file = [&](const char* name) { return (dir / name).string(); };
    const std::string problem_bytes(embedded_example());
    const std::string scenario_bytes(embedded_demo_scenario());
    write_file(file("problem.json"), problem_bytes);
    write_file(file("scenario.json"), scenario_bytes);
    const ProblemFile problem = parse_problem(problem_bytes);
    const Scenario scenario = parse_scenario(scenario_bytes);

    const auto v = validate_problem(problem);
    write_file(file("validate-report.json"), dump_json(v.report));
    out << "[1/5] validate: " << verdict(v.passed) << "\n";
    if (!v.passed) {
      print_validation(v.report, out);
      return kExitFailure;
    }
    const auto net = network_from(problem);
    write_file(file("comm.dot"), export_dot(net.graph));
    write_file(file("extended.dot"), export_dot(net.extended));
    out << "[2/5] graph: extended graph with " << net.extended.vertices.size() << " vertices and "
        << net.extended.edges.size() << " edges\n";

    SynthRequest request;
    request.gamma = cmd.gamma;
    request.omega = cmd.omega;
    const auto synth = synthesize(net, problem, request);
    if (synth.status != SynthesisStatus::Feasible || !synth.certificate) {
      out << "[3/5] synth: " << to_string(synth.status) << ": " << synth.message << "\n";
      return kExitFailure;
    }
    const auto& cert = *synth.certificate;
    const GainsFile gains{COOPEST_VERSION, hash_tag(problem_bytes), cert};
    write_file(file("gains.json"), serialize_gains(gains));
    out << "[3/5] synth: feasible at gamma " << cert.params.gamma << ", omega " << cert.params.omega << ", alpha "
        << cert.params.alpha << ", pi";
    for (double p : cert.params.pi) out << " " << p;
    out << (synth.searched ? " (found by parameter search)\n" : "\n");

    const auto ver = verify_certificate(net, cert);
    write_file(file("verify-report.json"), dump_json(ver.report));
    out << "[4/5] verify: " << verdict(ver.passed) << "\n";
    print_verify(ver.report, out);

    const auto sim = run_scenario(net, cert, scenario);
    write_file(file("trace.csv"), trace_csv(sim.trace, net));
    write_file(file("trace.svg"), trace_svg(sim.trace));
    write_file(file("performance-report.json"), dump_json(sim.report));
    out << "[5/5] sim: " << sim.trace.steps << " steps, performance ratio " << sim.performance.ratio << ": "
        << verdict(sim.performance.passed) << "\n";
    Json finals = sim.report["final_error_norms"];
    out << "  final estimation error norms:";
    for (const auto& e : finals) out << " " << e.get<double>();
    out << "\n";
    const bool passed = ver.passed && sim.performance.passed;
    out << "demo: " << verdict(passed) << " (artifacts in " << dir.string() << ")\n";
    return passed ? kExitOk : kExitFailure;
  });
}

}  // namespace coopest
