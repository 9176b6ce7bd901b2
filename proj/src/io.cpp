#include "coopest/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace coopest {

namespace {

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::Parse, (where.empty() ? std::string("/") : where) + ": " + what);
}

Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("malformed JSON: ") + e.what());
  }
}

void require_object(const Json& node, const std::string& where) {
  if (!node.is_object()) schema_error(where, "expected an object");
}

void require_array(const Json& node, const std::string& where) {
  if (!node.is_array()) schema_error(where, "expected an array");
}

void allow_keys(const Json& node, const std::string& where, std::initializer_list<const char*> keys) {
  require_object(node, where);
  for (const auto& [key, value] : node.items()) {
    (void)value;
    if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; }))
      schema_error(where, "unknown key \"" + key + "\"");
  }
}

const Json& member(const Json& node, const std::string& where, const char* key) {
  if (!node.contains(key)) schema_error(where, std::string("missing key \"") + key + "\"");
  return node.at(key);
}

double number(const Json& node, const std::string& where) {
  if (!node.is_number()) schema_error(where, "expected a number");
  const double v = node.get<double>();
  if (!std::isfinite(v)) schema_error(where, "expected a finite number");
  return v;
}

long long integer(const Json& node, const std::string& where) {
  if (node.is_number_integer()) return node.get<long long>();
  if (node.is_number_float()) {
    const double v = node.get<double>();
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  schema_error(where, "expected an integer");
}

int index1(const Json& node, const std::string& where, int upper) {
  const long long v = integer(node, where);
  if (v < 1 || v > upper)
    schema_error(where, "index " + std::to_string(v) + " outside 1.." + std::to_string(upper));
  return static_cast<int>(v - 1);
}

std::string string_value(const Json& node, const std::string& where) {
  if (!node.is_string()) schema_error(where, "expected a string");
  return node.get<std::string>();
}

std::string child(const std::string& where, const std::string& key) { return where + "/" + key; }
std::string child(const std::string& where, std::size_t i) { return where + "/" + std::to_string(i); }

int estimator_key(const std::string& key, const std::string& where, int N) {
  int v = 0;
  std::size_t used = 0;
  try {
    v = std::stoi(key, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != key.size() || key.empty() || v < 1 || v > N)
    schema_error(where, "key \"" + key + "\" is not an estimator id in 1.." + std::to_string(N));
  return v - 1;
}

Json state_to_json(const StateIndex& s) { return Json::array({s.subsystem + 1, s.component + 1}); }

StateIndex state_from_json(const Json& node, const std::string& where,
                           const std::vector<SubsystemModel>& subsystems) {
  require_array(node, where);
  if (node.size() != 2) schema_error(where, "expected a [subsystem, component] pair");
  const int k = index1(node[0], child(where, 0), static_cast<int>(subsystems.size()));
  const int i = index1(node[1], child(where, 1), subsystems[k].states());
  return {k, i};
}

Json number_json(double v) { return Json(v); }

bool inline_node(const Json& node) {
  if (!node.is_array()) return !node.is_object();
  for (const auto& e : node)
    if (e.is_object() || (e.is_array() && !std::all_of(e.begin(), e.end(), [](const Json& x) {
                            return !x.is_structured();
                          })))
      return false;
  return true;
}

void write_json(std::string& out, const Json& node, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (node.is_object()) {
    if (node.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (const auto& [key, value] : node.items()) {
      if (!first) out += ",\n";
      first = false;
      out += inner + Json(key).dump() + ": ";
      write_json(out, value, indent + 1);
    }
    out += "\n" + pad + "}";
    return;
  }
  if (node.is_array()) {
    if (node.empty()) {
      out += "[]";
      return;
    }
    if (inline_node(node)) {
      const std::string flat = node.dump();
      if (flat.size() <= 100) {
        std::string spaced;
        spaced.reserve(flat.size() * 2);
        bool in_string = false;
        for (std::size_t i = 0; i < flat.size(); ++i) {
          const char c = flat[i];
          spaced += c;
          if (c == '"' && (i == 0 || flat[i - 1] != '\\')) in_string = !in_string;
          if (c == ',' && !in_string) spaced += ' ';
        }
        out += spaced;
        return;
      }
    }
    out += "[\n";
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (i > 0) out += ",\n";
      out += inner;
      write_json(out, node[i], indent + 1);
    }
    out += "\n" + pad + "]";
    return;
  }
  out += node.dump();
}

}  // namespace

std::string dump_json(const Json& node) {
  std::string out;
  write_json(out, node, 0);
  out += '\n';
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& node, const std::string& where, int expected_cols) {
  require_array(node, where);
  const auto rows = static_cast<Eigen::Index>(node.size());
  Eigen::Index cols = expected_cols >= 0 ? expected_cols : 0;
  if (rows > 0) {
    require_array(node[0], child(where, 0));
    cols = static_cast<Eigen::Index>(node[0].size());
  }
  if (expected_cols >= 0 && cols != expected_cols)
    schema_error(where, "expected " + std::to_string(expected_cols) + " columns, got " + std::to_string(cols));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row_where = child(where, static_cast<std::size_t>(i));
    const Json& row = node[static_cast<std::size_t>(i)];
    require_array(row, row_where);
    if (static_cast<Eigen::Index>(row.size()) != cols)
      schema_error(row_where, "ragged matrix: expected " + std::to_string(cols) + " entries");
    for (Eigen::Index j = 0; j < cols; ++j)
      m(i, j) = number(row[static_cast<std::size_t>(j)], child(row_where, static_cast<std::size_t>(j)));
  }
  return m;
}

ProblemFile parse_problem(const std::string& text) {
  const Json root = parse_text(text);
  const std::string top;
  allow_keys(root, top,
             {"name", "description", "subsystems", "state_couplings", "output_couplings", "partitions",
              "assignment", "comm_edges", "params", "rank_tolerance"});
  ProblemFile p;
  if (root.contains("name")) p.name = string_value(root["name"], "/name");
  if (root.contains("description")) p.description = string_value(root["description"], "/description");

  const Json& subs = member(root, top, "subsystems");
  require_array(subs, "/subsystems");
  const int N = static_cast<int>(subs.size());
  std::vector<std::optional<SubsystemModel>> slots(N);
  for (std::size_t s = 0; s < subs.size(); ++s) {
    const auto where = child("/subsystems", s);
    allow_keys(subs[s], where, {"id", "A", "B", "C"});
    const int id = index1(member(subs[s], where, "id"), child(where, "id"), N);
    if (slots[id]) schema_error(child(where, "id"), "duplicate subsystem id " + std::to_string(id + 1));
    SubsystemModel m;
    m.A = matrix_from_json(member(subs[s], where, "A"), child(where, "A"));
    const int n = static_cast<int>(m.A.rows());
    m.B = matrix_from_json(member(subs[s], where, "B"), child(where, "B"));
    if (m.B.rows() == 0 && n > 0) schema_error(child(where, "B"), "expected " + std::to_string(n) + " rows");
    m.C = matrix_from_json(member(subs[s], where, "C"), child(where, "C"), n);
    slots[id] = std::move(m);
  }
  for (auto& s : slots) p.subsystems.push_back(std::move(*s));

  const auto couplings = [&](const char* key, CouplingKind kind) {
    if (!root.contains(key)) return;
    const std::string where = std::string("/") + key;
    const Json& list = root[key];
    require_array(list, where);
    for (std::size_t c = 0; c < list.size(); ++c) {
      const auto w = child(where, c);
      allow_keys(list[c], w, {"from", "to", "matrix"});
      CouplingBlock b;
      b.kind = kind;
      b.from = index1(member(list[c], w, "from"), child(w, "from"), N);
      b.to = index1(member(list[c], w, "to"), child(w, "to"), N);
      const int cols = p.subsystems[b.from].states();
      b.M = matrix_from_json(member(list[c], w, "matrix"), child(w, "matrix"), cols);
      p.couplings.push_back(std::move(b));
    }
  };
  couplings("state_couplings", CouplingKind::State);
  couplings("output_couplings", CouplingKind::Output);

  const Json& parts = member(root, top, "partitions");
  require_object(parts, "/partitions");
  std::vector<std::optional<std::vector<StateIndex>>> part_slots(N);
  for (const auto& [key, value] : parts.items()) {
    const auto where = child("/partitions", key);
    const int k = estimator_key(key, where, N);
    require_array(value, where);
    std::vector<StateIndex> image;
    for (std::size_t i = 0; i < value.size(); ++i)
      image.push_back(state_from_json(value[i], child(where, i), p.subsystems));
    part_slots[k] = std::move(image);
  }
  for (int k = 0; k < N; ++k) {
    if (!part_slots[k]) schema_error("/partitions", "missing partition for estimator " + std::to_string(k + 1));
    p.partitions.push_back(std::move(*part_slots[k]));
  }

  if (root.contains("assignment")) {
    const Json& list = root["assignment"];
    require_array(list, "/assignment");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto where = child("/assignment", i);
      allow_keys(list[i], where, {"state", "estimator"});
      const StateIndex s = state_from_json(member(list[i], where, "state"), child(where, "state"), p.subsystems);
      const Json& e = member(list[i], where, "estimator");
      std::optional<int> est;
      if (!e.is_null()) est = index1(e, child(where, "estimator"), N);
      p.assignment.emplace_back(s, est);
    }
  }

  const Json& edges = member(root, top, "comm_edges");
  require_array(edges, "/comm_edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto where = child("/comm_edges", i);
    require_array(edges[i], where);
    if (edges[i].size() != 2) schema_error(where, "expected a [from, to] pair");
    p.comm_edges.emplace_back(index1(edges[i][0], child(where, 0), N), index1(edges[i][1], child(where, 1), N));
  }

  if (root.contains("params")) {
    const Json& prm = root["params"];
    allow_keys(prm, "/params", {"alpha", "pi", "gamma", "omega", "W", "strictness"});
    auto& q = p.params;
    if (prm.contains("alpha")) q.alpha = number(prm["alpha"], "/params/alpha");
    if (prm.contains("gamma")) q.gamma = number(prm["gamma"], "/params/gamma");
    if (prm.contains("omega")) q.omega = number(prm["omega"], "/params/omega");
    if (prm.contains("strictness")) q.strictness = number(prm["strictness"], "/params/strictness");
    if (prm.contains("pi")) {
      const Json& pi = prm["pi"];
      if (pi.is_number()) {
        q.pi_all = number(pi, "/params/pi");
      } else if (pi.is_object()) {
        for (const auto& [key, value] : pi.items()) {
          const auto where = child("/params/pi", key);
          q.pi_each[estimator_key(key, where, N)] = number(value, where);
        }
      } else {
        schema_error("/params/pi", "expected a number or an object keyed by estimator id");
      }
    }
    if (prm.contains("W")) {
      const Json& W = prm["W"];
      if (W.is_string()) {
        if (W.get<std::string>() != "identity") schema_error("/params/W", "the only named weight is \"identity\"");
        q.W_identity = true;
      } else if (W.is_object()) {
        for (const auto& [key, value] : W.items()) {
          const auto where = child("/params/W", key);
          const int k = estimator_key(key, where, N);
          const int s = static_cast<int>(p.partitions[k].size());
          Matrix m = matrix_from_json(value, where, s);
          if (m.rows() != s) schema_error(where, "expected a " + std::to_string(s) + "x" + std::to_string(s) + " matrix");
          q.W_each[k] = std::move(m);
        }
      } else {
        schema_error("/params/W", "expected \"identity\" or an object keyed by estimator id");
      }
    }
  }
  if (root.contains("rank_tolerance")) {
    const double t = number(root["rank_tolerance"], "/rank_tolerance");
    if (!(t > 0.0)) schema_error("/rank_tolerance", "must be positive");
    p.rank_tolerance = t;
  }
  return p;
}

std::string serialize_problem(const ProblemFile& p) {
  Json root = Json::object();
  if (!p.name.empty()) root["name"] = p.name;
  if (!p.description.empty()) root["description"] = p.description;
  Json subs = Json::array();
  for (std::size_t k = 0; k < p.subsystems.size(); ++k) {
    Json s = Json::object();
    s["id"] = static_cast<int>(k + 1);
    s["A"] = matrix_to_json(p.subsystems[k].A);
    s["B"] = matrix_to_json(p.subsystems[k].B);
    s["C"] = matrix_to_json(p.subsystems[k].C);
    subs.push_back(std::move(s));
  }
  root["subsystems"] = std::move(subs);
  for (const auto kind : {CouplingKind::State, CouplingKind::Output}) {
    Json list = Json::array();
    for (const auto& b : p.couplings) {
      if (b.kind != kind) continue;
      Json e = Json::object();
      e["from"] = b.from + 1;
      e["to"] = b.to + 1;
      e["matrix"] = matrix_to_json(b.M);
      list.push_back(std::move(e));
    }
    if (!list.empty()) root[kind == CouplingKind::State ? "state_couplings" : "output_couplings"] = std::move(list);
  }
  Json parts = Json::object();
  for (std::size_t k = 0; k < p.partitions.size(); ++k) {
    Json image = Json::array();
    for (const auto& s : p.partitions[k]) image.push_back(state_to_json(s));
    parts[std::to_string(k + 1)] = std::move(image);
  }
  root["partitions"] = std::move(parts);
  if (!p.assignment.empty()) {
    Json list = Json::array();
    for (const auto& [s, e] : p.assignment) {
      Json item = Json::object();
      item["state"] = state_to_json(s);
      item["estimator"] = e ? Json(*e + 1) : Json(nullptr);
      list.push_back(std::move(item));
    }
    root["assignment"] = std::move(list);
  }
  Json edges = Json::array();
  for (const auto& [a, b] : p.comm_edges) edges.push_back(Json::array({a + 1, b + 1}));
  root["comm_edges"] = std::move(edges);
  const auto& q = p.params;
  Json prm = Json::object();
  if (q.alpha) prm["alpha"] = *q.alpha;
  if (q.pi_all) {
    prm["pi"] = *q.pi_all;
  } else if (!q.pi_each.empty()) {
    Json pi = Json::object();
    for (const auto& [k, v] : q.pi_each) pi[std::to_string(k + 1)] = v;
    prm["pi"] = std::move(pi);
  }
  if (q.gamma) prm["gamma"] = *q.gamma;
  if (q.omega) prm["omega"] = *q.omega;
  if (q.W_identity) {
    prm["W"] = "identity";
  } else if (!q.W_each.empty()) {
    Json W = Json::object();
    for (const auto& [k, m] : q.W_each) W[std::to_string(k + 1)] = matrix_to_json(m);
    prm["W"] = std::move(W);
  }
  if (q.strictness) prm["strictness"] = *q.strictness;
  if (!prm.empty()) root["params"] = std::move(prm);
  if (p.rank_tolerance) root["rank_tolerance"] = *p.rank_tolerance;
  return dump_json(root);
}

InterconnectedSystem build_system(const ProblemFile& problem) {
  return assemble_global(problem.subsystems, problem.couplings);
}

ProblemInstance instantiate(const ProblemFile& problem) {
  ProblemInstance inst;
  inst.system = build_system(problem);
  const int N = inst.system.subsystem_count();
  for (int k = 0; k < N; ++k) inst.selections.emplace_back(k, problem.partitions.at(k), inst.system.index);
  inst.assignment = default_assignment(inst.system.index, inst.selections);
  for (const auto& [s, e] : problem.assignment) inst.assignment.assign(s, e);
  inst.graph = CommGraph(N, problem.comm_edges);
  if (problem.rank_tolerance) inst.rank.absolute_tolerance = *problem.rank_tolerance;
  return inst;
}

SynthesisParams synthesis_params(const ProblemParams& q, const EstimatorNetwork& net) {
  const int N = net.estimators();
  SynthesisParams out;
  if (q.alpha) out.alpha = *q.alpha;
  if (q.gamma) out.gamma = *q.gamma;
  if (q.omega) out.omega = *q.omega;
  out.strictness = q.strictness;
  if (q.pi_all) {
    out.pi.assign(N, *q.pi_all);
  } else if (!q.pi_each.empty()) {
    out.pi.assign(N, 1.0);
    for (const auto& [k, v] : q.pi_each) out.pi.at(k) = v;
  }
  if (!q.W_each.empty()) {
    for (int k = 0; k < N; ++k) {
      const int s = net.reps[k].sigma();
      const auto it = q.W_each.find(k);
      out.W.push_back(it != q.W_each.end() ? it->second : Matrix::Identity(s, s));
    }
  }
  return out;
}

GainsFile parse_gains(const std::string& text) {
  const Json root = parse_text(text);
  allow_keys(root, "", {"format", "version", "input_hash", "params", "estimators"});
  if (string_value(member(root, "", "format"), "/format") != "coopest-gains")
    schema_error("/format", "expected \"coopest-gains\"");
  GainsFile g;
  g.version = string_value(member(root, "", "version"), "/version");
  g.input_hash = string_value(member(root, "", "input_hash"), "/input_hash");
  const Json& ests = member(root, "", "estimators");
  require_array(ests, "/estimators");
  const int N = static_cast<int>(ests.size());
  auto& cert = g.certificate;
  for (int k = 0; k < N; ++k) {
    const auto where = child("/estimators", static_cast<std::size_t>(k));
    const Json& e = ests[static_cast<std::size_t>(k)];
    allow_keys(e, where, {"id", "P", "G", "F", "L", "K", "margin", "p_margin"});
    if (index1(member(e, where, "id"), child(where, "id"), N) != k)
      schema_error(child(where, "id"), "estimators must be listed in id order");
    EstimatorGains gk;
    gk.P = matrix_from_json(member(e, where, "P"), child(where, "P"));
    const int s = static_cast<int>(gk.P.rows());
    if (gk.P.cols() != s) schema_error(child(where, "P"), "expected a square matrix");
    gk.G = matrix_from_json(member(e, where, "G"), child(where, "G"));
    gk.F = matrix_from_json(member(e, where, "F"), child(where, "F"), s);
    gk.L = matrix_from_json(member(e, where, "L"), child(where, "L"));
    gk.K = matrix_from_json(member(e, where, "K"), child(where, "K"), s);
    for (const auto& [name, m] : {std::pair{"G", &gk.G}, std::pair{"F", &gk.F}, std::pair{"L", &gk.L},
                                  std::pair{"K", &gk.K}})
      if (m->rows() != s) schema_error(child(where, name), "expected " + std::to_string(s) + " rows");
    if (gk.L.cols() != gk.G.cols()) schema_error(child(where, "L"), "L and G must have the same shape");
    cert.gains.push_back(std::move(gk));
    cert.margins.push_back(number(member(e, where, "margin"), child(where, "margin")));
    cert.p_margins.push_back(number(member(e, where, "p_margin"), child(where, "p_margin")));
  }
  const Json& prm = member(root, "", "params");
  allow_keys(prm, "/params", {"alpha", "pi", "gamma", "omega", "W", "strictness"});
  auto& q = cert.params;
  q.alpha = number(member(prm, "/params", "alpha"), "/params/alpha");
  q.gamma = number(member(prm, "/params", "gamma"), "/params/gamma");
  q.omega = number(member(prm, "/params", "omega"), "/params/omega");
  q.strictness = number(member(prm, "/params", "strictness"), "/params/strictness");
  const Json& pi = member(prm, "/params", "pi");
  require_array(pi, "/params/pi");
  if (static_cast<int>(pi.size()) != N) schema_error("/params/pi", "expected one entry per estimator");
  for (std::size_t k = 0; k < pi.size(); ++k) q.pi.push_back(number(pi[k], child("/params/pi", k)));
  const Json& W = member(prm, "/params", "W");
  require_array(W, "/params/W");
  if (static_cast<int>(W.size()) != N) schema_error("/params/W", "expected one matrix per estimator");
  for (int k = 0; k < N; ++k) {
    const int s = static_cast<int>(cert.gains[k].P.rows());
    q.W.push_back(matrix_from_json(W[static_cast<std::size_t>(k)], child("/params/W", static_cast<std::size_t>(k)), s));
  }
  return g;
}

std::string serialize_gains(const GainsFile& g) {
  const auto& cert = g.certificate;
  const auto& q = cert.params;
  Json root = Json::object();
  root["format"] = "coopest-gains";
  root["version"] = g.version;
  root["input_hash"] = g.input_hash;
  Json prm = Json::object();
  prm["alpha"] = q.alpha;
  prm["pi"] = q.pi;
  prm["gamma"] = q.gamma;
  prm["omega"] = q.omega;
  Json W = Json::array();
  for (const auto& m : q.W) W.push_back(matrix_to_json(m));
  prm["W"] = std::move(W);
  prm["strictness"] = q.strictness.value_or(0.0);
  root["params"] = std::move(prm);
  Json ests = Json::array();
  for (std::size_t k = 0; k < cert.gains.size(); ++k) {
    const auto& gk = cert.gains[k];
    Json e = Json::object();
    e["id"] = static_cast<int>(k + 1);
    e["P"] = matrix_to_json(gk.P);
    e["G"] = matrix_to_json(gk.G);
    e["F"] = matrix_to_json(gk.F);
    e["L"] = matrix_to_json(gk.L);
    e["K"] = matrix_to_json(gk.K);
    e["margin"] = k < cert.margins.size() ? cert.margins[k] : 0.0;
    e["p_margin"] = k < cert.p_margins.size() ? cert.p_margins[k] : 0.0;
    ests.push_back(std::move(e));
  }
  root["estimators"] = std::move(ests);
  return dump_json(root);
}

namespace {

const std::pair<const char*, DisturbanceKind> kKinds[] = {{"zero", DisturbanceKind::Zero},
                                                          {"sinusoid", DisturbanceKind::Sinusoid},
                                                          {"pulse", DisturbanceKind::Pulse},
                                                          {"filtered_noise", DisturbanceKind::FilteredNoise}};

}  // namespace

Scenario parse_scenario(const std::string& text) {
  const Json root = parse_text(text);
  allow_keys(root, "", {"horizon", "initial_state", "dt", "record_stride", "disturbances"});
  Scenario sc;
  sc.horizon = number(member(root, "", "horizon"), "/horizon");
  if (!(sc.horizon > 0.0)) schema_error("/horizon", "must be positive");
  if (root.contains("initial_state")) {
    const Json& x = root["initial_state"];
    require_array(x, "/initial_state");
    Vector v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(x[i], child("/initial_state", i));
    sc.initial_state = std::move(v);
  }
  if (root.contains("dt")) {
    sc.dt = number(root["dt"], "/dt");
    if (!(*sc.dt > 0.0)) schema_error("/dt", "must be positive");
  }
  if (root.contains("record_stride")) {
    const long long s = integer(root["record_stride"], "/record_stride");
    if (s < 1) schema_error("/record_stride", "must be at least 1");
    sc.record_stride = static_cast<int>(s);
  }
  if (root.contains("disturbances")) {
    const Json& list = root["disturbances"];
    require_array(list, "/disturbances");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto where = child("/disturbances", i);
      const Json& d = list[i];
      allow_keys(d, where,
                 {"target", "estimator", "channel", "kind", "amplitude", "frequency", "phase", "start", "width",
                  "seed", "bandwidth", "duration"});
      DisturbanceSpec s;
      const std::string target = string_value(member(d, where, "target"), child(where, "target"));
      if (target == "v") {
        s.target = DisturbanceTarget::V;
        if (d.contains("estimator")) schema_error(child(where, "estimator"), "only measurement noise names an estimator");
      } else if (target == "eta") {
        s.target = DisturbanceTarget::Eta;
        const long long e = integer(member(d, where, "estimator"), child(where, "estimator"));
        if (e < 1) schema_error(child(where, "estimator"), "estimator ids start at 1");
        s.estimator = static_cast<int>(e - 1);
      } else {
        schema_error(child(where, "target"), "expected \"v\" or \"eta\"");
      }
      const long long ch = integer(member(d, where, "channel"), child(where, "channel"));
      if (ch < 1) schema_error(child(where, "channel"), "channels start at 1");
      s.channel = static_cast<int>(ch - 1);
      const std::string kind = string_value(member(d, where, "kind"), child(where, "kind"));
      const auto* it = std::find_if(std::begin(kKinds), std::end(kKinds), [&](const auto& p) { return kind == p.first; });
      if (it == std::end(kKinds)) schema_error(child(where, "kind"), "unknown disturbance kind \"" + kind + "\"");
      s.kind = it->second;
      const auto opt = [&](const char* key, double& field) {
        if (d.contains(key)) field = number(d[key], child(where, key));
      };
      opt("amplitude", s.amplitude);
      opt("frequency", s.frequency);
      opt("phase", s.phase);
      opt("start", s.start);
      opt("width", s.width);
      opt("bandwidth", s.bandwidth);
      s.duration = sc.horizon;
      opt("duration", s.duration);
      if (d.contains("seed")) {
        const long long seed = integer(d["seed"], child(where, "seed"));
        if (seed < 0) schema_error(child(where, "seed"), "must be non-negative");
        s.seed = static_cast<std::uint64_t>(seed);
      }
      sc.disturbances.push_back(s);
    }
  }
  return sc;
}

std::string serialize_scenario(const Scenario& sc) {
  Json root = Json::object();
  root["horizon"] = sc.horizon;
  if (sc.initial_state) {
    Json x = Json::array();
    for (Eigen::Index i = 0; i < sc.initial_state->size(); ++i) x.push_back((*sc.initial_state)(i));
    root["initial_state"] = std::move(x);
  }
  if (sc.dt) root["dt"] = *sc.dt;
  if (sc.record_stride != 1) root["record_stride"] = sc.record_stride;
  Json list = Json::array();
  for (const auto& s : sc.disturbances) {
    Json d = Json::object();
    d["target"] = s.target == DisturbanceTarget::V ? "v" : "eta";
    if (s.target == DisturbanceTarget::Eta) d["estimator"] = s.estimator + 1;
    d["channel"] = s.channel + 1;
    for (const auto& [name, kind] : kKinds)
      if (kind == s.kind) d["kind"] = name;
    switch (s.kind) {
      case DisturbanceKind::Zero: break;
      case DisturbanceKind::Sinusoid:
        d["amplitude"] = s.amplitude;
        d["frequency"] = s.frequency;
        d["phase"] = s.phase;
        break;
      case DisturbanceKind::Pulse:
        d["amplitude"] = s.amplitude;
        d["start"] = s.start;
        d["width"] = s.width;
        break;
      case DisturbanceKind::FilteredNoise:
        d["amplitude"] = s.amplitude;
        d["seed"] = s.seed;
        d["bandwidth"] = s.bandwidth;
        d["duration"] = s.duration;
        break;
    }
    list.push_back(std::move(d));
  }
  root["disturbances"] = std::move(list);
  return dump_json(root);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Numerical, "SHA-256 computation failed");
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) out << std::setw(2) << static_cast<int>(digest[i]);
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Parse, "cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Parse, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Parse, "failed writing " + path);
}

}  // namespace coopest
