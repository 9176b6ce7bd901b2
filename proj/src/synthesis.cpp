#include "coopest/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

namespace coopest {

EstimatorNetwork make_network(InterconnectedSystem system,
                              std::vector<SelectionFunction> selections,
                              AssignmentFunction assignment, CommGraph graph) {
  const int N = system.subsystem_count();
  if (static_cast<int>(selections.size()) != N)
    throw Error(ErrorKind::Validation, "expected " + std::to_string(N) + " estimators, got " +
                                           std::to_string(selections.size()));
  if (graph.vertices() != N)
    throw Error(ErrorKind::Validation, "communication graph has " +
                                           std::to_string(graph.vertices()) + " vertices, expected " +
                                           std::to_string(N));
  for (int k = 0; k < N; ++k)
    if (selections[k].owner() != k)
      throw Error(ErrorKind::Validation, "selection " + std::to_string(k + 1) +
                                             " belongs to estimator " +
                                             std::to_string(selections[k].owner() + 1));
  EstimatorNetwork net;
  net.extended = build_extended_graph(system, selections, assignment, graph);
  for (int k = 0; k < N; ++k) net.reps.push_back(repartition(system, selections, k));
  net.system = std::move(system);
  net.selections = std::move(selections);
  net.assignment = std::move(assignment);
  net.graph = std::move(graph);
  return net;
}

SynthesisParams resolve_params(const SynthesisParams& params, const EstimatorNetwork& net) {
  const int N = net.estimators();
  SynthesisParams out = params;
  const auto positive = [](double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorKind::Validation, name + " must be a positive finite number");
  };
  positive(out.alpha, "alpha");
  positive(out.gamma, "gamma");
  positive(out.omega, "omega");
  if (out.pi.empty()) out.pi.assign(N, 1.0);
  if (static_cast<int>(out.pi.size()) != N)
    throw Error(ErrorKind::Dimension, "pi has " + std::to_string(out.pi.size()) +
                                          " entries, expected " + std::to_string(N));
  for (int k = 0; k < N; ++k) positive(out.pi[k], "pi of estimator " + std::to_string(k + 1));
  if (out.W.empty())
    for (int k = 0; k < N; ++k) out.W.push_back(Matrix::Identity(net.reps[k].sigma(), net.reps[k].sigma()));
  if (static_cast<int>(out.W.size()) != N)
    throw Error(ErrorKind::Dimension, "W has " + std::to_string(out.W.size()) +
                                          " entries, expected " + std::to_string(N));
  for (int k = 0; k < N; ++k) {
    const int s = net.reps[k].sigma();
    const Matrix& W = out.W[k];
    if (W.rows() != s || W.cols() != s)
      throw Error(ErrorKind::Dimension, "W of estimator " + std::to_string(k + 1) + " must be " +
                                            std::to_string(s) + "x" + std::to_string(s));
    if (s == 0) continue;
    const double scale = std::max(1.0, W.cwiseAbs().maxCoeff());
    if ((W - W.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw Error(ErrorKind::Validation, "W of estimator " + std::to_string(k + 1) + " is not symmetric");
    if (min_symmetric_eigenvalue(W) < -1e-12 * scale)
      throw Error(ErrorKind::Validation,
                  "W of estimator " + std::to_string(k + 1) + " is not positive semidefinite");
  }
  if (!out.strictness) out.strictness = 1e-6 * std::max(1.0, net.system.A.norm());
  positive(*out.strictness, "strictness");
  return out;
}

std::vector<int> LmiStructure::block_widths() const {
  std::vector<int> w{sigma, outputs, disturbances};
  if (!external.empty()) w.push_back(static_cast<int>(external.size()));
  for (const auto& o : overlaps) w.push_back(static_cast<int>(o.shared.size()));
  return w;
}

int LmiStructure::size() const {
  int n = sigma + outputs + disturbances + static_cast<int>(external.size());
  for (const auto& o : overlaps) n += static_cast<int>(o.shared.size());
  return n;
}

LmiStructure lmi_structure(const EstimatorNetwork& net, int k) {
  const auto& rep = net.reps.at(k);
  const auto& sel = net.selections.at(k);
  LmiStructure s;
  s.estimator = k;
  s.sigma = rep.sigma();
  s.outputs = static_cast<int>(rep.C.rows());
  s.disturbances = static_cast<int>(rep.B.cols());
  s.N = Matrix::Zero(s.sigma, s.sigma);
  for (int i = 0; i < s.sigma; ++i) s.q.push_back(net.extended.q({k, sel.at(i)}));
  for (const auto& lambda : rep.external) {
    const auto owner = net.assignment(lambda);
    if (!owner)
      throw Error(ErrorKind::Precondition, "state " + to_string(lambda) + " couples into estimator " +
                                               std::to_string(k + 1) + " but is not assigned");
    s.external.push_back({lambda, *owner, *net.selections.at(*owner).position(lambda)});
  }
  for (int j : net.graph.neighbors(k)) {
    NeighborOverlap o;
    o.neighbor = j;
    for (int i = 0; i < s.sigma; ++i) {
      const auto pos = net.selections[j].position(sel.at(i));
      if (!pos) continue;
      o.shared.push_back({sel.at(i), i, *pos});
      s.N(i, i) += 1.0;
    }
    if (!o.shared.empty()) s.overlaps.push_back(std::move(o));
  }
  for (int i = 0; i < s.sigma; ++i)
    if (s.N(i, i) > 0.0) s.fusion_positions.push_back(i);
  return s;
}

VariableLayout::VariableLayout(const std::vector<LmiStructure>& structures) {
  for (const auto& s : structures) {
    sigma_.push_back(s.sigma);
    outputs_.push_back(s.outputs);
    p_offset_.push_back(dimension_);
    dimension_ += s.sigma * (s.sigma + 1) / 2;
    g_offset_.push_back(dimension_);
    dimension_ += s.sigma * s.outputs;
    f_offset_.push_back(dimension_);
    std::vector<int> column(s.sigma, -1);
    for (std::size_t c = 0; c < s.fusion_positions.size(); ++c)
      column[s.fusion_positions[c]] = static_cast<int>(c);
    fusion_column_.push_back(std::move(column));
    dimension_ += s.sigma * static_cast<int>(s.fusion_positions.size());
  }
}

int VariableLayout::add_scalar() { return dimension_++; }

int VariableLayout::p(int k, int i, int j) const {
  if (i > j) std::swap(i, j);
  const int s = sigma_.at(k);
  return p_offset_[k] + i * s - i * (i - 1) / 2 + (j - i);
}

int VariableLayout::g(int k, int row, int col) const { return g_offset_.at(k) + col * sigma_[k] + row; }

int VariableLayout::f(int k, int row, int position) const {
  const int c = fusion_column_.at(k).at(position);
  if (c < 0)
    throw Error(ErrorKind::Precondition, "position " + std::to_string(position + 1) +
                                             " of estimator " + std::to_string(k + 1) +
                                             " carries no fusion gain");
  return f_offset_[k] + c * sigma_[k] + row;
}

int VariableLayout::p_count(int k) const { return sigma_.at(k) * (sigma_[k] + 1) / 2; }
int VariableLayout::g_count(int k) const { return sigma_.at(k) * outputs_.at(k); }
int VariableLayout::f_count(int k) const {
  return static_cast<int>(std::count_if(fusion_column_.at(k).begin(), fusion_column_[k].end(),
                                        [](int c) { return c >= 0; })) *
         sigma_[k];
}

namespace {

class BlockBuilder {
 public:
  explicit BlockBuilder(int size) : size_(size) {}

  Matrix& coeff(int var) {
    auto it = terms_.find(var);
    if (it == terms_.end()) it = terms_.emplace(var, Matrix::Zero(size_, size_)).first;
    return it->second;
  }
  // Adds v at (r, c) of X + X^T, i.e. to both (r, c) and (c, r).
  void add_sym(int var, int r, int c, double v) {
    if (v == 0.0) return;
    Matrix& m = coeff(var);
    m(r, c) += v;
    m(c, r) += v;
  }
  void add(int var, int r, int c, double v) {
    if (v == 0.0) return;
    coeff(var)(r, c) += v;
  }

  LmiBlock finish(std::string label, Matrix constant) {
    LmiBlock b;
    b.label = std::move(label);
    b.constant = std::move(constant);
    for (auto& [var, m] : terms_) b.terms.emplace_back(var, std::move(m));
    return b;
  }

 private:
  int size_;
  std::map<int, Matrix> terms_;
};

// Adds E * X + (E * X)^T at rows of block 1 and columns starting at col0,
// where E is the symmetric basis matrix of P(i, j).
void add_p_product(BlockBuilder& b, int var, int i, int j, const Matrix& X, int col0) {
  for (int c = 0; c < X.cols(); ++c) {
    b.add_sym(var, i, col0 + c, X(j, c));
    if (i != j) b.add_sym(var, j, col0 + c, X(i, c));
  }
}

}  // namespace

AssembledLmi assemble_lmi(const EstimatorNetwork& net, const LmiStructure& st,
                          const VariableLayout& layout, const SynthesisParams& params,
                          const PerformanceVariables& perf) {
  const int k = st.estimator;
  const auto& rep = net.reps.at(k);
  const int sigma = st.sigma;
  const int r = st.outputs;
  const int m = st.disturbances;
  const int o2 = sigma;
  const int o3 = o2 + r;
  const int o4 = o3 + m;
  const int D = st.size();
  const double eps = params.strictness.value_or(0.0);
  const double pik = params.pi.at(k);

  BlockBuilder b(D);
  for (int i = 0; i < sigma; ++i) {
    for (int j = i; j < sigma; ++j) {
      const int var = layout.p(k, i, j);
      add_p_product(b, var, i, j, rep.A, 0);
      if (i == j) {
        b.add(var, i, i, params.alpha + pik * st.q[i]);
      } else {
        b.add_sym(var, i, j, params.alpha);
      }
      add_p_product(b, var, i, j, rep.B, o3);
      add_p_product(b, var, i, j, rep.coupling, o4);
    }
  }
  for (int a = 0; a < sigma; ++a) {
    for (int c = 0; c < r; ++c) {
      const int var = layout.g(k, a, c);
      for (int col = 0; col < sigma; ++col) b.add_sym(var, a, col, -rep.C(c, col));
      b.add_sym(var, a, o2 + c, -1.0);
    }
  }
  for (int pos : st.fusion_positions) {
    for (int a = 0; a < sigma; ++a) {
      const int var = layout.f(k, a, pos);
      b.add_sym(var, a, pos, -st.N(pos, pos));
      int off = o4 + static_cast<int>(st.external.size());
      for (const auto& o : st.overlaps) {
        for (std::size_t u = 0; u < o.shared.size(); ++u)
          if (o.shared[u].position == pos) b.add_sym(var, a, off + static_cast<int>(u), 1.0);
        off += static_cast<int>(o.shared.size());
      }
    }
  }
  for (std::size_t t = 0; t < st.external.size(); ++t) {
    const auto& ref = st.external[t];
    const int idx = o4 + static_cast<int>(t);
    b.add(layout.p(ref.estimator, ref.position, ref.position), idx, idx, -params.pi.at(ref.estimator));
  }
  {
    int off = o4 + static_cast<int>(st.external.size());
    for (const auto& o : st.overlaps) {
      for (std::size_t u = 0; u < o.shared.size(); ++u) {
        const int idx = off + static_cast<int>(u);
        const int pos = o.shared[u].neighbor_position;
        b.add(layout.p(o.neighbor, pos, pos), idx, idx, -params.pi.at(o.neighbor));
      }
      off += static_cast<int>(o.shared.size());
    }
  }

  Matrix constant = eps * Matrix::Identity(D, D);
  constant.topLeftCorner(sigma, sigma) += params.W.at(k);
  for (int c = 0; c < r; ++c) {
    if (perf.gamma_squared)
      b.add(*perf.gamma_squared, o2 + c, o2 + c, -1.0);
    else
      constant(o2 + c, o2 + c) -= params.gamma * params.gamma;
  }
  for (int c = 0; c < m; ++c) {
    if (perf.omega_squared)
      b.add(*perf.omega_squared, o3 + c, o3 + c, -1.0);
    else
      constant(o3 + c, o3 + c) -= params.omega * params.omega;
  }

  AssembledLmi out;
  out.estimator = k;
  out.widths = st.block_widths();
  out.block = b.finish("lmi_" + std::to_string(k + 1), std::move(constant));
  return out;
}

LmiBlock positivity_block(int k, int sigma, const VariableLayout& layout, double shift,
                          std::optional<int> shift_variable) {
  BlockBuilder b(sigma);
  for (int i = 0; i < sigma; ++i) {
    for (int j = i; j < sigma; ++j) {
      if (i == j)
        b.add(layout.p(k, i, j), i, i, -1.0);
      else
        b.add_sym(layout.p(k, i, j), i, j, -1.0);
    }
    if (shift_variable) b.add(*shift_variable, i, i, 1.0);
  }
  return b.finish("p_" + std::to_string(k + 1), shift * Matrix::Identity(sigma, sigma));
}

void extract_gains(EstimatorGains& gains) {
  const int s = static_cast<int>(gains.P.rows());
  if (s == 0) {
    gains.L = Matrix::Zero(0, gains.G.cols());
    gains.K = Matrix::Zero(0, 0);
    return;
  }
  Eigen::LLT<Matrix> llt(0.5 * (gains.P + gains.P.transpose()));
  if (llt.info() != Eigen::Success || !gains.P.allFinite())
    throw Error(ErrorKind::Numerical, "P is not positive definite; gains cannot be extracted");
  gains.L = llt.solve(gains.G);
  gains.K = llt.solve(gains.F);
}

std::vector<EstimatorGains> unpack(const Vector& x, const std::vector<LmiStructure>& structures,
                                   const VariableLayout& layout) {
  std::vector<EstimatorGains> out;
  for (const auto& st : structures) {
    const int k = st.estimator;
    EstimatorGains g;
    g.P = Matrix::Zero(st.sigma, st.sigma);
    for (int i = 0; i < st.sigma; ++i)
      for (int j = i; j < st.sigma; ++j) g.P(i, j) = g.P(j, i) = x(layout.p(k, i, j));
    g.G = Matrix::Zero(st.sigma, st.outputs);
    for (int a = 0; a < st.sigma; ++a)
      for (int c = 0; c < st.outputs; ++c) g.G(a, c) = x(layout.g(k, a, c));
    g.F = Matrix::Zero(st.sigma, st.sigma);
    for (int pos : st.fusion_positions)
      for (int a = 0; a < st.sigma; ++a) g.F(a, pos) = x(layout.f(k, a, pos));
    extract_gains(g);
    out.push_back(std::move(g));
  }
  return out;
}

std::string to_string(SynthesisStatus status) {
  switch (status) {
    case SynthesisStatus::Feasible: return "feasible";
    case SynthesisStatus::Infeasible: return "infeasible";
    case SynthesisStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

struct JointProblem {
  std::vector<LmiStructure> structures;
  VariableLayout layout;
  std::vector<AssembledLmi> lmis;
};

JointProblem assemble_joint(const EstimatorNetwork& net, const SynthesisParams& params,
                            const PerformanceVariables& perf = {}, int extra_scalars = 0) {
  JointProblem jp;
  const int N = net.estimators();
  for (int k = 0; k < N; ++k) jp.structures.push_back(lmi_structure(net, k));
  jp.layout = VariableLayout(jp.structures);
  for (int i = 0; i < extra_scalars; ++i) jp.layout.add_scalar();
  jp.lmis.resize(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
    jp.lmis[k] = assemble_lmi(net, jp.structures[k], jp.layout, params, perf);
  });
  return jp;
}

ConicProblem base_problem(const JointProblem& jp, const SynthesisParams& params) {
  ConicProblem p;
  p.dimension = jp.layout.dimension();
  for (const auto& l : jp.lmis) p.blocks.push_back(l.block);
  for (const auto& st : jp.structures)
    if (st.sigma > 0)
      p.blocks.push_back(positivity_block(st.estimator, st.sigma, jp.layout, *params.strictness));
  return p;
}

SynthesisStatus map_status(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return SynthesisStatus::Feasible;
    case SolveStatus::Infeasible: return SynthesisStatus::Infeasible;
    case SolveStatus::NumericalFailure: return SynthesisStatus::NumericalFailure;
  }
  return SynthesisStatus::NumericalFailure;
}

// Adds |v| <= bound_var as the 2x2 block [[-t, v], [v, -t]] <= 0.
void add_abs_bound(ConicProblem& p, int var, int bound_var) {
  LmiBlock b;
  b.label = "abs";
  b.constant = Matrix::Zero(2, 2);
  Matrix off = Matrix::Zero(2, 2);
  off(0, 1) = off(1, 0) = 1.0;
  b.terms.emplace_back(var, off);
  b.terms.emplace_back(bound_var, -Matrix::Identity(2, 2));
  p.blocks.push_back(std::move(b));
}

Vector extend(const Vector& x, int dimension) {
  Vector out = Vector::Zero(dimension);
  out.head(x.size()) = x;
  return out;
}

}  // namespace

ConicProblem build_problem(const EstimatorNetwork& net, const SynthesisParams& params) {
  const auto resolved = resolve_params(params, net);
  return base_problem(assemble_joint(net, resolved), resolved);
}

SynthesisStatus check_feasible(const EstimatorNetwork& net, const SynthesisParams& params,
                               const SolverSettings& settings) {
  auto s = settings;
  s.feasibility_only = true;
  return map_status(solve(build_problem(net, params), s).status);
}

SynthesisOutcome solve_coupled(const EstimatorNetwork& net, const SynthesisParams& params,
                               const SynthesisOptions& options) {
  const auto resolved = resolve_params(params, net);
  const double eps = *resolved.strictness;
  SynthesisOutcome outcome;

  // Feasibility.
  JointProblem jp = assemble_joint(net, resolved, {}, 0);
  const ConicProblem feas = base_problem(jp, resolved);
  SolverSettings s1 = options.solver;
  s1.feasibility_only = true;
  const SolveResult r1 = solve(feas, s1);
  outcome.iterations += r1.iterations;
  outcome.feasibility_shift = r1.feasibility_shift;
  if (r1.status != SolveStatus::Optimal) {
    outcome.status = map_status(r1.status);
    outcome.message = r1.message;
    return outcome;
  }
  Vector x = r1.x;

  if (options.condition) {
    const int d = jp.layout.dimension();
    // Raise the floor of P as far as possible (capped).
    {
      ConicProblem p = feas;
      p.dimension = d + 1;
      const int mu = d;
      for (const auto& st : jp.structures)
        if (st.sigma > 0) p.blocks.push_back(positivity_block(st.estimator, st.sigma, jp.layout, 0.0, mu));
      LmiBlock cap;
      cap.label = "mu_cap";
      cap.constant = Matrix::Constant(1, 1, -1e3);
      cap.terms.emplace_back(mu, Matrix::Identity(1, 1));
      p.blocks.push_back(std::move(cap));
      p.objective = Vector::Zero(d + 1);
      p.objective(mu) = -1.0;
      SolverSettings s2 = options.solver;
      s2.gap_tolerance = options.conditioning_gap;
      s2.start = extend(x, d + 1);
      const SolveResult r2 = solve(p, s2);
      outcome.iterations += r2.iterations;
      if (r2.status == SolveStatus::Optimal && r2.x(mu) > eps) {
        const double floor = 0.5 * r2.x(mu);
        // Smallest uniform bound on the gain entries at half that floor.
        ConicProblem p3 = feas;
        p3.dimension = d + 1;
        const int kappa = d;
        for (const auto& st : jp.structures)
          if (st.sigma > 0)
            p3.blocks.push_back(positivity_block(st.estimator, st.sigma, jp.layout, floor));
        for (const auto& st : jp.structures) {
          const int k = st.estimator;
          for (int v = 0; v < jp.layout.g_count(k); ++v) add_abs_bound(p3, jp.layout.g_offset(k) + v, kappa);
          for (int v = 0; v < jp.layout.f_count(k); ++v) add_abs_bound(p3, jp.layout.f_offset(k) + v, kappa);
        }
        p3.objective = Vector::Zero(d + 1);
        p3.objective(kappa) = 1.0;
        SolverSettings s3 = options.solver;
        s3.gap_tolerance = options.conditioning_gap;
        Vector start = r2.x;
        start(kappa) = 0.0;
        s3.start = start;
        const SolveResult r3 = solve(p3, s3);
        outcome.iterations += r3.iterations;
        x = r3.status == SolveStatus::Optimal ? Vector(r3.x.head(d)) : Vector(r2.x.head(d));
      }
    }
  }

  // Independent audit of the certificate.
  GainCertificate cert;
  cert.params = resolved;
  try {
    cert.gains = unpack(x, jp.structures, jp.layout);
  } catch (const Error& e) {
    outcome.status = SynthesisStatus::NumericalFailure;
    outcome.message = e.what();
    return outcome;
  }
  bool ok = true;
  for (const auto& l : jp.lmis) {
    const Matrix M = l.block.evaluate(x) - eps * Matrix::Identity(l.block.size(), l.block.size());
    const double top = max_symmetric_eigenvalue(M);
    cert.margins.push_back(top);
    if (!(top <= -eps + 1e-9)) ok = false;
  }
  for (const auto& g : cert.gains) {
    const double low = g.P.rows() > 0 ? min_symmetric_eigenvalue(g.P) : 0.0;
    cert.p_margins.push_back(low);
    if (g.P.rows() > 0 && !(low > 0.0)) ok = false;
  }
  if (!ok) {
    outcome.status = SynthesisStatus::NumericalFailure;
    outcome.message = "solution failed the independent margin audit";
    return outcome;
  }
  outcome.status = SynthesisStatus::Feasible;
  outcome.certificate = std::move(cert);
  return outcome;
}

PerformanceOutcome optimize_performance(const EstimatorNetwork& net, const SynthesisParams& params,
                                        PerformanceMode mode, double relative_tolerance,
                                        const SynthesisOptions& options) {
  const auto resolved = resolve_params(params, net);
  if (!(relative_tolerance > 0.0))
    throw Error(ErrorKind::Validation, "relative tolerance must be positive");
  if (check_feasible(net, resolved, options.solver) != SynthesisStatus::Feasible)
    throw Error(ErrorKind::Precondition, "infeasible at the starting performance level (gamma " +
                                             std::to_string(resolved.gamma) + ", omega " +
                                             std::to_string(resolved.omega) + ")");
  PerformanceOutcome out;
  SynthesisParams p = resolved;

  if (mode == PerformanceMode::MinTrace) {
    JointProblem jp = assemble_joint(net, resolved, {}, 1);
    const int t = jp.layout.dimension() - 1;
    for (auto& l : jp.lmis)
      l = assemble_lmi(net, jp.structures[l.estimator], jp.layout, resolved, {t, t});
    ConicProblem prob = base_problem(jp, resolved);
    LmiBlock nonneg;
    nonneg.label = "t_nonneg";
    nonneg.constant = Matrix::Zero(1, 1);
    nonneg.terms.emplace_back(t, -Matrix::Identity(1, 1));
    prob.blocks.push_back(std::move(nonneg));
    prob.objective = Vector::Zero(prob.dimension);
    prob.objective(t) = 1.0;
    const SolveResult r = solve(prob, options.solver);
    if (r.status != SolveStatus::Optimal) {
      out.synthesis.status = map_status(r.status);
      out.synthesis.message = r.message;
      return out;
    }
    const double tstar = r.x(t);
    const double level = std::sqrt(tstar * (1.0 + relative_tolerance));
    p.gamma = p.omega = level;
    out.relative_gap = r.gap / std::max(tstar, 1e-300) + relative_tolerance;
    out.synthesis = solve_coupled(net, p, options);
    out.gamma = out.omega = level;
    return out;
  }

  double hi = mode == PerformanceMode::MinGamma ? resolved.gamma : resolved.omega;
  double lo = 0.0;
  while (hi - lo > relative_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    (mode == PerformanceMode::MinGamma ? p.gamma : p.omega) = mid;
    if (check_feasible(net, p, options.solver) == SynthesisStatus::Feasible)
      hi = mid;
    else
      lo = mid;
  }
  (mode == PerformanceMode::MinGamma ? p.gamma : p.omega) = hi;
  out.synthesis = solve_coupled(net, p, options);
  out.gamma = p.gamma;
  out.omega = p.omega;
  out.relative_gap = (hi - lo) / hi;
  return out;
}

ParameterSearchResult search_parameters(const EstimatorNetwork& net, const SynthesisParams& base,
                                        const ParameterGrid& grid, const SolverSettings& settings) {
  const auto resolved = resolve_params(base, net);
  const int N = net.estimators();
  std::vector<int> senders;
  for (int k = 0; k < N; ++k) {
    const auto st = lmi_structure(net, k);
    if (std::any_of(st.q.begin(), st.q.end(), [](int q) { return q > 0; })) senders.push_back(k);
  }

  std::vector<double> alphas{resolved.alpha};
  for (double a : grid.alphas)
    if (a != resolved.alpha) alphas.push_back(a);

  std::vector<std::vector<int>> combos{{}};
  for (std::size_t s = 0; s < senders.size(); ++s) {
    std::vector<std::vector<int>> next;
    for (const auto& c : combos)
      for (std::size_t v = 0; v < grid.pis.size(); ++v) {
        auto e = c;
        e.push_back(static_cast<int>(v));
        next.push_back(std::move(e));
      }
    combos = std::move(next);
  }
  const auto deviations = [&](const std::vector<int>& c) {
    return static_cast<int>(std::count_if(c.begin(), c.end(), [&](int v) { return grid.pis[v] != 1.0; }));
  };

  struct Candidate {
    int alpha_rank;
    int deviations;
    std::size_t combo;
  };
  std::vector<Candidate> order;
  for (std::size_t a = 0; a < alphas.size(); ++a)
    for (std::size_t c = 0; c < combos.size(); ++c)
      order.push_back({static_cast<int>(a), deviations(combos[c]), c});
  std::stable_sort(order.begin(), order.end(), [](const Candidate& x, const Candidate& y) {
    return std::make_tuple(x.alpha_rank != 0, x.deviations, x.alpha_rank) <
           std::make_tuple(y.alpha_rank != 0, y.deviations, y.alpha_rank);
  });

  ParameterSearchResult result;
  for (const auto& cand : order) {
    SynthesisParams p = resolved;
    p.alpha = alphas[cand.alpha_rank];
    for (std::size_t s = 0; s < senders.size(); ++s)
      p.pi[senders[s]] = grid.pis[combos[cand.combo][s]];
    ++result.candidates_tried;
    if (check_feasible(net, p, settings) == SynthesisStatus::Feasible) {
      result.found = true;
      result.params = p;
      return result;
    }
  }
  return result;
}

}  // namespace coopest
