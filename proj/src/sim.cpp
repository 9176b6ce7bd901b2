#include "coopest/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "coopest/analysis.hpp"

namespace coopest {

namespace {

double standard_normal(std::mt19937_64& rng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * scale;
  const double u2 = static_cast<double>(rng() >> 11) * scale;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

void validate_spec(const DisturbanceSpec& s) {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(s.amplitude) || !finite(s.frequency) || !finite(s.phase) || !finite(s.start) ||
      !finite(s.width) || !finite(s.bandwidth) || !finite(s.duration))
    throw Error(ErrorKind::Validation, "disturbance parameters must be finite");
  if (s.kind == DisturbanceKind::Sinusoid && s.frequency < 0.0)
    throw Error(ErrorKind::Validation, "sinusoid frequency must be non-negative");
  if (s.kind == DisturbanceKind::Pulse && s.width < 0.0)
    throw Error(ErrorKind::Validation, "pulse width must be non-negative");
  if (s.kind == DisturbanceKind::FilteredNoise && (!(s.bandwidth > 0.0) || s.duration < 0.0))
    throw Error(ErrorKind::Validation, "filtered noise needs a positive bandwidth and a non-negative duration");
}

}  // namespace

Disturbance::Disturbance(const DisturbanceSpec& spec) : spec_(spec) {
  validate_spec(spec_);
  if (spec_.kind != DisturbanceKind::FilteredNoise) return;
  spacing_ = 0.05 / spec_.bandwidth;
  const auto count = static_cast<std::size_t>(std::ceil(spec_.duration / spacing_)) + 2;
  const double a = std::exp(-spec_.bandwidth * spacing_);
  const double gain = (1.0 - a) * spec_.amplitude * std::sqrt((1.0 + a) / (1.0 - a));
  std::mt19937_64 rng(spec_.seed);
  samples_.resize(count);
  double s = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    samples_[i] = s;
    s = a * s + gain * standard_normal(rng);
  }
}

double Disturbance::operator()(double t) const {
  const auto& s = spec_;
  switch (s.kind) {
    case DisturbanceKind::Zero: return 0.0;
    case DisturbanceKind::Sinusoid:
      return s.amplitude * std::sin(2.0 * std::numbers::pi * s.frequency * t + s.phase);
    case DisturbanceKind::Pulse: return (t >= s.start && t < s.start + s.width) ? s.amplitude : 0.0;
    case DisturbanceKind::FilteredNoise: {
      if (t < 0.0 || t > s.duration) return 0.0;
      const double u = t / spacing_;
      const auto i = std::min(static_cast<std::size_t>(u), samples_.size() - 2);
      const double f = u - static_cast<double>(i);
      return (1.0 - f) * samples_[i] + f * samples_[i + 1];
    }
  }
  return 0.0;
}

double generate_disturbance(const DisturbanceSpec& spec, double t) { return Disturbance(spec)(t); }

DisturbanceSet::DisturbanceSet(const EstimatorNetwork& net, const std::vector<DisturbanceSpec>& specs) {
  v_dim_ = net.system.disturbance_dim();
  for (int k = 0; k < net.estimators(); ++k) {
    eta_offsets_.push_back(eta_dim_);
    eta_dim_ += net.system.output_rows(k);
  }
  for (const auto& s : specs) {
    if (s.target == DisturbanceTarget::V) {
      if (s.channel < 0 || s.channel >= v_dim_)
        throw Error(ErrorKind::Validation, "disturbance channel " + std::to_string(s.channel + 1) +
                                               " of v does not exist");
    } else {
      if (s.estimator < 0 || s.estimator >= net.estimators())
        throw Error(ErrorKind::Validation, "measurement noise targets unknown estimator " +
                                               std::to_string(s.estimator + 1));
      if (s.channel < 0 || s.channel >= net.system.output_rows(s.estimator))
        throw Error(ErrorKind::Validation, "estimator " + std::to_string(s.estimator + 1) +
                                               " has no measurement channel " +
                                               std::to_string(s.channel + 1));
    }
    signals_.emplace_back(s);
  }
}

Vector DisturbanceSet::v(double t) const {
  Vector out = Vector::Zero(v_dim_);
  for (const auto& s : signals_)
    if (s.spec().target == DisturbanceTarget::V) out(s.spec().channel) += s(t);
  return out;
}

Vector DisturbanceSet::eta(double t) const {
  Vector out = Vector::Zero(eta_dim_);
  for (const auto& s : signals_)
    if (s.spec().target == DisturbanceTarget::Eta)
      out(eta_offsets_[s.spec().estimator] + s.spec().channel) += s(t);
  return out;
}

LocalEstimator::LocalEstimator(const RepartitionedSystem& rep, const EstimatorGains& gains,
                               std::vector<int> shared_positions)
    : A_(rep.A), L_(gains.L), K_(gains.K), C_(rep.C), coupling_(rep.coupling),
      shared_positions_(std::move(shared_positions)) {}

Vector LocalEstimator::derivative(const Vector& xhat, const Vector& y, const EstimatorInbox& inbox) const {
  Vector d = A_ * xhat + L_ * (y - C_ * xhat);
  if (inbox.external.size() > 0) d.noalias() += coupling_ * inbox.external;
  if (!shared_positions_.empty()) {
    Vector correction = Vector::Zero(xhat.size());
    for (std::size_t u = 0; u < shared_positions_.size(); ++u)
      correction(shared_positions_[u]) += inbox.shared(static_cast<Eigen::Index>(u)) - xhat(shared_positions_[u]);
    d.noalias() += K_ * correction;
  }
  return d;
}

MessageRouter::MessageRouter(const EstimatorNetwork& net) {
  const int N = net.estimators();
  external_.resize(N);
  shared_.resize(N);
  targets_.resize(N);
  std::set<std::pair<int, StateIndex>> interconnection_tails;  // (head estimator, tail state)
  std::set<std::pair<int, int>> tail_estimators;
  for (const auto& e : net.extended.edges) {
    if (e.kind == EdgeKind::Interconnection) {
      interconnection_tails.insert({e.head.estimator, e.tail.state});
      tail_estimators.insert({e.head.estimator, e.tail.estimator});
    } else {
      const int k = e.head.estimator;
      shared_[k].push_back({e.tail.estimator, *net.selections[e.tail.estimator].position(e.tail.state)});
      targets_[k].push_back(*net.selections[k].position(e.head.state));
    }
  }
  for (int k = 0; k < N; ++k) {
    for (const auto& lambda : net.reps[k].external) {
      const auto owner = net.assignment(lambda);
      if (!owner || !interconnection_tails.count({k, lambda}) || !tail_estimators.count({k, *owner}))
        throw Error(ErrorKind::Precondition, "estimator " + std::to_string(k + 1) + " would read " +
                                                 to_string(lambda) + " without an extended-graph edge");
      external_[k].push_back({*owner, *net.selections[*owner].position(lambda)});
    }
  }
}

EstimatorInbox MessageRouter::collect(int k, const std::vector<Vector>& estimates) const {
  EstimatorInbox inbox;
  const auto& ext = external_.at(k);
  inbox.external.resize(static_cast<Eigen::Index>(ext.size()));
  for (std::size_t i = 0; i < ext.size(); ++i) inbox.external(i) = estimates[ext[i].estimator](ext[i].position);
  const auto& sh = shared_.at(k);
  inbox.shared.resize(static_cast<Eigen::Index>(sh.size()));
  for (std::size_t i = 0; i < sh.size(); ++i) inbox.shared(i) = estimates[sh[i].estimator](sh[i].position);
  return inbox;
}

Vector SimulationTrace::error(int k, int i) const {
  const auto& rows = selected_rows.at(k);
  Vector e(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t p = 0; p < rows.size(); ++p) e(p) = x(rows[p], i) - xhat(offsets[k] + static_cast<int>(p), i);
  return e;
}

Vector SimulationTrace::stacked_error(int i) const {
  Vector e(xhat.rows());
  for (std::size_t k = 0; k < selected_rows.size(); ++k) e.segment(offsets[k], selected_rows[k].size()) = error(static_cast<int>(k), i);
  return e;
}

double default_step(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains) {
  std::vector<Matrix> W;
  for (const auto& r : net.reps) W.push_back(Matrix::Identity(r.sigma(), r.sigma()));
  const auto es = assemble_error_system(net, gains, W);
  const double norm = es.dimension() ? es.A.cwiseAbs().rowwise().sum().maxCoeff() : 0.0;
  return norm > 0.0 ? std::min(1e-2, 0.1 / norm) : 1e-2;
}

namespace {

// The coupled plant and estimators, evaluated one estimator at a time.
// State z = [x; xhat^(1); ...; xhat^(N)], disturbance d = [v; eta].
class StructuredSystem {
 public:
  StructuredSystem(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains)
      : net_(net), router_(net) {
    n_ = net.system.state_dim();
    m_ = net.system.disturbance_dim();
    int o = n_;
    for (int k = 0; k < net.estimators(); ++k) {
      offsets_.push_back(o);
      o += net.reps[k].sigma();
      estimators_.emplace_back(net.reps[k], gains[k], router_.shared_targets(k));
    }
    dim_ = o;
    r_ = static_cast<int>(net.system.C.rows());
  }

  int dimension() const { return dim_; }
  int disturbance_dimension() const { return m_ + r_; }

  Vector derivative(const Vector& z, const Vector& d) const {
    Vector out(dim_);
    const Vector x = z.head(n_);
    out.head(n_) = net_.system.A * x;
    if (m_ > 0) out.head(n_).noalias() += net_.system.B * d.head(m_);
    const Vector y = net_.system.C * x + d.segment(m_, r_);
    std::vector<Vector> estimates(estimators_.size());
    for (std::size_t k = 0; k < estimators_.size(); ++k)
      estimates[k] = z.segment(offsets_[k], estimators_[k].states());
    for (std::size_t k = 0; k < estimators_.size(); ++k) {
      const int kk = static_cast<int>(k);
      const Vector yk = y.segment(net_.system.output_offsets[k], net_.system.output_rows(kk));
      out.segment(offsets_[k], estimators_[k].states()) =
          estimators_[k].derivative(estimates[k], yk, router_.collect(kk, estimates));
    }
    return out;
  }

  // One classical RK4 step with the disturbance sampled at t, t + h/2, t + h.
  Vector step(const Vector& z, double h, const Vector& d0, const Vector& dm, const Vector& d1) const {
    const Vector k1 = derivative(z, d0);
    const Vector k2 = derivative(z + 0.5 * h * k1, dm);
    const Vector k3 = derivative(z + 0.5 * h * k2, dm);
    const Vector k4 = derivative(z + h * k3, d1);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  const std::vector<int>& offsets() const { return offsets_; }

 private:
  const EstimatorNetwork& net_;
  MessageRouter router_;
  std::vector<LocalEstimator> estimators_;
  std::vector<int> offsets_;
  int n_ = 0, m_ = 0, r_ = 0, dim_ = 0;
};

// The RK4 step is linear in (z, d0, dm, d1); its matrices are read off by
// applying the structured step to unit vectors.
struct CompiledStep {
  Matrix Phi, G0, Gm, G1;

  CompiledStep(const StructuredSystem& sys, double h) {
    const int n = sys.dimension();
    const int p = sys.disturbance_dimension();
    const Vector zero_d = Vector::Zero(p);
    const Vector zero_z = Vector::Zero(n);
    Phi.resize(n, n);
    for (int i = 0; i < n; ++i) Phi.col(i) = sys.step(Vector::Unit(n, i), h, zero_d, zero_d, zero_d);
    G0.resize(n, p);
    Gm.resize(n, p);
    G1.resize(n, p);
    for (int i = 0; i < p; ++i) {
      const Vector e = Vector::Unit(p, i);
      G0.col(i) = sys.step(zero_z, h, e, zero_d, zero_d);
      Gm.col(i) = sys.step(zero_z, h, zero_d, e, zero_d);
      G1.col(i) = sys.step(zero_z, h, zero_d, zero_d, e);
    }
  }
};

Vector sample_disturbance(const DisturbanceSet& d, double t, int m, int r) {
  Vector out = Vector::Zero(m + r);
  if (d.empty()) return out;
  out.head(m) = d.v(t);
  out.tail(r) = d.eta(t);
  return out;
}

}  // namespace

SimulationTrace simulate(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                         const DisturbanceSet& disturbances, const Vector& x0, double horizon,
                         const SimulationOptions& options) {
  const int n = net.system.state_dim();
  const int m = net.system.disturbance_dim();
  const int r = static_cast<int>(net.system.C.rows());
  if (x0.size() != n)
    throw Error(ErrorKind::Dimension, "initial state has " + std::to_string(x0.size()) +
                                          " entries, expected " + std::to_string(n));
  if (!disturbances.empty() && (disturbances.v_dim() != m || disturbances.eta_dim() != r))
    throw Error(ErrorKind::Dimension, "disturbance set does not match the plant");
  const double dt0 = options.dt ? *options.dt : default_step(net, gains);
  if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw Error(ErrorKind::Validation, "step size must be positive");
  if (!(horizon >= dt0) || !std::isfinite(horizon))
    throw Error(ErrorKind::Validation, "horizon must be at least one step");
  if (options.record_stride < 1) throw Error(ErrorKind::Validation, "record stride must be positive");
  const long steps = static_cast<long>(std::ceil(horizon / dt0 - 1e-9));
  const double h = horizon / static_cast<double>(steps);

  const StructuredSystem sys(net, gains);
  const int dim = sys.dimension();
  const int est_dim = dim - n;

  SimulationTrace trace;
  trace.dt = h;
  trace.steps = steps;
  for (int k = 0; k < net.estimators(); ++k) {
    trace.offsets.push_back(sys.offsets()[k] - n);
    std::vector<int> rows;
    for (const auto& s : net.reps[k].selected) rows.push_back(net.system.index.global(s));
    trace.selected_rows.push_back(std::move(rows));
  }
  const long samples = steps / options.record_stride + 2;
  trace.x.resize(n, samples);
  trace.xhat.resize(est_dim, samples);
  trace.v.resize(m, samples);
  trace.eta.resize(r, samples);
  trace.times.reserve(static_cast<std::size_t>(samples));

  Vector z = Vector::Zero(dim);
  z.head(n) = x0;
  Vector d0 = sample_disturbance(disturbances, 0.0, m, r);
  int col = 0;
  const auto record = [&](double t) {
    trace.times.push_back(t);
    trace.x.col(col) = z.head(n);
    trace.xhat.col(col) = z.tail(est_dim);
    trace.v.col(col) = d0.head(m);
    trace.eta.col(col) = d0.tail(r);
    ++col;
  };
  record(0.0);

  std::optional<CompiledStep> compiled;
  if (options.integrator == Integrator::Compiled) compiled.emplace(sys, h);
  const bool forced = !disturbances.empty();
  Vector xs(n), xh(est_dim), next(dim);
  for (long s = 1; s <= steps; ++s) {
    const double t0 = static_cast<double>(s - 1) * h;
    const double t1 = static_cast<double>(s) * h;
    Vector dm, d1;
    if (forced) {
      dm = sample_disturbance(disturbances, t0 + 0.5 * h, m, r);
      d1 = sample_disturbance(disturbances, t1, m, r);
    } else {
      d1 = d0;
      dm = d0;
    }
    if (compiled) {
      next.noalias() = compiled->Phi * z;
      if (forced) {
        next.noalias() += compiled->G0 * d0;
        next.noalias() += compiled->Gm * dm;
        next.noalias() += compiled->G1 * d1;
      }
      z.swap(next);
    } else {
      z = sys.step(z, h, d0, dm, d1);
    }
    if (!z.allFinite())
      throw Error(ErrorKind::Numerical, "simulation produced a non-finite state at step " +
                                            std::to_string(s) + " (t = " + std::to_string(t1) + ")");
    if (forced) d0 = std::move(d1);
    if (options.observer) {
      xs = z.head(n);
      xh = z.tail(est_dim);
      options.observer(s, t1, xs, xh);
    }
    if (s % options.record_stride == 0 || s == steps) record(t1);
  }
  trace.x.conservativeResize(Eigen::NoChange, col);
  trace.xhat.conservativeResize(Eigen::NoChange, col);
  trace.v.conservativeResize(Eigen::NoChange, col);
  trace.eta.conservativeResize(Eigen::NoChange, col);
  return trace;
}

double lyapunov_value(const std::vector<EstimatorGains>& gains, const std::vector<int>& offsets,
                      const Vector& e) {
  double V = 0.0;
  for (std::size_t k = 0; k < gains.size(); ++k) {
    const auto s = gains[k].P.rows();
    const auto ek = e.segment(offsets[k], s);
    V += ek.dot(gains[k].P * ek);
  }
  return V;
}

namespace {

struct Quadrature {
  double trapezoid = 0.0;
  double simpson = 0.0;
};

Quadrature integrate(const std::vector<double>& t, const std::vector<double>& f) {
  Quadrature q;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i + 1 < n; ++i) q.trapezoid += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
  std::size_t i = 0;
  while (i + 1 < n) {
    const double h1 = t[i + 1] - t[i];
    if (i + 2 < n) {
      const double h2 = t[i + 2] - t[i + 1];
      if (std::abs(h1 - h2) <= 1e-9 * std::max(h1, h2)) {
        q.simpson += h1 / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
        i += 2;
        continue;
      }
    }
    q.simpson += 0.5 * h1 * (f[i] + f[i + 1]);
    i += 1;
  }
  return q;
}

}  // namespace

PerformanceReport evaluate_performance(const SimulationTrace& trace,
                                       const std::vector<EstimatorGains>& gains,
                                       const SynthesisParams& params, const Vector& x0) {
  const int N = static_cast<int>(gains.size());
  if (static_cast<int>(trace.selected_rows.size()) != N)
    throw Error(ErrorKind::Dimension, "trace and gains describe different networks");
  std::vector<Matrix> W = params.W;
  if (W.empty())
    for (const auto& g : gains) W.push_back(Matrix::Identity(g.P.rows(), g.P.rows()));
  const int S = trace.samples();
  std::vector<double> lhs(S), rhs(S);
  const double w2 = params.omega * params.omega;
  const double g2 = params.gamma * params.gamma;
  for (int i = 0; i < S; ++i) {
    double e = 0.0;
    for (int k = 0; k < N; ++k) {
      const Vector ek = trace.error(k, i);
      e += ek.dot(W[k] * ek);
    }
    lhs[i] = e;
    rhs[i] = N * w2 * trace.v.col(i).squaredNorm() + g2 * trace.eta.col(i).squaredNorm();
  }
  PerformanceReport rep;
  for (int k = 0; k < N; ++k) {
    Vector x0k(static_cast<Eigen::Index>(trace.selected_rows[k].size()));
    for (std::size_t p = 0; p < trace.selected_rows[k].size(); ++p) x0k(p) = x0(trace.selected_rows[k][p]);
    rep.initial_term += x0k.dot(gains[k].P * x0k);
  }
  const auto ql = integrate(trace.times, lhs);
  const auto qr = integrate(trace.times, rhs);
  rep.lhs = ql.trapezoid;
  rep.rhs = qr.trapezoid + rep.initial_term;
  rep.quadrature_error = std::max(std::abs(ql.trapezoid - ql.simpson), std::abs(qr.trapezoid - qr.simpson));
  if (rep.rhs > 0.0)
    rep.ratio = rep.lhs / rep.rhs;
  else
    rep.ratio = rep.lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  rep.passed = rep.lhs <= rep.rhs * (1.0 + 1e-3);
  return rep;
}

namespace {

void append_number(std::string& out, double v, int digits) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  out.append(buf, res.ptr);
}

}  // namespace

std::string trace_csv(const SimulationTrace& trace, const EstimatorNetwork& net) {
  std::string out = "t";
  const auto& idx = net.system.index;
  for (const auto& s : idx.entries())
    out += ",x_" + std::to_string(s.subsystem + 1) + "_" + std::to_string(s.component + 1);
  for (int k = 0; k < net.estimators(); ++k)
    for (int p = 0; p < net.reps[k].sigma(); ++p)
      out += ",xhat_" + std::to_string(k + 1) + "_" + std::to_string(p + 1);
  for (int k = 0; k < net.estimators(); ++k) out += ",eps_norm_" + std::to_string(k + 1);
  out += "\n";
  for (int i = 0; i < trace.samples(); ++i) {
    append_number(out, trace.times[i], 17);
    for (int r = 0; r < trace.x.rows(); ++r) {
      out += ',';
      append_number(out, trace.x(r, i), 17);
    }
    for (int r = 0; r < trace.xhat.rows(); ++r) {
      out += ',';
      append_number(out, trace.xhat(r, i), 17);
    }
    for (int k = 0; k < net.estimators(); ++k) {
      out += ',';
      append_number(out, trace.error(k, i).norm(), 17);
    }
    out += '\n';
  }
  return out;
}

std::string trace_svg(const SimulationTrace& trace) {
  constexpr double width = 800.0, height = 400.0, margin = 50.0;
  const int N = static_cast<int>(trace.selected_rows.size());
  const int S = trace.samples();
  const double t_end = S > 0 ? trace.times.back() : 1.0;
  std::vector<std::vector<double>> logs(N, std::vector<double>(S));
  double lo = 0.0, hi = -16.0;
  for (int k = 0; k < N; ++k)
    for (int i = 0; i < S; ++i) {
      const double v = std::log10(std::max(trace.error(k, i).norm(), 1e-16));
      logs[k][i] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  lo = std::floor(lo);
  hi = std::ceil(std::max(hi, lo + 1.0));
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"400\" viewBox=\"0 0 800 400\">\n";
  out += "<rect width=\"800\" height=\"400\" fill=\"white\"/>\n";
  out += "<line x1=\"50\" y1=\"350\" x2=\"750\" y2=\"350\" stroke=\"black\"/>\n";
  out += "<line x1=\"50\" y1=\"50\" x2=\"50\" y2=\"350\" stroke=\"black\"/>\n";
  out += "<text x=\"400\" y=\"390\" text-anchor=\"middle\" font-size=\"14\">t</text>\n";
  out += "<text x=\"15\" y=\"200\" font-size=\"14\" transform=\"rotate(-90 15 200)\" text-anchor=\"middle\">log10 |eps_k|</text>\n";
  const auto label = [&](double x, double y, double value, const char* anchor) {
    out += "<text x=\"";
    append_number(out, x, 6);
    out += "\" y=\"";
    append_number(out, y, 6);
    out += "\" font-size=\"11\" text-anchor=\"";
    out += anchor;
    out += "\">";
    append_number(out, value, 6);
    out += "</text>\n";
  };
  label(45.0, 354.0, lo, "end");
  label(45.0, 54.0, hi, "end");
  label(50.0, 365.0, 0.0, "middle");
  label(750.0, 365.0, t_end, "middle");
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(S) / 2000);
  for (int k = 0; k < N; ++k) {
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"";
    out += colors[k % 8];
    out += "\" points=\"";
    for (std::size_t i = 0; i < static_cast<std::size_t>(S); i += stride) {
      const double x = margin + (width - 2 * margin) * trace.times[i] / t_end;
      const double y = height - margin - (height - 2 * margin) * (logs[k][i] - lo) / (hi - lo);
      append_number(out, x, 6);
      out += ',';
      append_number(out, y, 6);
      out += ' ';
    }
    out += "\"/>\n";
    out += "<text x=\"760\" y=\"";
    append_number(out, 60.0 + 16.0 * k, 6);
    out += "\" font-size=\"12\" fill=\"";
    out += colors[k % 8];
    out += "\">" + std::to_string(k + 1) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace coopest
