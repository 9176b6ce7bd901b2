#include "coopest/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

namespace coopest {

Matrix psd_sqrt(const Matrix& W) {
  if (W.rows() == 0) return W;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (W + W.transpose()));
  Vector d = eig.eigenvalues();
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) < -1e-12)
      throw Error(ErrorKind::Validation, "weight matrix is not positive semidefinite");
    d(i) = std::sqrt(std::max(0.0, d(i)));
  }
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

ErrorSystem assemble_error_system(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                                  const std::vector<Matrix>& W) {
  const int N = net.estimators();
  if (static_cast<int>(gains.size()) != N || static_cast<int>(W.size()) != N)
    throw Error(ErrorKind::Dimension, "expected gains and weights for " + std::to_string(N) + " estimators");
  ErrorSystem es;
  int n = 0, r = 0;
  for (int k = 0; k < N; ++k) {
    es.offsets.push_back(n);
    es.eta_offsets.push_back(r);
    n += net.reps[k].sigma();
    r += static_cast<int>(net.reps[k].C.rows());
  }
  const int m = net.system.disturbance_dim();
  es.A = Matrix::Zero(n, n);
  es.B_v = Matrix::Zero(n, m);
  es.B_eta = Matrix::Zero(n, r);
  es.C_z = Matrix::Zero(n, n);

  std::vector<Matrix> Nk(N);
  for (int k = 0; k < N; ++k) {
    const auto& rep = net.reps[k];
    const int s = rep.sigma();
    Nk[k] = Matrix::Zero(s, s);
    for (int j : net.graph.neighbors(k))
      for (int i = 0; i < s; ++i)
        if (net.selections[j].contains(rep.selected[i])) Nk[k](i, i) += 1.0;
    const auto& g = gains[k];
    es.A.block(es.offsets[k], es.offsets[k], s, s) = rep.A - g.L * rep.C - g.K * Nk[k];
    es.B_v.middleRows(es.offsets[k], s) = rep.B;
    es.B_eta.block(es.offsets[k], es.eta_offsets[k], s, rep.C.rows()) = -g.L;
    es.C_z.block(es.offsets[k], es.offsets[k], s, s) = psd_sqrt(W[k]);
  }
  const auto& idx = net.system.index;
  for (const auto& e : net.extended.edges) {
    const int k = e.head.estimator;
    const int j = e.tail.estimator;
    const int row = *net.selections[k].position(e.head.state);
    const int col = es.offsets[j] + *net.selections[j].position(e.tail.state);
    if (e.kind == EdgeKind::Interconnection) {
      es.A(es.offsets[k] + row, col) += net.system.A(idx.global(e.head.state), idx.global(e.tail.state));
    } else {
      es.A.block(es.offsets[k], col, net.reps[k].sigma(), 1) += gains[k].K.col(row);
    }
  }
  return es;
}

Matrix stacked_lyapunov(const std::vector<EstimatorGains>& gains) {
  int n = 0;
  for (const auto& g : gains) n += static_cast<int>(g.P.rows());
  Matrix P = Matrix::Zero(n, n);
  int o = 0;
  for (const auto& g : gains) {
    const int s = static_cast<int>(g.P.rows());
    P.block(o, o, s, s) = g.P;
    o += s;
  }
  return P;
}

StabilityReport check_stability(const ErrorSystem& es, const Matrix& P, double alpha) {
  StabilityReport rep;
  if (es.dimension() == 0) {
    rep.abscissa = -std::numeric_limits<double>::infinity();
    rep.certificate_max_eigenvalue = -std::numeric_limits<double>::infinity();
    rep.stable = rep.certificate_holds = true;
    return rep;
  }
  Eigen::EigenSolver<Matrix> eig(es.A, false);
  rep.abscissa = eig.eigenvalues().real().maxCoeff();
  rep.stable = rep.abscissa < 0.0;
  const Matrix cert = es.A.transpose() * P + P * es.A + alpha * P;
  rep.certificate_max_eigenvalue = max_symmetric_eigenvalue(cert);
  rep.certificate_tolerance = 1e-9 * std::max(1.0, P.norm() * es.A.norm());
  rep.certificate_holds = rep.certificate_max_eigenvalue <= rep.certificate_tolerance;
  return rep;
}

namespace {

struct NumericLmi {
  Matrix M;
  Matrix schur;
};

NumericLmi numeric_lmi(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                       const SynthesisParams& params, int k) {
  const auto& rep = net.reps.at(k);
  const auto& sel = net.selections[k];
  const auto& g = gains.at(k);
  const int s = rep.sigma();
  const int r = static_cast<int>(rep.C.rows());
  const int m = static_cast<int>(rep.B.cols());
  const Matrix& P = g.P;

  Matrix Nm = Matrix::Zero(s, s);
  struct Shared {
    int neighbor, pos, neighbor_pos;
  };
  std::vector<Shared> shared;
  for (int j : net.graph.neighbors(k)) {
    for (int i = 0; i < s; ++i) {
      const auto pj = net.selections[j].position(sel.at(i));
      if (!pj) continue;
      Nm(i, i) += 1.0;
      shared.push_back({j, i, *pj});
    }
  }
  Matrix Pi = Matrix::Zero(s, s);
  for (int i = 0; i < s; ++i) Pi(i, i) = params.pi[k] * net.extended.q({k, sel.at(i)}) * P(i, i);

  const Matrix GC = g.G * rep.C;
  const Matrix FN = g.F * Nm;
  const Matrix Q = P * rep.A + rep.A.transpose() * P - GC - GC.transpose() - FN - FN.transpose() +
                   params.alpha * P + Pi;

  const int ne = static_cast<int>(rep.external.size());
  const int ns = static_cast<int>(shared.size());
  const Matrix S = P * rep.coupling;
  Vector Rd(ne);
  for (int t = 0; t < ne; ++t) {
    const int z = *net.assignment(rep.external[t]);
    const int pos = *net.selections[z].position(rep.external[t]);
    Rd(t) = params.pi[z] * gains[z].P(pos, pos);
  }
  Matrix T(s, ns);
  Vector Ud(ns);
  for (int u = 0; u < ns; ++u) {
    T.col(u) = g.F.col(shared[u].pos);
    Ud(u) = params.pi[shared[u].neighbor] * gains[shared[u].neighbor].P(shared[u].neighbor_pos,
                                                                           shared[u].neighbor_pos);
  }

  const int D = s + r + m + ne + ns;
  NumericLmi out;
  out.M = Matrix::Zero(D, D);
  auto& M = out.M;
  M.topLeftCorner(s, s) = Q + params.W[k];
  M.block(0, s, s, r) = -g.G;
  M.block(0, s + r, s, m) = P * rep.B;
  M.block(0, s + r + m, s, ne) = S;
  M.block(0, s + r + m + ne, s, ns) = T;
  M.block(s, s, r, r) = -params.gamma * params.gamma * Matrix::Identity(r, r);
  M.block(s + r, s + r, m, m) = -params.omega * params.omega * Matrix::Identity(m, m);
  for (int t = 0; t < ne; ++t) M(s + r + m + t, s + r + m + t) = -Rd(t);
  for (int u = 0; u < ns; ++u) M(s + r + m + ne + u, s + r + m + ne + u) = -Ud(u);
  M = M.selfadjointView<Eigen::Upper>();

  out.schur = Q + params.W[k] + g.G * g.G.transpose() / (params.gamma * params.gamma) +
              P * rep.B * rep.B.transpose() * P / (params.omega * params.omega);
  for (int t = 0; t < ne; ++t) out.schur += S.col(t) * S.col(t).transpose() / Rd(t);
  for (int u = 0; u < ns; ++u) out.schur += T.col(u) * T.col(u).transpose() / Ud(u);
  return out;
}

}  // namespace

Matrix evaluate_lmi(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                    const SynthesisParams& params, int k) {
  return numeric_lmi(net, gains, resolve_params(params, net), k).M;
}

LmiResidualReport check_lmi_residuals(const EstimatorNetwork& net,
                                      const std::vector<EstimatorGains>& gains,
                                      const SynthesisParams& params) {
  const auto p = resolve_params(params, net);
  const int N = net.estimators();
  LmiResidualReport rep;
  rep.threshold = -*p.strictness + 1e-9;
  rep.margins.resize(N);
  rep.schur_margins.resize(N);
  rep.p_margins.resize(N);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t k) {
    const auto lmi = numeric_lmi(net, gains, p, static_cast<int>(k));
    rep.margins[k] = max_symmetric_eigenvalue(lmi.M);
    rep.schur_margins[k] = lmi.schur.rows() ? max_symmetric_eigenvalue(lmi.schur)
                                            : -std::numeric_limits<double>::infinity();
    rep.p_margins[k] = gains[k].P.rows() ? min_symmetric_eigenvalue(gains[k].P)
                                         : std::numeric_limits<double>::infinity();
  });
  rep.passed = true;
  for (int k = 0; k < N; ++k) {
    if (!(rep.margins[k] <= rep.threshold)) rep.passed = false;
    if (!(rep.p_margins[k] >= *p.strictness - 1e-9)) rep.passed = false;
  }
  return rep;
}

double gain_at(const Matrix& A, const Matrix& B, const Matrix& C, double w) {
  using CMatrix = Eigen::MatrixXcd;
  const int n = static_cast<int>(A.rows());
  if (n == 0 || B.cols() == 0 || C.rows() == 0) return 0.0;
  CMatrix Mw = -A.cast<std::complex<double>>();
  Mw.diagonal().array() += std::complex<double>(0.0, w);
  const CMatrix X = Mw.partialPivLu().solve(B.cast<std::complex<double>>());
  const CMatrix H = C.cast<std::complex<double>>() * X;
  Eigen::JacobiSVD<CMatrix> svd(H);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Matrix scaled_input(const ErrorSystem& es, double gamma, double omega) {
  const double N = std::max(1, es.estimators());
  Matrix B(es.dimension(), es.B_v.cols() + es.B_eta.cols());
  B << es.B_v / (std::sqrt(N) * omega), es.B_eta / gamma;
  return B;
}

FrequencyReport check_hinf_frequency(const ErrorSystem& es, double gamma, double omega,
                                     const FrequencyGrid& grid) {
  if (!(gamma > 0.0) || !(omega > 0.0))
    throw Error(ErrorKind::Validation, "gamma and omega must be positive");
  FrequencyReport rep;
  if (es.dimension() == 0) {
    rep.passed = true;
    return rep;
  }
  Eigen::EigenSolver<Matrix> eig(es.A, false);
  if (eig.eigenvalues().real().maxCoeff() >= 0.0)
    throw Error(ErrorKind::Precondition, "error dynamics are not stable; the H-infinity norm is undefined");
  const Matrix B = scaled_input(es, gamma, omega);

  std::vector<double> w{0.0};
  const int pts = std::max(2, grid.points);
  for (int i = 0; i < pts; ++i)
    w.push_back(grid.low * std::pow(grid.high / grid.low, static_cast<double>(i) / (pts - 1)));
  if (grid.refine)
    for (int i = 0; i < eig.eigenvalues().size(); ++i) {
      const double im = std::abs(eig.eigenvalues()(i).imag());
      if (im > 0.0) w.push_back(im);
    }
  std::sort(w.begin(), w.end());
  w.erase(std::unique(w.begin(), w.end()), w.end());

  std::vector<double> val(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) val[i] = gain_at(es.A, B, es.C_z, w[i]);
  rep.evaluations = static_cast<int>(w.size());
  const auto best = std::max_element(val.begin(), val.end());
  rep.sup = *best;
  rep.at_frequency = w[best - val.begin()];

  if (grid.refine) {
    // Golden-section refinement on each of the largest local maxima.
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < w.size(); ++i)
      if (val[i] >= val[i - 1] && val[i] >= val[i + 1]) peaks.push_back(i);
    std::sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    if (peaks.size() > 16) peaks.resize(16);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t i : peaks) {
      double a = w[i - 1], b = w[i + 1];
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double f1 = gain_at(es.A, B, es.C_z, x1), f2 = gain_at(es.A, B, es.C_z, x2);
      rep.evaluations += 2;
      for (int it = 0; it < 60 && b - a > 1e-12 * std::max(1.0, b); ++it) {
        if (f1 > f2) {
          b = x2; x2 = x1; f2 = f1;
          x1 = b - phi * (b - a);
          f1 = gain_at(es.A, B, es.C_z, x1);
        } else {
          a = x1; x1 = x2; f1 = f2;
          x2 = a + phi * (b - a);
          f2 = gain_at(es.A, B, es.C_z, x2);
        }
        ++rep.evaluations;
      }
      const double f = std::max(f1, f2);
      if (f > rep.sup) {
        rep.sup = f;
        rep.at_frequency = f1 > f2 ? x1 : x2;
      }
    }
  }
  rep.passed = rep.sup <= 1.0 + 1e-6;
  return rep;
}

namespace {

bool hamiltonian_has_imaginary_eigenvalue(const Matrix& A, const Matrix& B, const Matrix& C, double g) {
  const int n = static_cast<int>(A.rows());
  Matrix H(2 * n, 2 * n);
  H << A, B * B.transpose() / (g * g), -C.transpose() * C, -A.transpose();
  Eigen::EigenSolver<Matrix> eig(H, false);
  const double scale = std::max(1.0, H.norm());
  for (int i = 0; i < eig.eigenvalues().size(); ++i)
    if (std::abs(eig.eigenvalues()(i).real()) < 1e-8 * scale) return true;
  return false;
}

}  // namespace

double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C, double tol) {
  if (A.rows() == 0 || B.cols() == 0 || C.rows() == 0) return 0.0;
  if (B.isZero(0.0) || C.isZero(0.0)) return 0.0;
  double lo = gain_at(A, B, C, 0.0);
  Eigen::EigenSolver<Matrix> eig(A, false);
  for (int i = 0; i < eig.eigenvalues().size(); ++i)
    lo = std::max(lo, gain_at(A, B, C, std::abs(eig.eigenvalues()(i).imag())));
  if (lo <= 0.0) lo = 1e-12;
  double hi = 2.0 * lo;
  while (hamiltonian_has_imaginary_eigenvalue(A, B, C, hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (hamiltonian_has_imaginary_eigenvalue(A, B, C, mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Vector propagate(const Matrix& A, const Vector& x0, double t) {
  const Matrix At = A * t;
  return At.exp() * x0;
}

}  // namespace coopest
