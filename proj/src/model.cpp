#include "coopest/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace coopest {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

std::string block_name(const CouplingBlock& b) {
  const char* prefix = b.kind == CouplingKind::State ? "A" : "C";
  return std::string(prefix) + "_" + std::to_string(b.to + 1) + std::to_string(b.from + 1) +
         " (to " + std::to_string(b.to + 1) + ", from " + std::to_string(b.from + 1) + ")";
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

double largest_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

}  // namespace

IndexSpace::IndexSpace(std::vector<int> subsystem_sizes) : sizes_(std::move(subsystem_sizes)) {
  offsets_.reserve(sizes_.size());
  for (int s : sizes_) {
    if (s < 1) throw Error(ErrorKind::Dimension, "subsystem state dimension must be >= 1");
    offsets_.push_back(total_);
    total_ += s;
  }
}

bool IndexSpace::contains(const StateIndex& s) const {
  return s.subsystem >= 0 && s.subsystem < subsystems() && s.component >= 0 &&
         s.component < sizes_[s.subsystem];
}

int IndexSpace::global(const StateIndex& s) const {
  if (!contains(s)) throw Error(ErrorKind::Dimension, "state index " + to_string(s) + " out of range");
  return offsets_[s.subsystem] + s.component;
}

StateIndex IndexSpace::local(int g) const {
  if (g < 0 || g >= total_) throw Error(ErrorKind::Dimension, "global state index out of range");
  const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), g);
  const int k = static_cast<int>(it - offsets_.begin()) - 1;
  return {k, g - offsets_[k]};
}

std::vector<StateIndex> IndexSpace::entries() const {
  std::vector<StateIndex> out;
  out.reserve(total_);
  for (int k = 0; k < subsystems(); ++k)
    for (int i = 0; i < sizes_[k]; ++i) out.push_back({k, i});
  return out;
}

Matrix InterconnectedSystem::output_block(int k) const {
  return C.middleRows(output_offsets.at(k), output_rows(k));
}

InterconnectedSystem assemble_global(std::vector<SubsystemModel> subsystems,
                                     std::vector<CouplingBlock> couplings) {
  if (subsystems.empty()) throw Error(ErrorKind::Dimension, "system has no subsystems");
  const int m = subsystems.front().disturbances();
  std::vector<int> sizes;
  for (std::size_t k = 0; k < subsystems.size(); ++k) {
    const auto& s = subsystems[k];
    const std::string name = "subsystem " + std::to_string(k + 1);
    if (s.A.rows() != s.A.cols() || s.A.rows() < 1)
      throw Error(ErrorKind::Dimension, name + ": A must be square and non-empty, got " + shape(s.A));
    if (s.B.rows() != s.A.rows())
      throw Error(ErrorKind::Dimension, name + ": B has " + std::to_string(s.B.rows()) +
                                            " rows, expected " + std::to_string(s.A.rows()));
    if (s.B.cols() != m)
      throw Error(ErrorKind::Dimension, name + ": B has " + std::to_string(s.B.cols()) +
                                            " columns, expected " + std::to_string(m));
    if (s.C.cols() != s.A.rows())
      throw Error(ErrorKind::Dimension, name + ": C has " + std::to_string(s.C.cols()) +
                                            " columns, expected " + std::to_string(s.A.rows()));
    sizes.push_back(s.states());
  }

  const int N = static_cast<int>(subsystems.size());
  std::set<std::tuple<CouplingKind, int, int>> seen;
  std::vector<CouplingBlock> kept;
  for (auto& b : couplings) {
    if (b.from < 0 || b.from >= N || b.to < 0 || b.to >= N)
      throw Error(ErrorKind::Dimension, "coupling block references unknown subsystem: " + block_name(b));
    if (b.from == b.to)
      throw Error(ErrorKind::Dimension, "self-coupling block " + block_name(b) +
                                            " (diagonal blocks belong to the subsystem model)");
    const int rows = b.kind == CouplingKind::State ? subsystems[b.to].states()
                                                   : subsystems[b.to].outputs();
    const int cols = subsystems[b.from].states();
    if (b.M.rows() != rows || b.M.cols() != cols)
      throw Error(ErrorKind::Dimension, "coupling block " + block_name(b) + " has shape " +
                                            shape(b.M) + ", expected " + std::to_string(rows) +
                                            "x" + std::to_string(cols));
    if (!seen.insert({b.kind, b.from, b.to}).second)
      throw Error(ErrorKind::Duplicate, "duplicate coupling block " + block_name(b));
    if (!b.M.isZero(0.0)) kept.push_back(std::move(b));
  }
  std::sort(kept.begin(), kept.end(), [](const CouplingBlock& a, const CouplingBlock& b) {
    return std::tie(a.kind, a.to, a.from) < std::tie(b.kind, b.to, b.from);
  });

  InterconnectedSystem sys;
  sys.index = IndexSpace(sizes);
  const int n = sys.index.size();
  int p = 0;
  for (const auto& s : subsystems) {
    sys.output_offsets.push_back(p);
    p += s.outputs();
  }
  sys.A = Matrix::Zero(n, n);
  sys.B = Matrix::Zero(n, m);
  sys.C = Matrix::Zero(p, n);
  for (int k = 0; k < N; ++k) {
    const auto& s = subsystems[k];
    const int o = sys.index.offset(k);
    sys.A.block(o, o, s.states(), s.states()) = s.A;
    sys.B.middleRows(o, s.states()) = s.B;
    sys.C.block(sys.output_offsets[k], o, s.outputs(), s.states()) = s.C;
  }
  for (const auto& b : kept) {
    const int col = sys.index.offset(b.from);
    if (b.kind == CouplingKind::State) {
      sys.A.block(sys.index.offset(b.to), col, b.M.rows(), b.M.cols()) = b.M;
    } else {
      sys.C.block(sys.output_offsets[b.to], col, b.M.rows(), b.M.cols()) = b.M;
    }
  }
  sys.subsystems = std::move(subsystems);
  sys.couplings = std::move(kept);
  return sys;
}

std::vector<CouplingBlock> extract_blocks(const InterconnectedSystem& sys) {
  std::vector<CouplingBlock> out;
  const int N = sys.subsystem_count();
  for (auto kind : {CouplingKind::State, CouplingKind::Output}) {
    for (int to = 0; to < N; ++to) {
      for (int from = 0; from < N; ++from) {
        if (from == to) continue;
        const int nf = sys.subsystems[from].states();
        const int col = sys.index.offset(from);
        Matrix M = kind == CouplingKind::State
                       ? Matrix(sys.A.block(sys.index.offset(to), col, sys.subsystems[to].states(), nf))
                       : Matrix(sys.C.block(sys.output_offsets[to], col, sys.subsystems[to].outputs(), nf));
        if (M.size() > 0 && !M.isZero(0.0)) out.push_back({from, to, kind, std::move(M)});
      }
    }
  }
  return out;
}

int numerical_rank(const Matrix& m, const RankOptions& options, double* tolerance_out) {
  if (m.size() == 0) {
    if (tolerance_out) *tolerance_out = 0.0;
    return 0;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& sv = svd.singularValues();
  const double tol = options.absolute_tolerance.value_or(
      options.tolerance_factor * static_cast<double>(std::max(m.rows(), m.cols())) * kEps * sv(0));
  if (tolerance_out) *tolerance_out = tol;
  return static_cast<int>((sv.array() > tol).count());
}

std::vector<std::complex<double>> pbh_failures(const Matrix& A, const Matrix& C,
                                               const RankOptions& options) {
  using Complex = std::complex<double>;
  using ComplexMatrix = Eigen::MatrixXcd;
  const Eigen::Index n = A.rows();
  std::vector<Complex> failures;
  if (n == 0) return failures;
  Eigen::EigenSolver<Matrix> es(A, false);
  std::vector<Complex> eigs(es.eigenvalues().data(), es.eigenvalues().data() + n);

  for (const Complex& s : eigs) {
    ComplexMatrix stacked(n + C.rows(), n);
    stacked.topRows(n) = A.cast<Complex>() - s * ComplexMatrix::Identity(n, n);
    if (C.rows() > 0) stacked.bottomRows(C.rows()) = C.cast<Complex>();
    Eigen::JacobiSVD<ComplexMatrix> svd(stacked);
    const auto& sv = svd.singularValues();
    const double tol = options.absolute_tolerance.value_or(
        options.tolerance_factor * std::sqrt(kEps) * std::max(sv(0), 1e-300));
    if (sv(n - 1) <= tol) {
      const bool duplicate = std::any_of(failures.begin(), failures.end(), [&](const Complex& f) {
        return std::abs(f - s) <= std::sqrt(kEps) * std::max(1.0, std::abs(s));
      });
      if (!duplicate) failures.push_back(s);
    }
  }
  std::sort(failures.begin(), failures.end(), [](const Complex& a, const Complex& b) {
    return std::make_pair(a.real(), a.imag()) < std::make_pair(b.real(), b.imag());
  });
  return failures;
}

ObservabilityReport check_observability(const Matrix& A, const Matrix& C,
                                        const RankOptions& options) {
  if (A.rows() != A.cols())
    throw Error(ErrorKind::Dimension, "observability: A must be square, got " + shape(A));
  if (C.cols() != A.rows())
    throw Error(ErrorKind::Dimension, "observability: C has " + std::to_string(C.cols()) +
                                          " columns, expected " + std::to_string(A.rows()));
  const int n = static_cast<int>(A.rows());
  ObservabilityReport report;
  report.state_dim = n;
  const double scale = std::max(largest_singular_value(A), largest_singular_value(C));
  report.tolerance = options.absolute_tolerance.value_or(
      options.tolerance_factor * 10.0 * static_cast<double>(std::max<Eigen::Index>(n, C.rows())) *
      kEps * std::max(scale, 1e-300));

  // Grow an orthonormal basis of span{C^T, A^T C^T, (A^T)^2 C^T, ...}; its
  // dimension is the rank of the observability matrix.
  Matrix basis(n, 0);
  std::vector<Vector> frontier;
  const Matrix At = A.transpose();
  auto try_append = [&](Vector w) -> bool {
    const double norm_before = w.norm();
    if (norm_before == 0.0) return false;
    for (int pass = 0; pass < 2; ++pass) {
      if (basis.cols() > 0) w -= basis * (basis.transpose() * w);
    }
    const double norm = w.norm();
    if (norm <= report.tolerance) return false;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = w / norm;
    frontier.push_back(basis.col(basis.cols() - 1));
    return true;
  };
  for (Eigen::Index r = 0; r < C.rows() && basis.cols() < n; ++r) try_append(C.row(r).transpose());
  while (!frontier.empty() && basis.cols() < n) {
    std::vector<Vector> current;
    current.swap(frontier);
    for (const auto& q : current) {
      if (basis.cols() >= n) break;
      try_append(At * q);
    }
  }
  report.rank = static_cast<int>(basis.cols());
  report.observable = report.rank == n;
  if (!report.observable) report.pbh_failures = pbh_failures(A, C, options);
  return report;
}

DetectabilityReport check_detectability(const Matrix& A, const Matrix& C,
                                        const RankOptions& options) {
  if (A.rows() != A.cols())
    throw Error(ErrorKind::Dimension, "detectability: A must be square, got " + shape(A));
  if (C.cols() != A.rows())
    throw Error(ErrorKind::Dimension, "detectability: C has " + std::to_string(C.cols()) +
                                          " columns, expected " + std::to_string(A.rows()));
  DetectabilityReport report;
  for (const auto& s : pbh_failures(A, C, options)) {
    if (s.real() >= -report.stability_margin) report.undetectable.push_back(s);
  }
  report.detectable = report.undetectable.empty();
  return report;
}

}  // namespace coopest
