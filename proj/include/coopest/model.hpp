#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "coopest/common.hpp"

namespace coopest {

/// One subsystem of the interconnection:
///   x_k' = A x_k + sum_j A_kj x_j + B v,   y_k = C x_k + sum_j C_kj x_j + eta_k.
/// B has one column per channel of the disturbance v shared by all subsystems.
/// A subsystem may carry no sensors (C has zero rows).
struct SubsystemModel {
  Matrix A;
  Matrix B;
  Matrix C;

  int states() const { return static_cast<int>(A.rows()); }
  int outputs() const { return static_cast<int>(C.rows()); }
  int disturbances() const { return static_cast<int>(B.cols()); }
};

enum class CouplingKind { State, Output };

/// Off-diagonal block A_kj (State, n_k x n_j) or C_kj (Output, r_k x n_j).
/// Subsystem indices are 0-based.
struct CouplingBlock {
  int from = 0;
  int to = 0;
  CouplingKind kind = CouplingKind::State;
  Matrix M;
};

/// Bijection between (k, i) pairs and positions in the stacked state x.
/// The canonical order is lexicographic in (k, i), which is also the
/// stacking order of x.
class IndexSpace {
 public:
  IndexSpace() = default;
  explicit IndexSpace(std::vector<int> subsystem_sizes);

  int size() const { return total_; }
  int subsystems() const { return static_cast<int>(sizes_.size()); }
  int subsystem_size(int k) const { return sizes_.at(k); }
  int offset(int k) const { return offsets_.at(k); }

  bool contains(const StateIndex& s) const;
  int global(const StateIndex& s) const;
  StateIndex local(int global_index) const;
  std::vector<StateIndex> entries() const;

 private:
  std::vector<int> sizes_;
  std::vector<int> offsets_;
  int total_ = 0;
};

/// The assembled global plant x' = A x + B v, y = C x + eta. Immutable after
/// assemble_global.
struct InterconnectedSystem {
  std::vector<SubsystemModel> subsystems;
  std::vector<CouplingBlock> couplings;  // normalized: exact-zero blocks dropped, sorted
  IndexSpace index;
  Matrix A;
  Matrix B;
  Matrix C;
  std::vector<int> output_offsets;  // first row of y_k inside y

  int state_dim() const { return index.size(); }
  int subsystem_count() const { return static_cast<int>(subsystems.size()); }
  int disturbance_dim() const { return static_cast<int>(B.cols()); }
  int output_rows(int k) const { return subsystems.at(k).outputs(); }
  /// Rows of C belonging to y_k (r_k x n).
  Matrix output_block(int k) const;
};

/// Stacks subsystems and coupling blocks into the global (A, B, C).
/// Throws Error(Dimension) naming the offending block, or Error(Duplicate)
/// when two blocks share (kind, from, to).
InterconnectedSystem assemble_global(std::vector<SubsystemModel> subsystems,
                                     std::vector<CouplingBlock> couplings);

/// Nonzero off-diagonal blocks of the assembled system, in canonical order.
std::vector<CouplingBlock> extract_blocks(const InterconnectedSystem& sys);

/// Rank decisions use tau = factor * max(rows, cols) * eps * sigma_max unless
/// an absolute tolerance is given.
struct RankOptions {
  double tolerance_factor = 1.0;
  std::optional<double> absolute_tolerance;
};

/// Numerical rank by singular values; tolerance_out receives the threshold.
int numerical_rank(const Matrix& m, const RankOptions& options = {},
                   double* tolerance_out = nullptr);

struct ObservabilityReport {
  bool observable = false;
  int rank = 0;
  int state_dim = 0;
  double tolerance = 0.0;
  /// Eigenvalues s of A where rank [A - sI; C] < n.
  std::vector<std::complex<double>> pbh_failures;
};

struct DetectabilityReport {
  bool detectable = false;
  double stability_margin = 1e-9;  // Re(s) >= -margin counts as unstable
  std::vector<std::complex<double>> undetectable;
};

/// Rank of the observability matrix [C; CA; ...; CA^(n-1)] equals n.
/// The rank is taken from an orthonormal Krylov basis of its row space, so
/// powers of A are never formed.
ObservabilityReport check_observability(const Matrix& A, const Matrix& C,
                                        const RankOptions& options = {});

/// PBH rank test at every eigenvalue with Re(s) >= -1e-9.
DetectabilityReport check_detectability(const Matrix& A, const Matrix& C,
                                        const RankOptions& options = {});

/// Eigenvalues of A at which [A - sI; C] loses rank. Thresholds use
/// sqrt(eps) * sigma_max, since s itself is only known to rounding.
std::vector<std::complex<double>> pbh_failures(const Matrix& A, const Matrix& C,
                                               const RankOptions& options = {});

}  // namespace coopest
