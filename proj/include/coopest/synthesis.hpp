#pragma once

#include <optional>
#include <string>
#include <vector>

#include "coopest/graphs.hpp"
#include "coopest/lmi_engine.hpp"
#include "coopest/partition.hpp"

namespace coopest {

/// Everything structural the filter design needs, built once from a plant,
/// its partition, the assignment and the communication graph.
struct EstimatorNetwork {
  InterconnectedSystem system;
  std::vector<SelectionFunction> selections;
  AssignmentFunction assignment;
  CommGraph graph;
  std::vector<RepartitionedSystem> reps;
  ExtendedGraph extended;

  int estimators() const { return static_cast<int>(selections.size()); }
};

/// Repartitions every estimator and builds the extended graph.
/// Throws Error(Precondition) when a coupled estimate cannot be delivered.
EstimatorNetwork make_network(InterconnectedSystem system,
                              std::vector<SelectionFunction> selections,
                              AssignmentFunction assignment, CommGraph graph);

struct SynthesisParams {
  double alpha = 0.1;
  /// One weight per estimator; empty means 1 for all.
  std::vector<double> pi;
  double gamma = 1.0;
  double omega = 1.0;
  /// One sigma_k x sigma_k weight per estimator; empty means identity.
  std::vector<Matrix> W;
  /// Margin of the strict inequalities; empty means 1e-6 * max(1, ||A||_F).
  std::optional<double> strictness;
};

/// Fills defaults and checks positivity, sizes and W >= 0.
/// Throws Error(Validation) or Error(Dimension).
SynthesisParams resolve_params(const SynthesisParams& params, const EstimatorNetwork& net);

/// Reference to the diagonal entry P^(estimator)[position, position].
struct DiagonalRef {
  StateIndex state;
  int estimator = 0;
  int position = 0;
};

struct SharedCoordinate {
  StateIndex state;
  int position = 0;           // inside x^(k)
  int neighbor_position = 0;  // inside x^(j)
};

struct NeighborOverlap {
  int neighbor = 0;
  std::vector<SharedCoordinate> shared;  // in the selection order of k
};

/// Structural ingredients of the LMI of estimator k.
struct LmiStructure {
  int estimator = 0;
  int sigma = 0;
  int outputs = 0;
  int disturbances = 0;
  Matrix N;                             // diagonal neighbor counts
  std::vector<int> q;                   // out-degree of (k, xi_k(i)) per position i
  std::vector<DiagonalRef> external;    // p(lambda) for lambda in I_c^(k), canonical order
  std::vector<NeighborOverlap> overlaps;  // neighbors with a nonempty overlap, ascending
  std::vector<int> fusion_positions;    // positions with N_ii > 0; columns carried by F

  /// [sigma | r | m | |I_c| | overlap widths...]; zero-width groups after m are omitted.
  std::vector<int> block_widths() const;
  int size() const;
};

LmiStructure lmi_structure(const EstimatorNetwork& net, int k);

/// Flat decision vector: per estimator the upper triangle of P (row-major),
/// G column-major, then the fusion columns of F column-major.
class VariableLayout {
 public:
  VariableLayout() = default;
  explicit VariableLayout(const std::vector<LmiStructure>& structures);

  int dimension() const { return dimension_; }
  /// Appends a scalar variable and returns its index.
  int add_scalar();

  int p(int k, int i, int j) const;
  int g(int k, int row, int col) const;
  /// Variable of F^(k)(row, position); position must be a fusion position.
  int f(int k, int row, int position) const;
  int p_count(int k) const;
  int g_count(int k) const;
  int f_count(int k) const;
  int p_offset(int k) const { return p_offset_.at(k); }
  int g_offset(int k) const { return g_offset_.at(k); }
  int f_offset(int k) const { return f_offset_.at(k); }

 private:
  std::vector<int> sigma_, outputs_, p_offset_, g_offset_, f_offset_;
  std::vector<std::vector<int>> fusion_column_;  // position -> column or -1
  int dimension_ = 0;
};

/// Optional decision variables replacing the fixed gamma^2 and omega^2.
struct PerformanceVariables {
  std::optional<int> gamma_squared;
  std::optional<int> omega_squared;
};

/// M^(k) + strictness * I as an affine block, plus its partition widths.
struct AssembledLmi {
  int estimator = 0;
  std::vector<int> widths;
  LmiBlock block;
};

/// Builds the coupled LMI of estimator k, including the completion-of-squares
/// blocks -R and -U on the diagonal.
AssembledLmi assemble_lmi(const EstimatorNetwork& net, const LmiStructure& structure,
                          const VariableLayout& layout, const SynthesisParams& params,
                          const PerformanceVariables& perf = {});

/// -P^(k) + shift * I <= 0, with an optional variable shift (coefficient +I).
LmiBlock positivity_block(int k, int sigma, const VariableLayout& layout, double shift,
                          std::optional<int> shift_variable = std::nullopt);

struct EstimatorGains {
  Matrix P;  // sigma x sigma, symmetric positive definite
  Matrix G;  // sigma x r
  Matrix F;  // sigma x sigma, nonzero only on fusion columns
  Matrix L;  // P^-1 G
  Matrix K;  // P^-1 F
};

struct GainCertificate {
  std::vector<EstimatorGains> gains;
  SynthesisParams params;  // resolved
  std::vector<double> margins;  // largest eigenvalue of each M^(k)
  std::vector<double> p_margins;  // smallest eigenvalue of each P^(k)
};

/// L = P^-1 G and K = P^-1 F by Cholesky solves. Throws Error(Numerical)
/// when P is not positive definite.
void extract_gains(EstimatorGains& gains);

/// Reads P, G, F of every estimator from a decision vector and extracts L, K.
std::vector<EstimatorGains> unpack(const Vector& x, const std::vector<LmiStructure>& structures,
                                   const VariableLayout& layout);

enum class SynthesisStatus { Feasible, Infeasible, NumericalFailure };

std::string to_string(SynthesisStatus status);

struct SynthesisOptions {
  SolverSettings solver;
  /// After feasibility, maximize the smallest eigenvalue of P and then
  /// minimize the largest gain entry at half of that floor. Keeps the
  /// observer gains moderate; without it the solver may return any point.
  bool condition = true;
  /// Relative gap for the conditioning stages.
  double conditioning_gap = 1e-4;
};

struct SynthesisOutcome {
  SynthesisStatus status = SynthesisStatus::NumericalFailure;
  std::optional<GainCertificate> certificate;
  std::string message;
  /// Uniform shift reached by the feasibility phase (negative = feasible).
  double feasibility_shift = 0.0;
  int iterations = 0;
};

/// Solves the N coupled LMIs jointly. The certificate is audited by
/// substituting the solution back into every block.
SynthesisOutcome solve_coupled(const EstimatorNetwork& net, const SynthesisParams& params,
                               const SynthesisOptions& options = {});

/// Phase-one feasibility verdict only (no conditioning, no certificate).
SynthesisStatus check_feasible(const EstimatorNetwork& net, const SynthesisParams& params,
                               const SolverSettings& settings = {});

/// The whole joint problem in solver-neutral form (feasibility, no extras).
ConicProblem build_problem(const EstimatorNetwork& net, const SynthesisParams& params);

enum class PerformanceMode { MinGamma, MinOmega, MinTrace };

struct PerformanceOutcome {
  SynthesisOutcome synthesis;
  double gamma = 0.0;
  double omega = 0.0;
  /// Relative width of the final bracket (bisection) or solver gap (trace).
  double relative_gap = 0.0;
};

/// Minimizes gamma (omega fixed), omega (gamma fixed) or t = gamma^2 = omega^2.
/// The starting params must be feasible; throws Error(Precondition) otherwise.
PerformanceOutcome optimize_performance(const EstimatorNetwork& net, const SynthesisParams& params,
                                        PerformanceMode mode, double relative_tolerance = 1e-3,
                                        const SynthesisOptions& options = {});

struct ParameterGrid {
  std::vector<double> alphas{0.01, 0.05, 0.1, 0.5};
  std::vector<double> pis{0.1, 1.0, 10.0};
};

struct ParameterSearchResult {
  bool found = false;
  SynthesisParams params;  // first feasible candidate, resolved
  int candidates_tried = 0;
};

/// Tries (alpha, pi) combinations in a fixed order: the given alpha before
/// the others, then fewest pi entries different from 1. Only estimators that
/// send estimates (some q > 0) get pi varied; the others keep pi = 1.
ParameterSearchResult search_parameters(const EstimatorNetwork& net, const SynthesisParams& base,
                                        const ParameterGrid& grid = {},
                                        const SolverSettings& settings = {});

}  // namespace coopest
