#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coopest/common.hpp"

namespace coopest {

/// Affine symmetric-matrix-valued map F(x) = constant + sum_j x_j * coefficient_j,
/// constrained to F(x) <= 0 (negative semidefinite).
struct LmiBlock {
  std::string label;
  Matrix constant;
  /// (decision index, symmetric coefficient); indices may repeat and are summed.
  std::vector<std::pair<int, Matrix>> terms;

  int size() const { return static_cast<int>(constant.rows()); }
  Matrix evaluate(const Vector& x) const;
};

struct ConicProblem {
  int dimension = 0;
  /// Minimized; an empty vector means pure feasibility.
  Vector objective;
  std::vector<LmiBlock> blocks;

  /// Throws Error(Dimension) or Error(Validation) for a malformed problem.
  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string to_string(SolveStatus status);

struct SolverSettings {
  /// Audit threshold on the largest eigenvalue of every block.
  double tolerance = 1e-8;
  /// Newton steps over both phases.
  int max_iterations = 500;
  /// Every decision variable is boxed to [-bound, bound].
  double variable_bound = 1e6;
  /// Relative barrier gap at which the optimization phase stops.
  double gap_tolerance = 1e-8;
  /// Stop as soon as a strictly feasible point is found, ignoring the objective.
  bool feasibility_only = false;
  std::optional<Vector> start;
};

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x;
  /// Audited largest eigenvalue of each block at x (empty unless x is set).
  std::vector<double> block_max_eigenvalues;
  double objective = 0.0;
  /// Lower bound on the duality gap of the returned point (optimal only).
  double gap = 0.0;
  /// Smallest uniform shift s with F_i(x) <= s*I reached by the feasibility phase.
  double feasibility_shift = 0.0;
  int iterations = 0;
  std::string message;
};

/// Primal log-barrier interior-point method: a shifted feasibility phase
/// followed by a central-path phase on the objective. The returned status is
/// Optimal only if the independent eigenvalue audit passes for every block.
SolveResult solve(const ConicProblem& problem, const SolverSettings& settings = {});

/// Text serialization: block sizes followed by "var row col value" triplets.
std::string dump(const ConicProblem& problem);

}  // namespace coopest
