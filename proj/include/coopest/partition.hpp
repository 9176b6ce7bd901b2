#pragma once

#include <map>
#include <optional>
#include <vector>

#include "coopest/model.hpp"

namespace coopest {

/// The ordered list of global states estimator `owner` reconstructs.
/// Position i of the image is the state stored at x^(k)_i.
class SelectionFunction {
 public:
  SelectionFunction() = default;
  /// Throws Error(Validation) on duplicates or out-of-range indices.
  SelectionFunction(int owner, std::vector<StateIndex> image, const IndexSpace& space);

  int owner() const { return owner_; }
  int size() const { return static_cast<int>(image_.size()); }
  const std::vector<StateIndex>& image() const { return image_; }
  const StateIndex& at(int position) const { return image_.at(position); }
  bool contains(const StateIndex& s) const { return inverse_.count(s) > 0; }
  /// Inverse lookup; empty when s is not selected.
  std::optional<int> position(const StateIndex& s) const;

 private:
  int owner_ = 0;
  std::vector<StateIndex> image_;
  std::map<StateIndex, int> inverse_;
};

/// Which estimator is responsible for broadcasting the estimate of each state
/// (std::nullopt = no estimator selects it).
class AssignmentFunction {
 public:
  AssignmentFunction() = default;
  explicit AssignmentFunction(const IndexSpace& space);

  std::optional<int> operator()(const StateIndex& s) const;
  void assign(const StateIndex& s, std::optional<int> estimator);
  const std::map<StateIndex, std::optional<int>>& entries() const { return map_; }

 private:
  std::map<StateIndex, std::optional<int>> map_;
};

/// One estimator's view of the plant after permuting x into (x^(k), x_c^(k)):
///   x^(k)' = A x^(k) + sum_{l in external} coupling.col(l) x_l + B v,  y_k = C x^(k) + eta_k.
struct RepartitionedSystem {
  int owner = 0;
  std::vector<StateIndex> selected;   // I^(k) in selection order
  Matrix A;                           // sigma x sigma
  std::vector<StateIndex> external;   // I_c^(k), canonical order
  Matrix coupling;                    // sigma x |I_c|, column j drives from external[j]
  Matrix B;                           // sigma x m
  Matrix C;                           // r_k x sigma
  // Complement blocks of the permuted system, kept for diagnostics.
  std::vector<StateIndex> complement;  // all states outside I^(k), canonical order
  Matrix A_tilde_full;                 // sigma x |complement|
  Matrix A_c_tilde;                    // |complement| x sigma
  Matrix A_c;                          // |complement| x |complement|
  Matrix B_c;

  int sigma() const { return static_cast<int>(selected.size()); }
};

struct PartitionViolation {
  int estimator = 0;
  StateIndex state;  // read by y_k but not selected by estimator k
};

struct PartitionReport {
  std::vector<PartitionViolation> violations;
  bool passed() const { return violations.empty(); }
};

enum class AssignmentIssue {
  NotSelectedByAssignee,  // zeta(l) = j but l not in I^(j)
  UnassignedButSelected,  // zeta(l) = none but some I^(k) contains l
  Uncovered,              // no estimator selects l (fatal for an observable, well-connected plant)
  UnknownEstimator,
};

struct AssignmentViolation {
  StateIndex state;
  std::optional<int> assigned;
  AssignmentIssue issue = AssignmentIssue::Uncovered;
};

struct AssignmentReport {
  std::vector<AssignmentViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Every nonzero column of the rows of C belonging to y_k must be selected by
/// estimator k, so y_k = C^(k) x^(k) + eta_k holds exactly.
PartitionReport validate_partition(const InterconnectedSystem& sys,
                                   const std::vector<SelectionFunction>& selections);

/// Checks the two assignment invariants plus coverage of every state.
AssignmentReport validate_assignment(const IndexSpace& space,
                                     const std::vector<SelectionFunction>& selections,
                                     const AssignmentFunction& zeta);

/// zeta(l) = smallest k with l in I^(k), none if no estimator selects l.
AssignmentFunction default_assignment(const IndexSpace& space,
                                      const std::vector<SelectionFunction>& selections);

RepartitionedSystem repartition(const InterconnectedSystem& sys,
                                const std::vector<SelectionFunction>& selections, int k);

/// Rows of the global A belonging to I^(k), rebuilt from the repartitioned
/// blocks (|I^(k)| x n). Inverse of repartition on those rows.
Matrix embed_rows(const InterconnectedSystem& sys, const RepartitionedSystem& rep);

}  // namespace coopest
