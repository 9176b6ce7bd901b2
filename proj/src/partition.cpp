#include "coopest/partition.hpp"

#include <algorithm>
#include <set>

namespace coopest {

SelectionFunction::SelectionFunction(int owner, std::vector<StateIndex> image,
                                     const IndexSpace& space)
    : owner_(owner), image_(std::move(image)) {
  if (static_cast<int>(image_.size()) > space.size())
    throw Error(ErrorKind::Validation, "estimator " + std::to_string(owner + 1) +
                                           " selects more states than the plant has");
  for (int i = 0; i < static_cast<int>(image_.size()); ++i) {
    const auto& s = image_[i];
    if (!space.contains(s))
      throw Error(ErrorKind::Validation, "estimator " + std::to_string(owner + 1) +
                                             " selects unknown state " + to_string(s));
    if (!inverse_.emplace(s, i).second)
      throw Error(ErrorKind::Validation, "estimator " + std::to_string(owner + 1) +
                                             " selects state " + to_string(s) + " twice");
  }
}

std::optional<int> SelectionFunction::position(const StateIndex& s) const {
  const auto it = inverse_.find(s);
  if (it == inverse_.end()) return std::nullopt;
  return it->second;
}

AssignmentFunction::AssignmentFunction(const IndexSpace& space) {
  for (const auto& s : space.entries()) map_.emplace(s, std::nullopt);
}

std::optional<int> AssignmentFunction::operator()(const StateIndex& s) const {
  const auto it = map_.find(s);
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void AssignmentFunction::assign(const StateIndex& s, std::optional<int> estimator) {
  map_[s] = estimator;
}

PartitionReport validate_partition(const InterconnectedSystem& sys,
                                   const std::vector<SelectionFunction>& selections) {
  if (static_cast<int>(selections.size()) != sys.subsystem_count())
    throw Error(ErrorKind::Validation, "expected one selection per subsystem (" +
                                           std::to_string(sys.subsystem_count()) + "), got " +
                                           std::to_string(selections.size()));
  PartitionReport report;
  for (int k = 0; k < sys.subsystem_count(); ++k) {
    const Matrix rows = sys.output_block(k);
    for (int col = 0; col < sys.state_dim(); ++col) {
      if (rows.rows() == 0 || rows.col(col).isZero(0.0)) continue;
      const StateIndex s = sys.index.local(col);
      if (!selections[k].contains(s)) report.violations.push_back({k, s});
    }
  }
  return report;
}

AssignmentReport validate_assignment(const IndexSpace& space,
                                     const std::vector<SelectionFunction>& selections,
                                     const AssignmentFunction& zeta) {
  AssignmentReport report;
  const int N = static_cast<int>(selections.size());
  for (const auto& s : space.entries()) {
    const bool covered = std::any_of(selections.begin(), selections.end(),
                                     [&](const SelectionFunction& f) { return f.contains(s); });
    const auto owner = zeta(s);
    if (owner) {
      if (*owner < 0 || *owner >= N) {
        report.violations.push_back({s, owner, AssignmentIssue::UnknownEstimator});
      } else if (!selections[*owner].contains(s)) {
        report.violations.push_back({s, owner, AssignmentIssue::NotSelectedByAssignee});
      }
    } else if (covered) {
      report.violations.push_back({s, owner, AssignmentIssue::UnassignedButSelected});
    }
    if (!covered) report.violations.push_back({s, owner, AssignmentIssue::Uncovered});
  }
  return report;
}

AssignmentFunction default_assignment(const IndexSpace& space,
                                      const std::vector<SelectionFunction>& selections) {
  AssignmentFunction zeta(space);
  for (const auto& s : space.entries()) {
    for (const auto& f : selections) {
      if (f.contains(s)) {
        zeta.assign(s, f.owner());
        break;
      }
    }
  }
  return zeta;
}

RepartitionedSystem repartition(const InterconnectedSystem& sys,
                                const std::vector<SelectionFunction>& selections, int k) {
  const auto& sel = selections.at(k);
  RepartitionedSystem rep;
  rep.owner = k;
  rep.selected = sel.image();
  const int sigma = sel.size();
  const int n = sys.state_dim();

  std::vector<int> rows;
  rows.reserve(sigma);
  for (const auto& s : rep.selected) rows.push_back(sys.index.global(s));
  std::vector<int> comp;
  for (int g = 0; g < n; ++g) {
    const StateIndex s = sys.index.local(g);
    if (!sel.contains(s)) {
      comp.push_back(g);
      rep.complement.push_back(s);
    }
  }

  rep.A = sys.A(rows, rows);
  rep.B = sys.B(rows, Eigen::placeholders::all);
  rep.C = sys.output_block(k)(Eigen::placeholders::all, rows);
  rep.A_tilde_full = sys.A(rows, comp);
  rep.A_c_tilde = sys.A(comp, rows);
  rep.A_c = sys.A(comp, comp);
  rep.B_c = sys.B(comp, Eigen::placeholders::all);

  std::vector<int> external_cols;
  for (std::size_t c = 0; c < comp.size(); ++c) {
    if (!rep.A_tilde_full.col(static_cast<Eigen::Index>(c)).isZero(0.0)) {
      external_cols.push_back(static_cast<int>(c));
      rep.external.push_back(rep.complement[c]);
    }
  }
  rep.coupling = rep.A_tilde_full(Eigen::placeholders::all, external_cols);
  return rep;
}

Matrix embed_rows(const InterconnectedSystem& sys, const RepartitionedSystem& rep) {
  Matrix out = Matrix::Zero(rep.sigma(), sys.state_dim());
  for (int i = 0; i < rep.sigma(); ++i) {
    for (int j = 0; j < rep.sigma(); ++j) out(i, sys.index.global(rep.selected[j])) = rep.A(i, j);
    for (std::size_t c = 0; c < rep.complement.size(); ++c)
      out(i, sys.index.global(rep.complement[c])) = rep.A_tilde_full(i, static_cast<Eigen::Index>(c));
  }
  return out;
}

}  // namespace coopest
