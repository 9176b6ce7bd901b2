#include "coopest/lmi_engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace coopest {

Matrix LmiBlock::evaluate(const Vector& x) const {
  Matrix out = constant;
  for (const auto& [var, coeff] : terms) out += x(var) * coeff;
  return out;
}

void ConicProblem::validate() const {
  if (dimension < 0) throw Error(ErrorKind::Dimension, "negative decision dimension");
  if (objective.size() != 0 && objective.size() != dimension)
    throw Error(ErrorKind::Dimension, "objective has " + std::to_string(objective.size()) +
                                          " entries, expected " + std::to_string(dimension));
  for (const auto& b : blocks) {
    if (b.constant.rows() < 1 || b.constant.rows() != b.constant.cols())
      throw Error(ErrorKind::Dimension, "block '" + b.label + "' must be square and nonempty");
    const double scale = std::max(1.0, b.constant.cwiseAbs().maxCoeff());
    if ((b.constant - b.constant.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw Error(ErrorKind::Validation, "block '" + b.label + "' has a nonsymmetric constant");
    for (const auto& [var, coeff] : b.terms) {
      if (var < 0 || var >= dimension)
        throw Error(ErrorKind::Dimension, "block '" + b.label + "' references variable " +
                                              std::to_string(var) + " outside the decision vector");
      if (coeff.rows() != b.constant.rows() || coeff.cols() != b.constant.cols())
        throw Error(ErrorKind::Dimension,
                    "block '" + b.label + "' has a coefficient of the wrong size for variable " +
                        std::to_string(var));
      const double cs = std::max(1.0, coeff.cwiseAbs().maxCoeff());
      if ((coeff - coeff.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cs)
        throw Error(ErrorKind::Validation, "block '" + b.label +
                                               "' has a nonsymmetric coefficient for variable " +
                                               std::to_string(var));
    }
  }
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

namespace {

struct Entry {
  int row;
  int col;
  double value;
};

struct SparseTerm {
  int var = 0;
  std::vector<Entry> entries;
  Matrix dense;  // kept when the sparse form would be slower
  bool use_dense = false;
};

struct CompiledBlock {
  int size = 0;
  Matrix constant;
  std::vector<SparseTerm> terms;
};

CompiledBlock compile(const LmiBlock& block) {
  CompiledBlock out;
  out.size = block.size();
  out.constant = 0.5 * (block.constant + block.constant.transpose());
  std::map<int, Matrix> merged;
  for (const auto& [var, coeff] : block.terms) {
    auto it = merged.find(var);
    if (it == merged.end())
      merged.emplace(var, 0.5 * (coeff + coeff.transpose()));
    else
      it->second += 0.5 * (coeff + coeff.transpose());
  }
  for (auto& [var, coeff] : merged) {
    SparseTerm term;
    term.var = var;
    for (int c = 0; c < coeff.cols(); ++c)
      for (int r = 0; r < coeff.rows(); ++r)
        if (coeff(r, c) != 0.0) term.entries.push_back({r, c, coeff(r, c)});
    if (term.entries.empty()) continue;
    term.use_dense = static_cast<int>(term.entries.size()) > 2 * out.size;
    if (term.use_dense) term.dense = std::move(coeff);
    out.terms.push_back(std::move(term));
  }
  return out;
}

// Log-barrier of {y : F_i(y) < 0 for all blocks, |y_i| < bound for i < boxed}.
class Barrier {
 public:
  Barrier(std::vector<CompiledBlock> blocks, int dimension, int boxed, double bound)
      : blocks_(std::move(blocks)), dimension_(dimension), boxed_(boxed), bound_(bound) {}

  int dimension() const { return dimension_; }

  double degree() const {
    double d = 2.0 * boxed_;
    for (const auto& b : blocks_) d += b.size;
    return d;
  }

  Matrix slack(const CompiledBlock& b, const Vector& y) const {
    Matrix S = -b.constant;
    for (const auto& t : b.terms) {
      const double v = y(t.var);
      if (v == 0.0) continue;
      if (t.use_dense) {
        S.noalias() -= v * t.dense;
      } else {
        for (const auto& e : t.entries) S(e.row, e.col) -= v * e.value;
      }
    }
    return S;
  }

  // Returns +inf outside the domain.
  double value(const Vector& y) const {
    double phi = 0.0;
    for (int i = 0; i < boxed_; ++i) {
      const double lo = bound_ + y(i);
      const double hi = bound_ - y(i);
      if (!(lo > 0.0 && hi > 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(lo) + std::log(hi);
    }
    for (const auto& b : blocks_) {
      Eigen::LLT<Matrix> llt(slack(b, y));
      if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
      const auto diag = llt.matrixLLT().diagonal();
      for (int i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0) || !std::isfinite(diag(i)))
          return std::numeric_limits<double>::infinity();
        phi -= 2.0 * std::log(diag(i));
      }
    }
    return phi;
  }

  // Gradient and Hessian at a point inside the domain; false if y is outside.
  bool derivatives(const Vector& y, Vector& grad, Matrix& hess) const {
    grad = Vector::Zero(dimension_);
    hess = Matrix::Zero(dimension_, dimension_);
    for (int i = 0; i < boxed_; ++i) {
      const double lo = bound_ + y(i);
      const double hi = bound_ - y(i);
      if (!(lo > 0.0 && hi > 0.0)) return false;
      grad(i) += 1.0 / hi - 1.0 / lo;
      hess(i, i) += 1.0 / (hi * hi) + 1.0 / (lo * lo);
    }
    for (const auto& b : blocks_) {
      Eigen::LLT<Matrix> llt(slack(b, y));
      if (llt.info() != Eigen::Success) return false;
      const Matrix Sinv = llt.solve(Matrix::Identity(b.size, b.size));
      // W_t = S^-1 F_t S^-1, so d phi / d y_t = tr(S^-1 F_t) and
      // d^2 phi / d y_s d y_t = tr(F_s W_t).
      std::vector<Matrix> W(b.terms.size());
      for (std::size_t t = 0; t < b.terms.size(); ++t) {
        const auto& term = b.terms[t];
        if (term.use_dense) {
          W[t].noalias() = Sinv * term.dense * Sinv;
          grad(term.var) += Sinv.cwiseProduct(term.dense).sum();
        } else {
          W[t] = Matrix::Zero(b.size, b.size);
          for (const auto& e : term.entries) {
            W[t].noalias() += e.value * Sinv.col(e.row) * Sinv.row(e.col);
            grad(term.var) += e.value * Sinv(e.col, e.row);
          }
        }
      }
      for (std::size_t s = 0; s < b.terms.size(); ++s) {
        const auto& ts = b.terms[s];
        for (std::size_t t = s; t < b.terms.size(); ++t) {
          double h = 0.0;
          if (ts.use_dense) {
            h = ts.dense.cwiseProduct(W[t]).sum();
          } else {
            for (const auto& e : ts.entries) h += e.value * W[t](e.col, e.row);
          }
          hess(ts.var, b.terms[t].var) += h;
          if (s != t) hess(b.terms[t].var, ts.var) += h;
        }
      }
    }
    return true;
  }

 private:
  std::vector<CompiledBlock> blocks_;
  int dimension_;
  int boxed_;
  double bound_;
};

enum class CenterOutcome { Centered, EarlyStop, Stalled, Budget, Numerical };

// Damped Newton minimization of tau * c'y + phi(y) from a strictly feasible y.
CenterOutcome center(const Barrier& barrier, const Vector& c, double tau, Vector& y,
                     int& iterations, int budget,
                     const std::function<bool(const Vector&)>& early_stop) {
  Vector grad;
  Matrix hess;
  double f = tau * c.dot(y) + barrier.value(y);
  while (true) {
    if (early_stop && early_stop(y)) return CenterOutcome::EarlyStop;
    if (iterations >= budget) return CenterOutcome::Budget;
    if (!barrier.derivatives(y, grad, hess)) return CenterOutcome::Numerical;
    grad += tau * c;
    Eigen::LLT<Matrix> llt(hess);
    Vector step;
    if (llt.info() == Eigen::Success) {
      step = -llt.solve(grad);
    } else {
      const double shift = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<Matrix> ldlt(hess + shift * Matrix::Identity(hess.rows(), hess.cols()));
      step = -ldlt.solve(grad);
    }
    if (!step.allFinite()) return CenterOutcome::Numerical;
    ++iterations;
    const double decrement = -grad.dot(step);
    if (decrement < 0.0) return CenterOutcome::Numerical;
    // Below this the objective cannot resolve a Newton step anymore.
    const double resolution = 1e-13 * std::max(1.0, std::abs(f));
    if (decrement / 2.0 <= std::max(1e-10, resolution)) return CenterOutcome::Centered;

    double t = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    Vector candidate;
    while (t > 1e-14) {
      candidate = y + t * step;
      f_new = tau * c.dot(candidate) + barrier.value(candidate);
      if (std::isfinite(f_new) && f_new <= f - 0.25 * t * decrement) break;
      t *= 0.5;
    }
    if (!(t > 1e-14)) return CenterOutcome::Stalled;
    y = std::move(candidate);
    const bool progressed = f_new < f;
    f = f_new;
    if (!progressed) return CenterOutcome::Centered;
  }
}

double max_block_eigenvalue(const std::vector<CompiledBlock>& blocks, const Vector& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : blocks) {
    Matrix F = b.constant;
    for (const auto& t : b.terms) {
      if (t.use_dense) {
        F += x(t.var) * t.dense;
      } else {
        for (const auto& e : t.entries) F(e.row, e.col) += x(t.var) * e.value;
      }
    }
    worst = std::max(worst, max_symmetric_eigenvalue(F));
  }
  return worst;
}

void audit(const ConicProblem& problem, SolveResult& result, double tolerance) {
  result.block_max_eigenvalues.clear();
  bool ok = result.x.allFinite();
  for (const auto& b : problem.blocks) {
    const Matrix F = b.evaluate(result.x);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (F + F.transpose()), Eigen::EigenvaluesOnly);
    const double top = eig.info() == Eigen::Success
                           ? eig.eigenvalues().maxCoeff()
                           : std::numeric_limits<double>::infinity();
    result.block_max_eigenvalues.push_back(top);
    if (!(top <= tolerance)) ok = false;
  }
  if (!ok) {
    result.status = SolveStatus::NumericalFailure;
    result.message = "audit failed: a constraint block exceeds the eigenvalue tolerance";
  }
}

}  // namespace

SolveResult solve(const ConicProblem& problem, const SolverSettings& settings) {
  problem.validate();
  const int d = problem.dimension;
  const double R = settings.variable_bound;
  const Vector c = problem.objective.size() == 0 ? Vector::Zero(d) : problem.objective;
  const bool optimize = !settings.feasibility_only && c.cwiseAbs().maxCoeff() > 0.0;

  std::vector<CompiledBlock> blocks;
  blocks.reserve(problem.blocks.size());
  for (const auto& b : problem.blocks) blocks.push_back(compile(b));

  SolveResult result;
  Vector x = Vector::Zero(d);
  if (settings.start) {
    if (settings.start->size() != d)
      throw Error(ErrorKind::Dimension, "start vector has the wrong dimension");
    x = settings.start->cwiseMax(-0.5 * R).cwiseMin(0.5 * R);
  }

  // Feasibility phase: minimize s subject to F_i(x) - s I < 0 and the box.
  if (!blocks.empty()) {
    std::vector<CompiledBlock> shifted = blocks;
    for (auto& b : shifted) {
      SparseTerm s;
      s.var = d;
      for (int i = 0; i < b.size; ++i) s.entries.push_back({i, i, -1.0});
      b.terms.push_back(std::move(s));
    }
    const Barrier barrier(std::move(shifted), d + 1, d, R);
    const double top = max_block_eigenvalue(blocks, x);
    Vector y(d + 1);
    y.head(d) = x;
    y(d) = top + 1.0 + 0.1 * std::abs(top);
    Vector cs = Vector::Zero(d + 1);
    cs(d) = 1.0;

    const auto feasible = [&](const Vector& v) { return v(d) < 0.0; };
    double tau = 1.0 / std::max(1.0, std::abs(y(d)));
    bool found = false;
    while (true) {
      const auto outcome =
          center(barrier, cs, tau, y, result.iterations, settings.max_iterations, feasible);
      result.feasibility_shift = y(d);
      if (outcome == CenterOutcome::EarlyStop || feasible(y)) {
        found = true;
        break;
      }
      if (outcome == CenterOutcome::Budget) {
        result.status = SolveStatus::NumericalFailure;
        result.message = "iteration budget exhausted while searching for a feasible point";
        return result;
      }
      const double gap = barrier.degree() / tau;
      if (y(d) - gap > 0.0) {
        result.status = SolveStatus::Infeasible;
        result.message = "no strictly feasible point: shift is bounded below by " +
                         std::to_string(y(d) - gap);
        return result;
      }
      if (gap < 1e-10 || outcome == CenterOutcome::Numerical ||
          outcome == CenterOutcome::Stalled) {
        result.status = SolveStatus::Infeasible;
        result.message = "feasible set has no interior above solver precision (shift " +
                         std::to_string(y(d)) + ")";
        return result;
      }
      tau *= 10.0;
    }
    if (found) x = y.head(d);
  }

  double gap = 0.0;
  if (optimize) {
    const Barrier barrier(blocks, d, d, R);
    const double degree = barrier.degree();
    double tau = degree / std::max(1.0, std::abs(c.dot(x)));
    while (true) {
      const auto outcome = center(barrier, c, tau, x, result.iterations, settings.max_iterations, {});
      gap = degree / tau;
      if (outcome == CenterOutcome::Budget) {
        result.status = SolveStatus::NumericalFailure;
        result.message = "iteration budget exhausted during optimization";
        result.x = x;
        result.objective = c.dot(x);
        result.gap = gap;
        return result;
      }
      if (outcome == CenterOutcome::Numerical || outcome == CenterOutcome::Stalled) {
        result.message = "optimization stopped at relative gap " +
                         std::to_string(gap / std::max(1.0, std::abs(c.dot(x))));
        break;
      }
      if (gap <= settings.gap_tolerance * std::max(1.0, std::abs(c.dot(x)))) break;
      tau *= 10.0;
    }
  }

  result.status = SolveStatus::Optimal;
  result.x = x;
  result.objective = c.dot(x);
  result.gap = gap;
  audit(problem, result, settings.tolerance);
  return result;
}

std::string dump(const ConicProblem& problem) {
  std::ostringstream out;
  out.precision(17);
  out << "dimension " << problem.dimension << "\n";
  out << "objective";
  for (int i = 0; i < problem.objective.size(); ++i)
    if (problem.objective(i) != 0.0) out << " " << i << ":" << problem.objective(i);
  out << "\n";
  out << "blocks " << problem.blocks.size() << "\n";
  for (const auto& b : problem.blocks) {
    out << "block " << (b.label.empty() ? "-" : b.label) << " " << b.size() << "\n";
    for (int r = 0; r < b.size(); ++r)
      for (int col = r; col < b.size(); ++col)
        if (b.constant(r, col) != 0.0) out << "c " << r << " " << col << " " << b.constant(r, col) << "\n";
    for (const auto& [var, coeff] : b.terms)
      for (int r = 0; r < b.size(); ++r)
        for (int col = r; col < b.size(); ++col)
          if (coeff(r, col) != 0.0)
            out << "v " << var << " " << r << " " << col << " " << coeff(r, col) << "\n";
  }
  return out.str();
}

}  // namespace coopest
