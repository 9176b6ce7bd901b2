#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace coopest {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Position of a scalar state x_{k,i} inside the global index space.
/// Both fields are 0-based; user-facing text is 1-based (see to_string).
struct StateIndex {
  int subsystem = 0;
  int component = 0;

  auto operator<=>(const StateIndex&) const = default;
};

/// "(k,i)" with 1-based indices.
std::string to_string(const StateIndex& s);

enum class ErrorKind {
  Dimension,
  Duplicate,
  Validation,
  Precondition,
  Parse,
  Numerical,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Upper bound on worker threads: COOPEST_THREADS if set and positive,
/// otherwise the hardware concurrency (at least 1).
int thread_budget();

/// Runs body(i) for i in [0, count) on at most thread_budget() threads.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Largest eigenvalue of the symmetric part of m.
double max_symmetric_eigenvalue(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double min_symmetric_eigenvalue(const Matrix& m);

}  // namespace coopest
