#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coopest/synthesis.hpp"

namespace coopest {

enum class DisturbanceKind { Zero, Sinusoid, Pulse, FilteredNoise };
enum class DisturbanceTarget { V, Eta };

/// One scalar disturbance channel. Channels and estimators are 0-based.
struct DisturbanceSpec {
  DisturbanceKind kind = DisturbanceKind::Zero;
  DisturbanceTarget target = DisturbanceTarget::V;
  int estimator = 0;  // for Eta
  int channel = 0;
  double amplitude = 0.0;
  double frequency = 0.0;  // Hz, sinusoid
  double phase = 0.0;      // rad, sinusoid
  double start = 0.0;      // pulse
  double width = 0.0;      // pulse
  std::uint64_t seed = 0;  // filtered noise
  double bandwidth = 1.0;  // rad/s corner of the low-pass, filtered noise
  double duration = 0.0;   // filtered noise is zero outside [0, duration]
};

/// A scalar signal compiled from its spec. Filtered noise is a seeded
/// Gaussian sequence on a grid of spacing 0.05 / bandwidth, passed through a
/// discrete first-order low-pass with stationary standard deviation equal to
/// the amplitude and linearly interpolated; it is zero outside [0, duration].
class Disturbance {
 public:
  explicit Disturbance(const DisturbanceSpec& spec);
  double operator()(double t) const;
  const DisturbanceSpec& spec() const { return spec_; }

 private:
  DisturbanceSpec spec_;
  std::vector<double> samples_;
  double spacing_ = 0.0;
};

/// Deterministic sample of one spec at time t.
double generate_disturbance(const DisturbanceSpec& spec, double t);

/// Sum of all specs, split into v(t) and eta(t) = [eta_1; ...; eta_N].
class DisturbanceSet {
 public:
  DisturbanceSet() = default;
  DisturbanceSet(const EstimatorNetwork& net, const std::vector<DisturbanceSpec>& specs);

  Vector v(double t) const;
  Vector eta(double t) const;
  bool empty() const { return signals_.empty(); }
  int v_dim() const { return v_dim_; }
  int eta_dim() const { return eta_dim_; }

 private:
  std::vector<Disturbance> signals_;
  std::vector<int> eta_offsets_;
  int v_dim_ = 0;
  int eta_dim_ = 0;
};

/// What estimator k receives from the others at one instant:
/// estimates of the external states it is coupled to (order of I_c^(k)) and
/// the neighbors' copies of the coordinates it shares (order of fusion edges).
struct EstimatorInbox {
  Vector external;
  Vector shared;
};

/// Estimator k in isolation: its state derivative depends only on its own
/// estimate, its own measurement and its inbox.
class LocalEstimator {
 public:
  LocalEstimator(const RepartitionedSystem& rep, const EstimatorGains& gains,
                 std::vector<int> shared_positions);

  Vector derivative(const Vector& xhat, const Vector& y, const EstimatorInbox& inbox) const;
  int states() const { return static_cast<int>(A_.rows()); }

 private:
  Matrix A_, L_, K_, C_, coupling_;
  std::vector<int> shared_positions_;  // position inside x^(k) of each shared entry
};

/// Source vertex (estimator, position) of every inbox slot of every estimator.
/// Built from the extended graph; construction fails if a slot has no edge.
class MessageRouter {
 public:
  struct Source {
    int estimator = 0;
    int position = 0;
  };
  explicit MessageRouter(const EstimatorNetwork& net);

  const std::vector<Source>& external_sources(int k) const { return external_.at(k); }
  const std::vector<Source>& shared_sources(int k) const { return shared_.at(k); }
  /// Positions inside x^(k) that each shared slot corrects.
  const std::vector<int>& shared_targets(int k) const { return targets_.at(k); }
  EstimatorInbox collect(int k, const std::vector<Vector>& estimates) const;

 private:
  std::vector<std::vector<Source>> external_;
  std::vector<std::vector<Source>> shared_;
  std::vector<std::vector<int>> targets_;
};

enum class Integrator { Compiled, Structured };

struct SimulationOptions {
  /// Step size; empty means min(1e-2, 0.1 / ||A_err||_inf).
  std::optional<double> dt;
  /// Keep every stride-th step (the final step is always kept).
  int record_stride = 1;
  /// Compiled: the RK4 step of the structured system, probed once into a
  /// matrix form. Structured: evaluate every estimator separately each stage.
  Integrator integrator = Integrator::Compiled;
  /// Called after every step with (step, t, x, stacked xhat).
  std::function<void(long, double, const Vector&, const Vector&)> observer;
};

/// Recorded samples; column i of each matrix belongs to times[i].
struct SimulationTrace {
  std::vector<double> times;
  Matrix x;      // n x samples
  Matrix xhat;   // sum sigma_k x samples, stacked per estimator
  Matrix v;      // m x samples
  Matrix eta;    // sum r_k x samples
  std::vector<int> offsets;  // first row of xhat^(k)
  std::vector<std::vector<int>> selected_rows;  // global rows of x^(k)
  double dt = 0.0;
  long steps = 0;

  int samples() const { return static_cast<int>(times.size()); }
  /// eps^(k) at sample i, recomputed as x^(k) - xhat^(k).
  Vector error(int k, int i) const;
  /// Stacked eps at sample i.
  Vector stacked_error(int i) const;
};

double default_step(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains);

/// Fixed-step classical RK4 on the plant plus all estimators, estimators
/// starting at zero. Throws Error(Numerical) naming the first non-finite step.
SimulationTrace simulate(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                         const DisturbanceSet& disturbances, const Vector& x0, double horizon,
                         const SimulationOptions& options = {});

struct PerformanceReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double initial_term = 0.0;  // I_0
  double ratio = 0.0;
  double quadrature_error = 0.0;
  bool passed = false;  // lhs <= rhs (1 + 1e-3)
};

/// Trapezoidal quadrature of both sides of the performance inequality on the
/// recorded grid; the error estimate compares with Simpson's rule.
PerformanceReport evaluate_performance(const SimulationTrace& trace,
                                       const std::vector<EstimatorGains>& gains,
                                       const SynthesisParams& params, const Vector& x0);

/// sum_k eps^(k)' P^(k) eps^(k).
double lyapunov_value(const std::vector<EstimatorGains>& gains, const std::vector<int>& offsets,
                      const Vector& stacked_error);

/// CSV with header t,x_<k>_<i>...,xhat_<k>_<pos>...,eps_norm_<k>...; 17 significant digits.
std::string trace_csv(const SimulationTrace& trace, const EstimatorNetwork& net);

/// Error norms versus time, one polyline per estimator, log scale.
std::string trace_svg(const SimulationTrace& trace);

}  // namespace coopest
