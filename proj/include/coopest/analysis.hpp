#pragma once

#include <vector>

#include "coopest/synthesis.hpp"

namespace coopest {

/// Stacked estimation error eps = [eps^(1); ...; eps^(N)] driven by v and eta:
///   eps' = A eps + B_v v + B_eta eta,   z = C_z eps,
/// with eta = [eta_1; ...; eta_N] and z weighted by W^(k)^(1/2).
struct ErrorSystem {
  std::vector<int> offsets;      // first row of eps^(k)
  std::vector<int> eta_offsets;  // first column of eta_k inside B_eta
  Matrix A;
  Matrix B_v;
  Matrix B_eta;
  Matrix C_z;

  int dimension() const { return static_cast<int>(A.rows()); }
  int estimators() const { return static_cast<int>(offsets.size()); }
};

/// Symmetric square root with negative eigenvalues above -1e-12 clipped to 0.
Matrix psd_sqrt(const Matrix& W);

ErrorSystem assemble_error_system(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                                  const std::vector<Matrix>& W);

/// blockdiag(P^(1), ..., P^(N)).
Matrix stacked_lyapunov(const std::vector<EstimatorGains>& gains);

struct StabilityReport {
  double abscissa = 0.0;
  /// Largest eigenvalue of A^T P + P A + alpha P.
  double certificate_max_eigenvalue = 0.0;
  double certificate_tolerance = 0.0;
  bool stable = false;
  bool certificate_holds = false;
  bool passed() const { return stable && certificate_holds; }
};

StabilityReport check_stability(const ErrorSystem& es, const Matrix& P, double alpha);

struct LmiResidualReport {
  std::vector<double> margins;        // largest eigenvalue of each M^(k)
  std::vector<double> schur_margins;  // largest eigenvalue of the Schur-reduced form
  std::vector<double> p_margins;      // smallest eigenvalue of each P^(k)
  double threshold = 0.0;             // -strictness + 1e-9
  bool passed = false;
};

/// Recomputes every M^(k) numerically from the gains (without the affine
/// assembly used by the solver) and checks M^(k) <= -strictness up to 1e-9.
LmiResidualReport check_lmi_residuals(const EstimatorNetwork& net,
                                      const std::vector<EstimatorGains>& gains,
                                      const SynthesisParams& params);

/// The numeric M^(k) used by check_lmi_residuals.
Matrix evaluate_lmi(const EstimatorNetwork& net, const std::vector<EstimatorGains>& gains,
                    const SynthesisParams& params, int k);

struct FrequencyGrid {
  int points = 400;
  double low = 1e-3;
  double high = 1e3;
  bool refine = true;
};

struct FrequencyReport {
  double sup = 0.0;
  double at_frequency = 0.0;
  int evaluations = 0;
  bool passed = false;  // sup <= 1 + 1e-6
};

/// Largest singular value of C_z (jw I - A)^-1 [B_v / (sqrt(N) omega) | B_eta / gamma]
/// over the grid. The sqrt(N) accounts for each of the N estimators seeing
/// the full v. Throws Error(Precondition) if A is not Hurwitz.
FrequencyReport check_hinf_frequency(const ErrorSystem& es, double gamma, double omega,
                                     const FrequencyGrid& grid = {});

/// sigma_max(C (jw I - A)^-1 B).
double gain_at(const Matrix& A, const Matrix& B, const Matrix& C, double w);

/// H-infinity norm of (A, B, C, 0) by Hamiltonian bisection, relative tolerance tol.
double hinf_norm(const Matrix& A, const Matrix& B, const Matrix& C, double tol = 1e-6);

/// The scaled input matrix used by the frequency audit.
Matrix scaled_input(const ErrorSystem& es, double gamma, double omega);

/// exp(A t) x0 via the matrix exponential.
Vector propagate(const Matrix& A, const Vector& x0, double t);

}  // namespace coopest
