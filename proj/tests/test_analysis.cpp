#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::example_certificate;
using coopest::testing::example_network;
using coopest::testing::mat;
using coopest::testing::scalar_network;

namespace {

ErrorSystem manual_system(const Matrix& A) {
  ErrorSystem es;
  es.offsets = {0};
  es.eta_offsets = {0};
  es.A = A;
  es.B_v = Matrix::Zero(A.rows(), 1);
  es.B_eta = Matrix::Identity(A.rows(), A.rows());
  es.C_z = Matrix::Identity(A.rows(), A.rows());
  return es;
}

struct ExampleAudit {
  SynthesisParams params;
  ErrorSystem es;
};

const ExampleAudit& example_audit() {
  static const ExampleAudit a = [] {
    const auto& net = example_network();
    const auto& c = example_certificate();
    ExampleAudit out;
    out.params = resolve_params(c.params, net);
    out.es = assemble_error_system(net, c.gains, out.params.W);
    return out;
  }();
  return a;
}

}  // namespace

TEST_CASE("psd square root squares back and clips round-off negatives") {
  const Matrix W = mat({{4, 1}, {1, 3}});
  const Matrix R = psd_sqrt(W);
  CHECK((R * R - W).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(psd_sqrt(mat({{-1e-14}}))(0, 0) == 0.0);
  CHECK_THROWS_AS(psd_sqrt(mat({{-1e-6}})), Error);
}

TEST_CASE("a single decoupled estimator has error matrix A - L C") {
  const auto net = scalar_network(0.5, 1.0, 2.0);
  EstimatorGains g{mat({{1.0}}), mat({{3.0}}), mat({{0.0}}), mat({{3.0}}), mat({{7.0}})};
  const auto es = assemble_error_system(net, {g}, {mat({{4.0}})});
  CHECK(es.A == mat({{0.5 - 3.0 * 2.0}}));
  CHECK(es.B_v == mat({{1.0}}));
  CHECK(es.B_eta == mat({{-3.0}}));
  CHECK(es.C_z == mat({{2.0}}));
}

TEST_CASE("error system of the nine-state example is 10 x 10 with coupling entries in place") {
  const auto& es = example_audit().es;
  const auto& c = example_certificate();
  CHECK(es.dimension() == 10);
  CHECK(es.offsets == std::vector<int>{0, 2, 5, 7});
  CHECK(es.B_v.rows() == 10);
  CHECK(es.B_eta.cols() == 4);
  // Columns 5, 6 hold eps^(3) for states (3,1), (3,2); rows 7, 8, 9 hold eps^(4) for (4,1), (4,2), (2,3).
  CHECK(es.A(0, 6) == 1.0);
  CHECK(es.A(1, 5) == -1.0);
  CHECK(es.A(9, 5) == 1.0);
  CHECK(es.A(7, 0) == 2.0);
  CHECK(es.A(8, 1) == 1.0);
  // The shared coordinate (2,3) of estimator 2 is corrected towards estimator 4's copy.
  CHECK((es.A.block(2, 9, 3, 1) - c.gains[1].K.col(2)).cwiseAbs().maxCoeff() == 0.0);
  // Subsystem 3 has no incoming couplings, so estimator 3 only sees itself.
  CHECK(es.A.block(5, 0, 2, 5).isZero());
  CHECK(es.A.block(5, 7, 2, 3).isZero());
}

TEST_CASE("stability report oracles") {
  SUBCASE("A = -I, P = I, alpha = 1 leaves slack -I") {
    const auto r = check_stability(manual_system(-Matrix::Identity(3, 3)), Matrix::Identity(3, 3), 1.0);
    CHECK(r.passed());
    CHECK(r.abscissa == doctest::Approx(-1.0));
    CHECK(r.certificate_max_eigenvalue == doctest::Approx(-1.0));
  }
  SUBCASE("a positive scalar fails") {
    const auto r = check_stability(manual_system(mat({{1.0}})), mat({{1.0}}), 0.1);
    CHECK_FALSE(r.stable);
    CHECK_FALSE(r.passed());
  }
  SUBCASE("stable but too slow for the requested rate") {
    const auto r = check_stability(manual_system(mat({{-0.1}})), mat({{1.0}}), 1.0);
    CHECK(r.stable);
    CHECK_FALSE(r.certificate_holds);
  }
}

TEST_CASE("nine-state certificate passes all three audits") {
  const auto& net = example_network();
  const auto& a = example_audit();
  const auto& c = example_certificate();
  const auto st = check_stability(a.es, stacked_lyapunov(c.gains), a.params.alpha);
  CHECK(st.passed());
  CHECK(st.abscissa < -a.params.alpha / 2.0);
  const auto res = check_lmi_residuals(net, c.gains, a.params);
  CHECK(res.passed);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(res.margins[k] == doctest::Approx(c.margins[k]).epsilon(1e-6));
    CHECK(res.schur_margins[k] < 0.0);
  }
  const auto fr = check_hinf_frequency(a.es, a.params.gamma, a.params.omega);
  CHECK(fr.passed);
  CHECK(fr.sup < 1.0);
  const double h = hinf_norm(a.es.A, scaled_input(a.es, a.params.gamma, a.params.omega), a.es.C_z);
  CHECK(fr.sup == doctest::Approx(h).epsilon(1e-4));
}

TEST_CASE("perturbing L of estimator 1 is reported, not thrown") {
  const auto& net = example_network();
  auto gains = example_certificate().gains;
  const auto params = example_audit().params;
  gains[0].L *= 1.1;
  gains[0].G = gains[0].P * gains[0].L;
  LmiResidualReport r;
  CHECK_NOTHROW(r = check_lmi_residuals(net, gains, params));
  CHECK(r.margins.size() == 4);
  CHECK(r.margins[0] != doctest::Approx(example_certificate().margins[0]));
  gains[0].L *= 10.0;
  gains[0].G = gains[0].P * gains[0].L;
  CHECK_FALSE(check_lmi_residuals(net, gains, params).passed);
}

TEST_CASE("a certificate sitting on the stability boundary fails the residual audit") {
  // x' = -x with P = 1, L = 0 and alpha = 2 makes the leading entry exactly zero.
  const auto net = scalar_network(-1.0, 0.0, 1.0);
  EstimatorGains g{mat({{1.0}}), mat({{0.0}}), mat({{0.0}}), mat({{0.0}}), mat({{0.0}})};
  SynthesisParams p;
  p.alpha = 2.0;
  p.W = {mat({{0.0}})};
  p.strictness = 1e-3;
  const auto r = check_lmi_residuals(net, {g}, resolve_params(p, net));
  CHECK(r.margins[0] >= -1e-12);
  CHECK_FALSE(r.passed);
}

TEST_CASE("frequency audit oracles") {
  SUBCASE("first-order lag has unit peak at zero frequency") {
    const Matrix A = mat({{-1.0}}), B = mat({{1.0}}), C = mat({{1.0}});
    CHECK(gain_at(A, B, C, 0.0) == doctest::Approx(1.0));
    CHECK(gain_at(A, B, C, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(hinf_norm(A, B, C) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("lightly damped resonance peak is found by refinement") {
    const double z = 0.01, w0 = 3.0;
    const Matrix A = mat({{0, 1}, {-w0 * w0, -2 * z * w0}}), B = mat({{0}, {1}}), C = mat({{1, 0}});
    const double exact = 1.0 / (2 * z * w0 * w0 * std::sqrt(1 - z * z));
    CHECK(hinf_norm(A, B, C) == doctest::Approx(exact).epsilon(1e-5));
    ErrorSystem es = manual_system(A);
    es.B_eta = B;
    es.C_z = C;
    const auto fr = check_hinf_frequency(es, 1.0, 1.0);
    CHECK(fr.sup == doctest::Approx(exact).epsilon(1e-4));
    CHECK_FALSE(fr.passed);
  }
  SUBCASE("zero output map gives zero supremum") {
    ErrorSystem es = manual_system(-Matrix::Identity(2, 2));
    es.C_z.setZero();
    const auto fr = check_hinf_frequency(es, 0.01, 0.01);
    CHECK(fr.sup == 0.0);
    CHECK(fr.passed);
  }
  SUBCASE("unstable error systems are rejected") {
    CHECK_THROWS_AS(check_hinf_frequency(manual_system(mat({{0.5}})), 1.0, 1.0), Error);
  }
}

TEST_CASE("scalar certificate: grid supremum agrees with the bisection norm") {
  const auto net = scalar_network(-1.0, 1.0, 1.0);
  SynthesisParams p;
  p.gamma = 1.0;
  p.omega = 1.0;
  p.strictness = 1e-6;
  const auto out = solve_coupled(net, p);
  REQUIRE(out.certificate);
  const auto rp = resolve_params(out.certificate->params, net);
  const auto es = assemble_error_system(net, out.certificate->gains, rp.W);
  const auto fr = check_hinf_frequency(es, rp.gamma, rp.omega);
  const double h = hinf_norm(es.A, scaled_input(es, rp.gamma, rp.omega), es.C_z);
  CHECK(fr.passed);
  CHECK(std::abs(fr.sup - h) < 1e-4);
}

TEST_CASE("error system matches simulated estimator dynamics over a short interval") {
  const auto& net = example_network();
  const auto& c = example_certificate();
  const auto& es = example_audit().es;
  std::mt19937_64 rng(7);
  const Vector x0 = coopest::testing::random_unit(rng, 9);
  SimulationOptions opt;
  opt.dt = 1e-4;
  const double t = 0.05;
  const auto tr = simulate(net, c.gains, DisturbanceSet{}, x0, t, opt);
  const Vector e0 = tr.stacked_error(0);
  const Vector predicted = propagate(es.A, e0, t);
  const Vector simulated = tr.stacked_error(tr.samples() - 1);
  CHECK((predicted - simulated).norm() <= 1e-6 * predicted.norm());
}
