#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::example_certificate;
using coopest::testing::example_network;
using coopest::testing::mat;
using coopest::testing::scalar_network;

namespace {

SynthesisParams scalar_params(double gamma, double omega) {
  SynthesisParams p;
  p.alpha = 0.1;
  p.gamma = gamma;
  p.omega = omega;
  p.strictness = 1e-6;
  return p;
}

}  // namespace

TEST_CASE("LMI block layout of every estimator in the nine-state example") {
  const auto& net = example_network();
  const std::vector<std::vector<int>> widths{{2, 1, 2, 2}, {3, 1, 2, 3, 1}, {2, 1, 2}, {3, 1, 2, 3}};
  const std::vector<std::vector<int>> q{{1, 1}, {0, 0, 0}, {3, 1}, {1, 1, 1}};
  for (int k = 0; k < 4; ++k) {
    const auto st = lmi_structure(net, k);
    CHECK(st.block_widths() == widths[k]);
    CHECK(st.q == q[k]);
  }
  const auto st2 = lmi_structure(net, 1);
  CHECK(st2.fusion_positions == std::vector<int>{2});
  CHECK(st2.N == mat({{0, 0, 0}, {0, 0, 0}, {0, 0, 1}}));
  REQUIRE(st2.overlaps.size() == 1);
  CHECK(st2.overlaps[0].neighbor == 3);
  CHECK(st2.overlaps[0].shared[0].position == 2);
  CHECK(st2.overlaps[0].shared[0].neighbor_position == 2);
  CHECK(lmi_structure(net, 3).fusion_positions.empty());
}

TEST_CASE("variable layout packs P, G and fusion columns of F") {
  const auto& net = example_network();
  std::vector<LmiStructure> st;
  for (int k = 0; k < 4; ++k) st.push_back(lmi_structure(net, k));
  const VariableLayout layout(st);
  CHECK(layout.dimension() == 18 + 10 + 3);
  CHECK(layout.p(1, 0, 2) == layout.p(1, 2, 0));
  CHECK(layout.p_count(3) == 6);
  CHECK(layout.g_count(1) == 3);
  CHECK(layout.f_count(1) == 3);
  CHECK(layout.f_count(0) == 0);
  std::set<int> all;
  for (int k = 0; k < 4; ++k) {
    for (int i = 0; i < st[k].sigma; ++i)
      for (int j = i; j < st[k].sigma; ++j) all.insert(layout.p(k, i, j));
    for (int i = 0; i < st[k].sigma; ++i)
      for (int j = 0; j < st[k].outputs; ++j) all.insert(layout.g(k, i, j));
    for (int pos : st[k].fusion_positions)
      for (int i = 0; i < st[k].sigma; ++i) all.insert(layout.f(k, i, pos));
  }
  CHECK(static_cast<int>(all.size()) == layout.dimension());
}

TEST_CASE("scalar LMI matches the hand-expanded matrix") {
  const auto net = scalar_network(-1.0, 1.0, 1.0);
  const auto st = lmi_structure(net, 0);
  const VariableLayout layout({st});
  const auto params = resolve_params(scalar_params(0.9, 0.7), net);
  const auto lmi = assemble_lmi(net, st, layout, params);
  CHECK(lmi.widths == std::vector<int>{1, 1, 1});
  Vector x = Vector::Zero(layout.dimension());
  const double p = 0.8, g = 0.6, e = 1e-6;
  x(layout.p(0, 0, 0)) = p;
  x(layout.g(0, 0, 0)) = g;
  const Matrix expected = mat({{-2 * p - 2 * g + 0.1 * p + 1 + e, -g, p}, {-g, -0.81 + e, 0}, {p, 0, -0.49 + e}});
  CHECK((lmi.block.evaluate(x) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("scalar feasibility follows the closed form gamma^2 + 0.9025 omega^2 > 1") {
  const auto net = scalar_network(-1.0, 1.0, 1.0);
  const std::vector<std::pair<double, double>> feasible{{1.2, 0.1}, {0.1, 1.2}, {0.8, 0.8}, {2.0, 2.0}};
  const std::vector<std::pair<double, double>> infeasible{{0.7, 0.6}, {0.5, 0.5}, {0.95, 0.1}, {0.1, 1.0}};
  for (const auto& [g, w] : feasible) CHECK(check_feasible(net, scalar_params(g, w)) == SynthesisStatus::Feasible);
  for (const auto& [g, w] : infeasible)
    CHECK(check_feasible(net, scalar_params(g, w)) == SynthesisStatus::Infeasible);
}

TEST_CASE("scalar certificate satisfies its own inequality") {
  const auto net = scalar_network(-1.0, 1.0, 1.0);
  const auto out = solve_coupled(net, scalar_params(1.0, 1.0));
  REQUIRE(out.status == SynthesisStatus::Feasible);
  const auto& c = *out.certificate;
  CHECK(c.margins[0] <= -1e-6 + 1e-9);
  CHECK(c.p_margins[0] > 0.0);
  const auto& g = c.gains[0];
  CHECK(g.L(0, 0) == doctest::Approx(g.G(0, 0) / g.P(0, 0)));
  CHECK(g.K.isZero());
}

TEST_CASE("performance optimization on the scalar instance meets the closed form") {
  const auto net = scalar_network(-1.0, 1.0, 1.0);
  SUBCASE("minimum gamma at omega = 0.5") {
    const auto r = optimize_performance(net, scalar_params(2.0, 0.5), PerformanceMode::MinGamma);
    INFO(r.synthesis.message);
    REQUIRE(r.synthesis.status == SynthesisStatus::Feasible);
    CHECK(r.gamma == doctest::Approx(std::sqrt(1.0 - 0.9025 * 0.25)).epsilon(2e-3));
    CHECK(r.gamma >= std::sqrt(1.0 - 0.9025 * 0.25));
    CHECK(r.omega == 0.5);
  }
  SUBCASE("minimum omega at gamma = 0.5") {
    const auto r = optimize_performance(net, scalar_params(0.5, 2.0), PerformanceMode::MinOmega);
    INFO(r.synthesis.message);
    REQUIRE(r.synthesis.status == SynthesisStatus::Feasible);
    CHECK(r.omega == doctest::Approx(std::sqrt(0.75 / 0.9025)).epsilon(2e-3));
  }
  SUBCASE("minimum common level") {
    const auto r = optimize_performance(net, scalar_params(2.0, 2.0), PerformanceMode::MinTrace);
    INFO(r.synthesis.message);
    REQUIRE(r.synthesis.status == SynthesisStatus::Feasible);
    CHECK(r.gamma == r.omega);
    CHECK(r.gamma == doctest::Approx(std::sqrt(1.0 / 1.9025)).epsilon(2e-3));
  }
  SUBCASE("an infeasible start is a precondition error") {
    CHECK_THROWS_AS(optimize_performance(net, scalar_params(0.1, 0.1), PerformanceMode::MinGamma), Error);
  }
}

TEST_CASE("parameter resolution fills defaults and rejects bad values") {
  const auto& net = example_network();
  const auto p = resolve_params(SynthesisParams{}, net);
  CHECK(p.pi == std::vector<double>(4, 1.0));
  CHECK(p.W[1] == Matrix::Identity(3, 3));
  CHECK(*p.strictness == doctest::Approx(1e-6 * net.system.A.norm()));
  SynthesisParams bad;
  bad.gamma = -1.0;
  CHECK_THROWS_AS(resolve_params(bad, net), Error);
  SynthesisParams wrong_pi;
  wrong_pi.pi = {1.0, 1.0};
  CHECK_THROWS_AS(resolve_params(wrong_pi, net), Error);
  SynthesisParams indefinite;
  indefinite.W = {mat({{1, 0}, {0, -1}}), Matrix::Identity(3, 3), Matrix::Identity(2, 2), Matrix::Identity(3, 3)};
  CHECK_THROWS_AS(resolve_params(indefinite, net), Error);
}

TEST_CASE("nine-state example: defaults are infeasible and the search finds pi_4 = 0.1") {
  const auto& net = example_network();
  SynthesisParams base;
  base.gamma = 11.1;
  base.omega = 8.4;
  CHECK(check_feasible(net, base) == SynthesisStatus::Infeasible);
  const auto r = search_parameters(net, base);
  REQUIRE(r.found);
  CHECK(r.candidates_tried == 4);
  CHECK(r.params.alpha == 0.1);
  CHECK(r.params.pi == std::vector<double>{1.0, 1.0, 1.0, 0.1});
}

TEST_CASE("nine-state certificate: strict margins and consistent gains") {
  const auto& c = example_certificate();
  REQUIRE(c.gains.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& g = c.gains[k];
    CHECK(c.margins[k] <= -*c.params.strictness + 1e-9);
    CHECK(c.p_margins[k] > 0.0);
    CHECK((g.P - g.P.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((g.P * g.L - g.G).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, g.G.cwiseAbs().maxCoeff()));
    CHECK((g.P * g.K - g.F).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, g.F.cwiseAbs().maxCoeff()));
  }
  // Only estimator 2 has a neighbor sharing a coordinate, so only it fuses.
  CHECK(c.gains[1].F.col(2).cwiseAbs().maxCoeff() > 0.0);
  CHECK(c.gains[1].F.leftCols(2).isZero());
  CHECK(c.gains[3].F.isZero());
}

TEST_CASE("an infeasible level reports Infeasible without a certificate") {
  const auto& net = example_network();
  SynthesisParams p;
  p.gamma = 1e-3;
  p.omega = 8.4;
  p.pi = {1.0, 1.0, 1.0, 0.1};
  const auto out = solve_coupled(net, p);
  CHECK(out.status == SynthesisStatus::Infeasible);
  CHECK_FALSE(out.certificate.has_value());
}

TEST_CASE("the joint problem exposes one LMI per estimator plus positivity") {
  const auto& net = example_network();
  const auto prob = build_problem(net, resolve_params(example_certificate().params, net));
  CHECK_NOTHROW(prob.validate());
  CHECK(prob.dimension == 31);
  CHECK(prob.blocks.size() >= 8);
}
