#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::mat;

TEST_CASE("index space maps (k,i) to global rows and back") {
  const IndexSpace space({2, 3, 2, 2});
  CHECK(space.size() == 9);
  CHECK(space.offset(2) == 5);
  CHECK(space.global({1, 2}) == 4);
  CHECK(space.local(5) == StateIndex{2, 0});
  for (int g = 0; g < space.size(); ++g) CHECK(space.global(space.local(g)) == g);
  CHECK(to_string(StateIndex{1, 2}) == "(2,3)");
  CHECK_FALSE(space.contains({1, 3}));
}

TEST_CASE("assembled nine-state plant places every coupling entry") {
  const auto& sys = coopest::testing::example_network().system;
  REQUIRE(sys.A.rows() == 9);
  REQUIRE(sys.C.rows() == 4);
  REQUIRE(sys.B.cols() == 2);
  const auto g = [&](int k, int i) { return sys.index.global({k - 1, i - 1}); };
  CHECK(sys.A(g(1, 1), g(1, 2)) == 3.0);
  CHECK(sys.A(g(1, 1), g(3, 2)) == 1.0);
  CHECK(sys.A(g(1, 2), g(3, 1)) == -1.0);
  CHECK(sys.A(g(2, 3), g(3, 1)) == 1.0);
  CHECK(sys.A(g(2, 1), g(4, 1)) == 1.0);
  CHECK(sys.A(g(2, 2), g(4, 2)) == 2.0);
  CHECK(sys.A(g(4, 1), g(1, 1)) == 2.0);
  CHECK(sys.A(g(4, 2), g(1, 2)) == 1.0);
  CHECK(sys.A(g(3, 2), g(3, 2)) == -3.0);
  CHECK(sys.C(3, g(4, 1)) == -1.0);
  CHECK(sys.C(3, g(2, 3)) == 1.0);
  CHECK(sys.A.cwiseAbs().sum() == 23.0);
}

TEST_CASE("assembly rejects inconsistent shapes and duplicate blocks") {
  std::vector<SubsystemModel> subs{{mat({{0.0}}), mat({{1.0}}), mat({{1.0}})},
                                   {mat({{0.0}}), mat({{1.0}}), mat({{1.0}})}};
  SUBCASE("coupling block of the wrong shape") {
    std::vector<CouplingBlock> c{{0, 1, CouplingKind::State, mat({{1.0, 2.0}})}};
    try {
      assemble_global(subs, c);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Dimension);
    }
  }
  SUBCASE("two blocks for the same pair") {
    std::vector<CouplingBlock> c{{0, 1, CouplingKind::State, mat({{1.0}})},
                                 {0, 1, CouplingKind::State, mat({{2.0}})}};
    try {
      assemble_global(subs, c);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Duplicate);
    }
  }
  SUBCASE("disturbance widths differ") {
    subs[1].B = mat({{1.0, 0.0}});
    CHECK_THROWS_AS(assemble_global(subs, {}), Error);
  }
}

TEST_CASE("extract_blocks inverts assembly") {
  const auto& sys = coopest::testing::example_network().system;
  const auto blocks = extract_blocks(sys);
  CHECK(blocks.size() == 5);
  const auto again = assemble_global(sys.subsystems, blocks);
  CHECK(again.A == sys.A);
  CHECK(again.C == sys.C);
}

TEST_CASE("numerical rank uses a relative singular-value threshold") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1e-20;
  CHECK(numerical_rank(m) == 1);
  m(1, 1) = 1e-3;
  CHECK(numerical_rank(m) == 2);
  RankOptions abs;
  abs.absolute_tolerance = 1e-2;
  CHECK(numerical_rank(m, abs) == 1);
}

TEST_CASE("observability and detectability oracles") {
  SUBCASE("double integrator measured in position is observable") {
    const auto r = check_observability(mat({{0, 1}, {0, 0}}), mat({{1, 0}}));
    CHECK(r.observable);
    CHECK(r.rank == 2);
  }
  SUBCASE("double integrator measured in velocity is not detectable") {
    const auto r = check_observability(mat({{0, 1}, {0, 0}}), mat({{0, 1}}));
    CHECK_FALSE(r.observable);
    CHECK(r.rank == 1);
    CHECK_FALSE(check_detectability(mat({{0, 1}, {0, 0}}), mat({{0, 1}})).detectable);
  }
  SUBCASE("unobservable stable mode is still detectable") {
    const Matrix A = mat({{-1, 0}, {0, 2}});
    const Matrix C = mat({{0, 1}});
    CHECK_FALSE(check_observability(A, C).observable);
    CHECK(check_detectability(A, C).detectable);
  }
  SUBCASE("unobservable unstable mode is reported") {
    const auto r = check_detectability(mat({{1, 0}, {0, -2}}), mat({{0, 1}}));
    CHECK_FALSE(r.detectable);
    REQUIRE(r.undetectable.size() == 1);
    CHECK(r.undetectable[0].real() == doctest::Approx(1.0));
  }
}

TEST_CASE("the nine-state plant is observable while subsystem 2 alone is not detectable") {
  const auto& net = coopest::testing::example_network();
  CHECK(check_observability(net.system.A, net.system.C).observable);
  const auto& s2 = net.system.subsystems[1];
  const auto d = check_detectability(s2.A, s2.C);
  CHECK_FALSE(d.detectable);
  CHECK_FALSE(d.undetectable.empty());
  for (const auto& z : d.undetectable) CHECK(std::abs(z) < 1e-6);
  CHECK(check_detectability(net.system.subsystems[0].A, net.system.subsystems[0].C).detectable);
}

TEST_CASE("observability rank is stable for a 12-state chain with spread eigenvalues") {
  const int n = 12;
  Matrix A = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) A(i, i) = -std::pow(2.0, i - 4);
  for (int i = 0; i + 1 < n; ++i) A(i + 1, i) = 1.0;
  Matrix C = Matrix::Zero(1, n);
  C(0, n - 1) = 1.0;
  CHECK(check_observability(A, C).observable);
}
