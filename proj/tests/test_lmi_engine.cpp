#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::mat;

namespace {

LmiBlock scalar_block(const std::string& label, double constant, std::vector<std::pair<int, double>> terms) {
  LmiBlock b;
  b.label = label;
  b.constant = mat({{constant}});
  for (const auto& [i, c] : terms) b.terms.emplace_back(i, mat({{c}}));
  return b;
}

// P > 0 and A'P + PA + I <= 0 over the three entries of a symmetric 2x2 P.
ConicProblem lyapunov_problem(const Matrix& A) {
  ConicProblem p;
  p.dimension = 3;
  const Matrix E[3] = {mat({{1, 0}, {0, 0}}), mat({{0, 1}, {1, 0}}), mat({{0, 0}, {0, 1}})};
  LmiBlock pos{"P", 1e-3 * Matrix::Identity(2, 2), {}};
  LmiBlock lyap{"lyapunov", Matrix::Identity(2, 2), {}};
  for (int i = 0; i < 3; ++i) {
    pos.terms.emplace_back(i, -E[i]);
    lyap.terms.emplace_back(i, A.transpose() * E[i] + E[i] * A);
  }
  p.blocks = {pos, lyap};
  return p;
}

}  // namespace

TEST_CASE("a one-variable linear program reaches its bound") {
  ConicProblem p;
  p.dimension = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back(scalar_block("x >= 1", 1.0, {{0, -1.0}}));
  const auto r = solve(p);
  INFO(r.message);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.objective == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.block_max_eigenvalues[0] <= 1e-8);
}

TEST_CASE("contradictory bounds are infeasible") {
  ConicProblem p;
  p.dimension = 1;
  p.blocks.push_back(scalar_block("x >= 1", 1.0, {{0, -1.0}}));
  p.blocks.push_back(scalar_block("x <= -1", 1.0, {{0, 1.0}}));
  const auto r = solve(p);
  CHECK(r.status == SolveStatus::Infeasible);
  CHECK(r.feasibility_shift > 0.0);
}

TEST_CASE("minimizing t with [[-t, 1], [1, -t]] <= 0 gives t = 1") {
  ConicProblem p;
  p.dimension = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back({"2x2", mat({{0, 1}, {1, 0}}), {{0, -Matrix::Identity(2, 2)}}});
  const auto r = solve(p);
  INFO(r.message);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("the smallest t with S - t I <= 0 is the largest eigenvalue of S") {
  const Matrix S = mat({{2, -1, 0}, {-1, 2, -1}, {0, -1, 2}});
  ConicProblem p;
  p.dimension = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back({"eig", S, {{0, -Matrix::Identity(3, 3)}}});
  const auto r = solve(p);
  INFO(r.message);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Lyapunov inequality is feasible exactly for Hurwitz matrices") {
  const auto stable = solve(lyapunov_problem(mat({{-1, 2}, {0, -3}})));
  REQUIRE(stable.status == SolveStatus::Optimal);
  const Matrix P = mat({{stable.x(0), stable.x(1)}, {stable.x(1), stable.x(2)}});
  CHECK(min_symmetric_eigenvalue(P) > 0.0);
  CHECK(solve(lyapunov_problem(mat({{0.1, 1}, {0, -1}}))).status == SolveStatus::Infeasible);
  CHECK(solve(lyapunov_problem(mat({{0, 1}, {-1, 0}}))).status == SolveStatus::Infeasible);
}

TEST_CASE("feasibility-only mode stops at a strictly feasible point") {
  ConicProblem p;
  p.dimension = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back(scalar_block("x >= 1", 1.0, {{0, -1.0}}));
  SolverSettings s;
  s.feasibility_only = true;
  const auto r = solve(p, s);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x(0) >= 1.0);
}

TEST_CASE("malformed problems are rejected before solving") {
  ConicProblem p;
  p.dimension = 1;
  p.blocks.push_back({"bad", mat({{0, 1}, {1, 0}}), {{0, mat({{1}})}}});
  CHECK_THROWS_AS(p.validate(), Error);
  ConicProblem q;
  q.dimension = 1;
  q.blocks.push_back(scalar_block("index", 0.0, {{3, 1.0}}));
  CHECK_THROWS_AS(q.validate(), Error);
  ConicProblem r;
  r.dimension = 1;
  r.blocks.push_back({"asym", mat({{0, 1}, {0, 0}}), {}});
  CHECK_THROWS_AS(r.validate(), Error);
}

TEST_CASE("problem dump lists sizes and coefficient triplets") {
  ConicProblem p;
  p.dimension = 1;
  p.blocks.push_back(scalar_block("x >= 1", 1.0, {{0, -1.0}}));
  const std::string text = dump(p);
  CHECK(text.rfind("dimension 1", 0) == 0);
  CHECK(text.find("block") != std::string::npos);
}

TEST_CASE("the box bound keeps unbounded objectives finite") {
  ConicProblem p;
  p.dimension = 1;
  p.objective = Vector::Ones(1);
  p.blocks.push_back(scalar_block("x <= 1", -1.0, {{0, 1.0}}));
  SolverSettings s;
  s.variable_bound = 100.0;
  const auto r = solve(p, s);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.x(0) == doctest::Approx(-100.0).epsilon(1e-5));
}
