#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::mat;

namespace {

const InterconnectedSystem& plant() { return coopest::testing::example_network().system; }

std::vector<SelectionFunction> example_selections() { return coopest::testing::example_network().selections; }

}  // namespace

TEST_CASE("selection functions reject duplicates and unknown states") {
  const IndexSpace space({2, 1});
  CHECK_THROWS_AS(SelectionFunction(0, {{0, 0}, {0, 0}}, space), Error);
  CHECK_THROWS_AS(SelectionFunction(0, {{1, 1}}, space), Error);
  const SelectionFunction ok(1, {{1, 0}, {0, 1}}, space);
  CHECK(ok.size() == 2);
  CHECK(ok.position({0, 1}) == 1);
  CHECK_FALSE(ok.position({0, 0}).has_value());
  CHECK(ok.at(0) == StateIndex{1, 0});
}

TEST_CASE("default assignment gives each state to the smallest estimator that selects it") {
  const auto sel = example_selections();
  const auto zeta = default_assignment(plant().index, sel);
  CHECK(zeta({1, 2}) == 1);
  CHECK(zeta({3, 0}) == 3);
  CHECK(zeta({0, 1}) == 0);
  CHECK(validate_assignment(plant().index, sel, zeta).passed());
}

TEST_CASE("assignment overrides must point to an estimator that selects the state") {
  const auto sel = example_selections();
  auto zeta = default_assignment(plant().index, sel);
  zeta.assign({1, 2}, 3);
  CHECK(validate_assignment(plant().index, sel, zeta).passed());
  zeta.assign({1, 2}, 0);
  const auto r = validate_assignment(plant().index, sel, zeta);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].issue == AssignmentIssue::NotSelectedByAssignee);
  zeta.assign({1, 2}, std::nullopt);
  CHECK(validate_assignment(plant().index, sel, zeta).violations[0].issue == AssignmentIssue::UnassignedButSelected);
}

TEST_CASE("a state nobody selects is reported as uncovered") {
  const IndexSpace space({2});
  const std::vector<SelectionFunction> sel{{0, {{0, 0}}, space}};
  const auto r = validate_assignment(space, sel, default_assignment(space, sel));
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].state == StateIndex{0, 1});
  CHECK(r.violations[0].issue == AssignmentIssue::Uncovered);
}

TEST_CASE("repartition of estimator 4 gathers (4,1), (4,2), (2,3)") {
  const auto rep = repartition(plant(), example_selections(), 3);
  CHECK(rep.sigma() == 3);
  CHECK(rep.A == mat({{0, 1, 0}, {-1, 0, 0}, {0, 0, 0}}));
  CHECK(rep.C == mat({{-1, 0, 1}}));
  REQUIRE(rep.external.size() == 3);
  CHECK(rep.external[0] == StateIndex{0, 0});
  CHECK(rep.external[1] == StateIndex{0, 1});
  CHECK(rep.external[2] == StateIndex{2, 0});
  CHECK(rep.coupling == mat({{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
  CHECK(rep.B.rows() == 3);
  CHECK(rep.B.isZero());
}

TEST_CASE("repartitioned rows embed back into the global plant") {
  const auto sel = example_selections();
  for (int k = 0; k < 4; ++k) {
    const auto rep = repartition(plant(), sel, k);
    const Matrix rows = embed_rows(plant(), rep);
    for (int p = 0; p < rep.sigma(); ++p)
      CHECK(rows.row(p) == plant().A.row(plant().index.global(rep.selected[p])));
    CHECK(rep.A_tilde_full.cols() == 9 - rep.sigma());
  }
}

TEST_CASE("estimator 2 has no external states beyond (3,1), (4,1), (4,2)") {
  const auto rep = repartition(plant(), example_selections(), 1);
  REQUIRE(rep.external.size() == 3);
  CHECK(rep.external[0] == StateIndex{2, 0});
  CHECK(rep.external[1] == StateIndex{3, 0});
  CHECK(rep.external[2] == StateIndex{3, 1});
  CHECK(rep.coupling == mat({{0, 1, 0}, {0, 0, 2}, {1, 0, 0}}));
}

TEST_CASE("partition check requires every measured state to be selected") {
  auto sel = example_selections();
  CHECK(validate_partition(plant(), sel).passed());
  sel[3] = SelectionFunction(3, {{3, 0}, {3, 1}}, plant().index);
  const auto r = validate_partition(plant(), sel);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].estimator == 3);
  CHECK(r.violations[0].state == StateIndex{1, 2});
}
