#include <doctest.h>

#include "support.hpp"

using namespace coopest;
using coopest::testing::example_certificate;
using coopest::testing::example_problem;

namespace {

ErrorKind parse_error_kind(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::Numerical;
}

std::string message_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

std::string edited_example(const std::function<void(Json&)>& edit) {
  Json j = Json::parse(embedded_example());
  edit(j);
  return j.dump();
}

}  // namespace

TEST_CASE("sha256 of a known string") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("example problem parses with 0-based indices") {
  const auto& p = example_problem();
  CHECK(p.name == "nine-state-example");
  CHECK(p.subsystems.size() == 4);
  CHECK(p.couplings.size() == 5);
  CHECK(p.partitions[3].back() == StateIndex{1, 2});
  CHECK(p.comm_edges.front() == std::pair<int, int>{2, 0});
  CHECK(*p.params.gamma == 11.1);
  CHECK_FALSE(p.params.alpha.has_value());
}

TEST_CASE("problem serialization round-trips") {
  const auto& p = example_problem();
  const std::string once = serialize_problem(p);
  const auto again = parse_problem(once);
  CHECK(serialize_problem(again) == once);
  CHECK(build_system(again).A == build_system(p).A);
  CHECK(again.comm_edges == p.comm_edges);
}

TEST_CASE("pi accepts a scalar or a per-estimator map") {
  const auto scalar = parse_problem(edited_example([](Json& j) { j["params"]["pi"] = 0.5; }));
  CHECK(*scalar.params.pi_all == 0.5);
  const auto each = parse_problem(edited_example([](Json& j) { j["params"]["pi"] = {{"4", 0.1}, {"1", 2.0}}; }));
  CHECK(each.params.pi_each.at(3) == 0.1);
  CHECK(each.params.pi_each.at(0) == 2.0);
  const auto net = network_from(each);
  const auto sp = resolve_params(synthesis_params(each.params, net), net);
  CHECK(sp.pi == std::vector<double>{2.0, 1.0, 1.0, 0.1});
  CHECK(parse_error_kind(edited_example([](Json& j) { j["params"]["pi"] = {{"5", 1.0}}; })) == ErrorKind::Parse);
}

TEST_CASE("schema errors name the offending location") {
  SUBCASE("unknown key") {
    const auto text = edited_example([](Json& j) { j["colour"] = "blue"; });
    CHECK(parse_error_kind(text) == ErrorKind::Parse);
    CHECK(message_of(text).find("colour") != std::string::npos);
  }
  SUBCASE("ragged matrix") {
    const auto text = edited_example([](Json& j) { j["subsystems"][0]["A"] = Json::parse("[[0, 3], [-3]]"); });
    CHECK(parse_error_kind(text) == ErrorKind::Parse);
    CHECK(message_of(text).find("/subsystems/0/A") != std::string::npos);
  }
  SUBCASE("non-finite entry") {
    const auto text = edited_example([](Json& j) { j["subsystems"][0]["A"][0][0] = "nan"; });
    CHECK(parse_error_kind(text) == ErrorKind::Parse);
  }
  SUBCASE("state index out of range") {
    const auto text = edited_example([](Json& j) { j["partitions"]["1"][0] = Json::parse("[1, 7]"); });
    CHECK(message_of(text).find("/partitions") != std::string::npos);
  }
  SUBCASE("malformed JSON reports a position") {
    CHECK(parse_error_kind("{\"name\": ") == ErrorKind::Parse);
    CHECK_FALSE(message_of("{\"name\": ").empty());
  }
}

TEST_CASE("assignment overrides parse including explicit null") {
  const auto p = parse_problem(edited_example([](Json& j) {
    j["assignment"] = Json::parse(R"([{"state": [2, 3], "estimator": 4}, {"state": [1, 1], "estimator": null}])");
  }));
  REQUIRE(p.assignment.size() == 2);
  CHECK(p.assignment[0].first == StateIndex{1, 2});
  CHECK(*p.assignment[0].second == 3);
  CHECK_FALSE(p.assignment[1].second.has_value());
  CHECK(parse_problem(serialize_problem(p)).assignment == p.assignment);
}

TEST_CASE("gains file round-trips bit-exactly") {
  GainsFile g;
  g.version = "1";
  g.input_hash = "sha256:" + sha256_hex(std::string(embedded_example()));
  g.certificate = example_certificate();
  const std::string text = serialize_gains(g);
  const auto back = parse_gains(text);
  CHECK(back.input_hash == g.input_hash);
  REQUIRE(back.certificate.gains.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(back.certificate.gains[k].P == g.certificate.gains[k].P);
    CHECK(back.certificate.gains[k].L == g.certificate.gains[k].L);
    CHECK(back.certificate.gains[k].K == g.certificate.gains[k].K);
    CHECK(back.certificate.margins[k] == g.certificate.margins[k]);
  }
  CHECK(back.certificate.params.pi == g.certificate.params.pi);
  CHECK(back.certificate.params.gamma == g.certificate.params.gamma);
  CHECK(serialize_gains(back) == text);
  CHECK_THROWS_AS(parse_gains(R"({"format": "something-else"})"), Error);
}

TEST_CASE("scenario round-trips and defaults the noise duration to the horizon") {
  const auto s = parse_scenario(std::string(embedded_demo_scenario()));
  CHECK(s.horizon == 20.0);
  REQUIRE(s.initial_state);
  CHECK(s.initial_state->size() == 9);
  REQUIRE(s.disturbances.size() == 6);
  CHECK(s.disturbances[0].kind == DisturbanceKind::Sinusoid);
  CHECK(s.disturbances[1].channel == 1);
  CHECK(s.disturbances[2].target == DisturbanceTarget::Eta);
  CHECK(s.disturbances[2].estimator == 0);
  CHECK(s.disturbances[2].duration == 20.0);
  const auto back = parse_scenario(serialize_scenario(s));
  CHECK(serialize_scenario(back) == serialize_scenario(s));
  CHECK_THROWS_AS(parse_scenario(R"({"horizon": 1, "disturbances": [{"kind": "square"}]})"), Error);
  CHECK_THROWS_AS(parse_scenario(R"({"horizon": -1})"), Error);
}

TEST_CASE("matrix JSON helpers") {
  const Matrix m = coopest::testing::mat({{1.5, -2}, {0, 1e-300}});
  CHECK(matrix_from_json(matrix_to_json(m), "/m") == m);
  CHECK_THROWS_AS(matrix_from_json(Json::parse("[[1, 2]]"), "/m", 3), Error);
  CHECK(matrix_from_json(Json::parse("[]"), "/m", 2).rows() == 0);
  CHECK(dump_json(Json::parse(R"({"a": [1, 2, 3]})")).find("[1, 2, 3]") != std::string::npos);
}
