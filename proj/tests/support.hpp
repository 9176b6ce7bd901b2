#pragma once

#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "coopest/analysis.hpp"
#include "coopest/graphs.hpp"
#include "coopest/io.hpp"
#include "coopest/pipeline.hpp"
#include "coopest/sim.hpp"

namespace coopest::testing {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = r > 0 ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  Matrix m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline std::string fixture_path(const std::string& name) { return std::string(COOPEST_FIXTURE_DIR) + "/" + name; }

inline const ProblemFile& example_problem() {
  static const ProblemFile p = parse_problem(std::string(embedded_example()));
  return p;
}

inline const EstimatorNetwork& example_network() {
  static const EstimatorNetwork net = network_from(example_problem());
  return net;
}

/// The demo certificate: defaults first, then the documented search.
inline const GainCertificate& example_certificate() {
  static const GainCertificate cert = [] {
    const auto r = synthesize(example_network(), example_problem(), {});
    if (!r.certificate) throw Error(ErrorKind::Numerical, "example synthesis failed: " + r.message);
    return *r.certificate;
  }();
  return cert;
}

/// One scalar subsystem x' = a x + b v, y = c x + eta with a single estimator.
inline EstimatorNetwork scalar_network(double a, double b, double c) {
  std::vector<SubsystemModel> subs{{mat({{a}}), mat({{b}}), mat({{c}})}};
  auto sys = assemble_global(subs, {});
  std::vector<SelectionFunction> sel{{0, {{0, 0}}, sys.index}};
  auto zeta = default_assignment(sys.index, sel);
  return make_network(std::move(sys), std::move(sel), std::move(zeta), CommGraph(1, {}));
}

/// Seeded random interconnection with n <= 10 states that passes every
/// structural check: each estimator selects its own states plus, sometimes,
/// one state of a neighbor; the communication graph carries every required
/// edge plus a few extra ones.
inline std::optional<ProblemFile> random_problem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  ProblemFile p;
  const int N = pick(2, 3);
  const int m = pick(1, 2);
  int n = 0;
  for (int k = 0; k < N; ++k) {
    const int nk = pick(1, 3);
    n += nk;
    SubsystemModel s;
    s.A = Matrix(nk, nk);
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < nk; ++j) s.A(i, j) = gauss(rng);
    s.A -= Matrix::Identity(nk, nk) * (0.5 + unit(rng));
    s.B = Matrix(nk, m);
    for (int i = 0; i < nk; ++i)
      for (int j = 0; j < m; ++j) s.B(i, j) = 0.5 * gauss(rng);
    s.C = Matrix(1, nk);
    for (int j = 0; j < nk; ++j) s.C(0, j) = gauss(rng);
    p.subsystems.push_back(std::move(s));
  }
  if (n > 10) return std::nullopt;
  for (int to = 0; to < N; ++to)
    for (int from = 0; from < N; ++from) {
      if (to == from || unit(rng) > 0.5) continue;
      CouplingBlock b;
      b.from = from;
      b.to = to;
      b.kind = CouplingKind::State;
      b.M = Matrix::Zero(p.subsystems[to].states(), p.subsystems[from].states());
      for (int i = 0; i < b.M.rows(); ++i)
        for (int j = 0; j < b.M.cols(); ++j)
          if (unit(rng) < 0.5) b.M(i, j) = 0.5 * gauss(rng);
      if (b.M.cwiseAbs().maxCoeff() > 0.0) p.couplings.push_back(std::move(b));
    }
  for (int k = 0; k < N; ++k) {
    std::vector<StateIndex> image;
    for (int i = 0; i < p.subsystems[k].states(); ++i) image.push_back({k, i});
    if (unit(rng) < 0.4) {
      const int j = (k + 1) % N;
      image.push_back({j, pick(0, p.subsystems[j].states() - 1)});
    }
    p.partitions.push_back(std::move(image));
  }
  auto sys = build_system(p);
  std::vector<SelectionFunction> sel;
  for (int k = 0; k < N; ++k) sel.emplace_back(k, p.partitions[k], sys.index);
  const auto zeta = default_assignment(sys.index, sel);
  std::set<std::pair<int, int>> edges;
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      if (a != b && unit(rng) < 0.3) edges.insert({a, b});
  const auto required = check_assumption2(sys, sel, zeta, CommGraph(N, {})).required_edges();
  edges.insert(required.begin(), required.end());
  p.comm_edges.assign(edges.begin(), edges.end());
  p.params.gamma = 5.0 + 5.0 * unit(rng);
  p.params.omega = 5.0 + 5.0 * unit(rng);
  if (!validate_problem(p).passed) return std::nullopt;
  return p;
}

inline Vector random_unit(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = gauss(rng);
  return v.normalized();
}

}  // namespace coopest::testing
