#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstring>

#include "sdcps/core/error.hpp"
#include "sdcps/core/rng.hpp"
#include "sdcps/plant/plant.hpp"
#include "sdcps/topology/hierarchy.hpp"

using namespace sdcps;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an sdcps::Error");
  return ErrorCode::BadValue;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

// Spectral radius of a 2x2 matrix from its characteristic polynomial.
double spectral_radius_2x2(double a, double b, double c, double d) {
  const double tr = a + d;
  const double det = a * d - b * c;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  const auto l1 = (tr + disc) / 2.0;
  const auto l2 = (tr - disc) / 2.0;
  return std::max(std::abs(l1), std::abs(l2));
}

// Random connected graph on n nodes: random spanning tree plus extra edges.
std::vector<std::set<int>> random_connected(Rng& rng, int n) {
  std::vector<std::set<int>> adj(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) {
    const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i)));
    adj[i].insert(j);
    adj[j].insert(i);
  }
  const int extra = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
  for (int e = 0; e < extra; ++e) {
    const int a = static_cast<int>(rng.uniform_int(n));
    const int b = static_cast<int>(rng.uniform_int(n));
    if (a != b) {
      adj[a].insert(b);
      adj[b].insert(a);
    }
  }
  return adj;
}

}  // namespace

TEST_CASE("step_plant examples") {
  {
    auto m = PlantModel::fully_observed(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
    auto s = PlantState::initial(m, vec({3, -1}));
    s = step_plant(m, s, Vector::Zero(2));
    CHECK(s.x == vec({3, -1}));
    CHECK(s.k == 1);
  }
  {
    auto m = PlantModel::fully_observed(scalar(0.5), scalar(1));
    auto s = PlantState::initial(m, vec({1}));
    for (int i = 0; i < 3; ++i) s = step_plant(m, s, Vector::Zero(1));
    CHECK(s.x[0] == doctest::Approx(0.125).epsilon(1e-15));
  }
  {
    Matrix A(2, 2);
    A << 1, 1, 0, 1;
    auto m = PlantModel::fully_observed(A, Matrix::Identity(2, 2));
    auto s = PlantState::initial(m, vec({0, 1}));
    s = step_plant(m, s, Vector::Zero(2));
    CHECK(s.x == vec({1, 1}));
    CHECK(s.y == vec({1, 1}));
  }
}

TEST_CASE("step_plant dimension checks") {
  auto m = PlantModel::fully_observed(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  auto s = PlantState::initial(m, vec({0, 0}));
  CHECK(code_of([&] { step_plant(m, s, Vector::Zero(3)); }) == ErrorCode::DimensionMismatch);
  PlantModel bad = m;
  bad.B = Matrix::Identity(3, 2);
  CHECK(code_of([&] { bad.validate(); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("noise is seeded and reproducible") {
  auto m = PlantModel::fully_observed(scalar(0.9), scalar(1));
  m.process_noise_std = 0.1;
  m.measurement_noise_std = 0.05;
  Rng r1(9), r2(9);
  auto s1 = PlantState::initial(m, vec({1}));
  auto s2 = s1;
  for (int i = 0; i < 10; ++i) {
    s1 = step_plant(m, s1, vec({0}), &r1);
    s2 = step_plant(m, s2, vec({0}), &r2);
  }
  CHECK(s1.x == s2.x);
  CHECK(s1.y == s2.y);
  CHECK(s1.x[0] != doctest::Approx(std::pow(0.9, 10)));
}

TEST_CASE("estimate: full observation and Luenberger") {
  auto full = PlantModel::fully_observed(Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  auto s = PlantState::initial(full, vec({0, 0}));
  CHECK(estimate(full, s, vec({3, 4}), Vector::Zero(2), {}) == vec({3, 4}));

  auto m = PlantModel::fully_observed(scalar(1), scalar(1));
  auto st = PlantState::initial(m, vec({2}));
  st.x_hat = vec({0});
  Estimator lu{EstimatorMode::Luenberger, scalar(1)};
  CHECK(estimate(m, st, vec({2}), vec({0}), lu)[0] == doctest::Approx(2.0));

  PlantModel blind;
  blind.A = Matrix::Identity(2, 2);
  blind.B = Matrix::Identity(2, 2);
  blind.C = Matrix(1, 2);
  blind.C << 1, 0;
  blind.D = Matrix::Zero(1, 2);
  auto bs = PlantState::initial(blind, vec({1, 1}));
  Estimator lu2{EstimatorMode::Luenberger, Matrix::Ones(2, 1)};
  CHECK(code_of([&] { estimate(blind, bs, vec({1}), Vector::Zero(2), lu2); }) == ErrorCode::NotObservable);
}

TEST_CASE("Luenberger error decays at the rate of A - LC") {
  Matrix A(2, 2);
  A << 1.0, 0.1, 0.0, 1.0;
  Matrix C(1, 2);
  C << 1.0, 0.0;
  PlantModel m;
  m.A = A;
  m.B = Matrix::Identity(2, 2);
  m.C = C;
  m.D = Matrix::Zero(1, 2);
  Matrix L(2, 1);
  L << 1.2, 3.0;
  const Matrix closed = A - L * C;
  const double rho = spectral_radius_2x2(closed(0, 0), closed(0, 1), closed(1, 0), closed(1, 1));
  REQUIRE(rho < 1.0);

  PlantLoop loop{m, PlantState::initial(m, vec({1.0, -2.0})), {EstimatorMode::Luenberger, L}};
  loop.state.x_hat = vec({0.0, 0.0});
  double first = (loop.state.x_hat - loop.state.x).norm();
  for (int k = 0; k < 30; ++k) loop.step(Vector::Zero(2));
  const double err = (loop.state.x_hat - loop.state.x).norm();
  CHECK(err < first * std::pow(rho + 0.05, 30) * 10.0);
  for (int k = 0; k < 70; ++k) loop.step(Vector::Zero(2));
  CHECK((loop.state.x_hat - loop.state.x).norm() < 1e-6);
}

TEST_CASE("full observation estimate equals the state at every step without noise") {
  Matrix A(2, 2);
  A << 0.9, 0.2, -0.1, 0.8;
  auto m = PlantModel::fully_observed(A, Matrix::Identity(2, 2));
  PlantLoop loop{m, PlantState::initial(m, vec({1, 1})), {}};
  Matrix K = -0.3 * Matrix::Identity(2, 2);
  for (int k = 0; k < 50; ++k) {
    loop.step(self_control(K, loop.state.x_hat));
    REQUIRE(loop.state.x_hat == loop.state.x);
  }
}

TEST_CASE("self_control examples") {
  CHECK(self_control(Matrix::Zero(2, 2), vec({5, 6})) == vec({0, 0}));
  CHECK(self_control(-Matrix::Identity(2, 2), vec({2, -1})) == vec({-2, 1}));
  CHECK(self_control(scalar(0.3), vec({4}))[0] == doctest::Approx(1.2));
  CHECK(code_of([] { self_control(Matrix::Identity(2, 2), vec({1})); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("local_control examples") {
  const NodeId a{1}, b{2};
  std::map<NodeId, Matrix> lone{{a, scalar(-0.7)}};
  std::map<NodeId, Vector> est{{a, vec({-0.0})}, {b, vec({2})}};
  const Vector u_local = local_control(lone, est);
  const Vector u_self = self_control(scalar(-0.7), vec({-0.0}));
  CHECK(std::memcmp(u_local.data(), u_self.data(), sizeof(double)) == 0);

  // Two nodes, eps = 0.5, states 0 and 2.
  auto ga = consensus_gains(a, {b}, 0.5, 1);
  auto gb = consensus_gains(b, {a}, 0.5, 1);
  std::map<NodeId, Vector> xs{{a, vec({0})}, {b, vec({2})}};
  CHECK(local_control(ga, xs)[0] == doctest::Approx(1.0));
  CHECK(local_control(gb, xs)[0] == doctest::Approx(-1.0));

  std::map<NodeId, Vector> partial{{a, vec({0})}};
  CHECK(code_of([&] { local_control(ga, partial); }) == ErrorCode::MissingNeighborEstimate);
}

TEST_CASE("consensus expansion equals eps * sum of differences") {
  Rng rng(2);
  const NodeId self{0};
  std::set<NodeId> nbrs{NodeId{1}, NodeId{2}, NodeId{3}};
  std::map<NodeId, Vector> x;
  for (std::uint32_t i = 0; i < 4; ++i) x[NodeId{i}] = vec({rng.uniform(-5, 5)});
  const double eps = 0.2;
  double expected = 0.0;
  for (NodeId j : nbrs) expected += eps * (x[j][0] - x[self][0]);
  CHECK(local_control(consensus_gains(self, nbrs, eps, 1), x)[0] == doctest::Approx(expected));
}

TEST_CASE("consensus conserves the sum and converges to the average") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(11));
    const auto adj = random_connected(rng, n);
    std::size_t max_deg = 0;
    for (const auto& s : adj) max_deg = std::max(max_deg, s.size());
    const double eps = 0.9 / static_cast<double>(max_deg);

    std::map<NodeId, PlantLoop> plants;
    std::map<NodeId, std::set<NodeId>> hood;
    std::vector<double> oracle(static_cast<std::size_t>(n));
    auto model = PlantModel::fully_observed(scalar(1), scalar(1));
    for (int i = 0; i < n; ++i) {
      const double x0 = rng.uniform(-10, 10);
      oracle[i] = x0;
      plants.emplace(NodeId{static_cast<std::uint32_t>(i)}, PlantLoop{model, PlantState::initial(model, vec({x0})), {}});
      for (int j : adj[i]) hood[NodeId{static_cast<std::uint32_t>(i)}].insert(NodeId{static_cast<std::uint32_t>(j)});
    }
    double sum0 = 0.0;
    for (double v : oracle) sum0 += v;
    const double avg = sum0 / n;

    for (int k = 0; k < 2000; ++k) {
      std::map<NodeId, Vector> est;
      for (auto& [id, p] : plants) est[id] = p.state.x_hat;
      std::map<NodeId, Vector> inputs;
      for (auto& [id, p] : plants) inputs[id] = local_control(consensus_gains(id, hood[id], eps, 1), est);
      for (auto& [id, p] : plants) p.step(inputs[id]);

      // Oracle: x <- x - eps * L x, written out independently.
      std::vector<double> next(oracle);
      for (int i = 0; i < n; ++i)
        for (int j : adj[i]) next[i] += eps * (oracle[j] - oracle[i]);
      oracle = next;

      double sum = 0.0;
      for (auto& [id, p] : plants) sum += p.state.x[0];
      REQUIRE(std::abs(sum - sum0) <= 1e-9);
    }
    for (auto& [id, p] : plants) {
      CHECK(std::abs(p.state.x[0] - avg) <= 1e-6);
      CHECK(std::abs(p.state.x[0] - oracle[id.value]) <= 1e-9);
    }
  }
}

TEST_CASE("closed-loop decay follows the spectral radius of A + BK") {
  Rng rng(23);
  int checked = 0;
  while (checked < 100) {
    Matrix A(2, 2), B(2, 2), K(2, 2);
    for (int i = 0; i < 4; ++i) {
      A(i / 2, i % 2) = rng.uniform(-1, 1);
      B(i / 2, i % 2) = rng.uniform(-1, 1);
      K(i / 2, i % 2) = rng.uniform(-1, 1);
    }
    const Matrix cl = A + B * K;
    const double rho = spectral_radius_2x2(cl(0, 0), cl(0, 1), cl(1, 0), cl(1, 1));
    if (rho < 0.3 || rho > 1.2) continue;
    ++checked;
    auto m = PlantModel::fully_observed(A, B);
    PlantLoop loop{m, PlantState::initial(m, vec({1.0, 0.5})), {}};
    const double x0 = loop.state.x.norm();
    double at100 = 0.0;
    for (int k = 1; k <= 300; ++k) {
      loop.step(self_control(K, loop.state.x_hat));
      if (k == 100) at100 = loop.state.x.norm();
      if (rho < 1.0) REQUIRE(loop.state.x.norm() <= 50.0 * x0 * std::pow(rho + 0.02, k));
    }
    const double rate = std::pow(loop.state.x.norm() / at100, 1.0 / 200.0);
    CHECK(rate == doctest::Approx(rho).epsilon(0.03));
  }
}

TEST_CASE("design_gains") {
  auto t = build_hierarchy(4, 1, 2);
  std::map<NodeId, PlantDims> plants;
  for (NodeId h : t.hosts) plants[h] = {1, 1};

  GainTemplate uniform;
  uniform.by_level[3] = UniformGain{scalar(-0.5)};
  auto s = design_gains(t.hierarchy, uniform, plants);
  CHECK(s.epoch == 1);
  for (NodeId h : t.hosts) CHECK((*s.self_gain(h))(0, 0) == -0.5);

  // Scalar plant a = 1, b = 1 with K = -0.5 closes at 0.5.
  CHECK(std::abs(1.0 + 1.0 * (*s.self_gain(t.hosts[0]))(0, 0)) == doctest::Approx(0.5));

  GainTemplate per_partition;
  per_partition.partitions = partition_nodes(t.locals, 2);
  per_partition.by_partition[0] = ConsensusGain{0.1};
  per_partition.by_partition[1] = ConsensusGain{0.2};
  std::map<NodeId, std::set<NodeId>> hood;
  for (std::size_t i = 0; i < t.hosts.size(); ++i) hood[t.hosts[i]] = {t.hosts[(i + 1) % t.hosts.size()]};
  auto s2 = design_gains(t.hierarchy, per_partition, plants, hood, s.epoch);
  CHECK(s2.epoch == 2);
  for (NodeId h : t.hosts) {
    const NodeId local = *t.hierarchy.ancestor_with_role(h, NodeRole::Local);
    const double eps = local.value <= 2 ? 0.1 : 0.2;
    CHECK(s2.coupling.at(h) == doctest::Approx(eps));
    CHECK((*s2.self_gain(h))(0, 0) == doctest::Approx(-eps));
    CHECK(s2.local_gains(h).size() == 2);
  }

  GainTemplate empty;
  CHECK(code_of([&] { design_gains(t.hierarchy, empty, plants); }) == ErrorCode::UncoveredPlant);

  PacketFactory factory;
  auto packets = gain_broadcast(s2, t.hierarchy.root(), factory);
  CHECK(packets.size() == t.hosts.size());
  CHECK(packets[0].kind == PacketKind::Control);
}

TEST_CASE("step_mobility") {
  MobilityState still{{1, 2}, {0, 0}};
  CHECK(step_mobility(still, 5.0).position == Vec2{1, 2});
  MobilityState mv{{0, 0}, {1, 2}};
  CHECK(step_mobility(mv, 3.0).position == Vec2{3, 6});
  CHECK(step_mobility(step_mobility(mv, 1.0), 1.0).position == step_mobility(mv, 2.0).position);
  CHECK(code_of([&] { step_mobility(mv, 0.0); }) == ErrorCode::BadValue);
}
