#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "qtraj/analysis.hpp"
#include "qtraj/error.hpp"
#include "qtraj/master.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

PosteriorTrajectory constant_trajectory(const ComplexMatrix& rho, std::size_t n, double dt) {
  PosteriorTrajectory t;
  t.grid = TimeGrid(dt * static_cast<double>(n), dt);
  for (std::size_t i = 0; i <= n; ++i) {
    t.times.push_back(dt * static_cast<double>(i));
    t.state_path.emplace_back(rho);
    t.entropy_path.push_back(linear_entropy(t.state_path.back()));
  }
  return t;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("entropies") {
  CHECK(linear_entropy(QuantumState(excited())) == 0.0);
  CHECK(linear_entropy(QuantumState::maximally_mixed(2)) == doctest::Approx(0.5));
  CHECK(linear_entropy(QuantumState(diag2(0.75, 0.25))) == doctest::Approx(3.0 / 8.0));
  CHECK(von_neumann_entropy(QuantumState(ground())) == 0.0);
  CHECK(von_neumann_entropy(QuantumState::maximally_mixed(2)) == doctest::Approx(std::log(2.0)));
  CHECK(von_neumann_entropy(QuantumState::maximally_mixed(4)) == doctest::Approx(std::log(4.0)));
  RandomStream rng(1);
  for (int i = 0; i < 20; ++i) {
    CHECK(linear_entropy(project_to_state(random_matrix(3, rng))) < 1.0);
  }
}

TEST_CASE("quantum_variance examples") {
  RandomStream rng(2);
  CHECK(quantum_variance(id2(), random_state(2, rng)) == doctest::Approx(0.0));
  CHECK(quantum_variance(sz(), QuantumState(excited())) == 0.0);
  CHECK(quantum_variance(sz(), QuantumState::maximally_mixed(2)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(quantum_variance(ComplexMatrix::Identity(3, 3), QuantumState(excited())), Error);
}

TEST_CASE("time averages of constant trajectories") {
  const ComplexMatrix rho = diag2(0.3, 0.7);
  const auto traj = constant_trajectory(rho, 100, 0.01);
  CHECK(max_abs(time_average_state(traj, 0.2).matrix() - rho) < 1e-14);
  try {
    time_average_state(traj, traj.times.back());
    FAIL("expected EmptyWindow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyWindow);
  }
}

TEST_CASE("time average is trapezoidal") {
  PosteriorTrajectory t;
  t.times = {0.0, 1.0, 2.0};
  t.state_path = {QuantumState(excited()), QuantumState(excited()), QuantumState(ground())};
  t.entropy_path = {0.0, 0.0, 0.0};
  // weights 1/4, 1/2, 1/4
  CHECK(time_average_state(t, 0.0).matrix()(0, 0).real() == doctest::Approx(0.75));
}

TEST_CASE("variance decomposition trivial cases") {
  const QuantumState eta(diag2(0.3, 0.7));
  const auto traj = constant_trajectory(eta.matrix(), 50, 0.1);
  const auto v = variance_decomposition(sz(), traj, eta, 0.0);
  CHECK(v.term2 == doctest::Approx(0.0));
  CHECK(std::abs(v.residual) < 1e-14);
  const auto i = variance_decomposition(id2(), traj, eta, 0.0);
  CHECK(std::abs(i.lhs) < 1e-14);
  CHECK(std::abs(i.term1) < 1e-14);
  CHECK(std::abs(i.term2) < 1e-14);
}

TEST_CASE("Bloch histogram of a constant trajectory has one bin") {
  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  const auto traj = constant_trajectory(plus, 40, 0.05);
  const auto h = empirical_invariant_measure(traj, 12, 24, 0.0);
  CHECK(h.occupied_bins() == 1);
  CHECK(h.total == 41);
  std::uint64_t sum = 0;
  double dwell = 0.0;
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    sum += h.counts[k];
    dwell += h.dwell_time[k];
  }
  CHECK(sum == h.total);
  CHECK(dwell == doctest::Approx(41 * 0.05));
  // +x direction: theta = pi/2, phi = 0
  CHECK(h.counts[h.index(6, 0)] == 41);
  CHECK(h.flagged == 0);

  const auto mixed = empirical_invariant_measure(constant_trajectory(diag2(0.6, 0.4), 5, 0.1), 4, 4, 0.0);
  CHECK(mixed.flagged == 6);
  CHECK(mixed.counts[mixed.index(0, 0)] == 6);

  auto merged = h;
  merged.merge(h);
  CHECK(merged.total == 82);

  const auto three = constant_trajectory(QuantumState::maximally_mixed(3).matrix(), 5, 0.1);
  CHECK_THROWS_AS(empirical_invariant_measure(three, 4, 4, 0.0), Error);
}

TEST_CASE("great-circle fit") {
  PosteriorTrajectory t;
  for (int i = 0; i <= 200; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 200.0;
    ComplexVector v(2);
    // Bloch vectors in the y-z plane
    v << std::cos(a / 2.0), Complex(0.0, std::sin(a / 2.0));
    t.times.push_back(0.01 * i);
    t.state_path.push_back(PureStateVector(v).state());
    t.entropy_path.push_back(0.0);
  }
  const auto fit = great_circle_concentration(t, 0.0, 0.1);
  CHECK(std::abs(std::abs(fit.normal[0]) - 1.0) < 1e-10);
  CHECK(fit.fraction == doctest::Approx(1.0));
  CHECK(fit.max_angle < 1e-10);
}

TEST_CASE("Gell-Mann basis is orthonormal and traceless") {
  for (std::size_t n : {2u, 3u, 4u}) {
    const auto b = gell_mann_basis(n);
    CHECK(b.size() == n * n - 1);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(std::abs(b[i].trace()) < 1e-15);
      CHECK(is_hermitian(b[i], 1e-15));
      for (std::size_t j = 0; j < b.size(); ++j) {
        CHECK(std::abs(hs_inner(b[i], b[j]) - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
    }
  }
}

TEST_CASE("lie_rank_check examples") {
  const auto het = heterodyne();
  const auto at_ground = lie_rank_check(het, PureStateVector::basis(2, 1), 2);
  CHECK(at_ground.full);
  CHECK(at_ground.rank == 2);

  const auto lz = diffusive_model(ComplexMatrix::Zero(2, 2), {sz()});
  const auto fixed = lie_rank_check(lz, PureStateVector::basis(2, 0), 2);
  CHECK(fixed.rank == 0);
  CHECK_FALSE(fixed.full);

  RandomStream rng(3);
  for (int i = 0; i < 5; ++i) {
    const auto m = diffusive_model(random_hermitian(3, rng),
                                   {random_matrix(3, rng), random_matrix(3, rng)});
    const auto r = lie_rank_check(m, haar_pure_state(3, rng), 1);
    CHECK(r.rank <= 4);
  }
  ModelDescription d = empty_description(2);
  d.jump_channels = {{"y", 1.0, {sm()}}};
  CHECK_THROWS_AS(lie_rank_check(build_model(d), PureStateVector::basis(2, 0), 1), Error);
}

TEST_CASE("ergodic report bundles distance and decompositions") {
  const QuantumState eta = equilibrium(heterodyne());
  const auto traj = constant_trajectory(eta.matrix(), 10, 0.1);
  const auto r = ergodic_report(traj, eta, 0.0, {sx(), sz()});
  CHECK(r.distance < 1e-12);
  CHECK(r.variance.size() == 2);
}

}
