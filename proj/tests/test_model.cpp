#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "qtraj/error.hpp"
#include "qtraj/model.hpp"

using namespace qtraj;
using namespace qtraj::testing;

namespace {

MeasurementModel single_jump(std::vector<ComplexMatrix> kraus, double weight = 1.0) {
  ModelDescription d = empty_description(static_cast<std::size_t>(kraus.front().rows()));
  d.jump_channels = {{"y", weight, std::move(kraus)}};
  return build_model(d);
}

ComplexMatrix plus_state() {
  ComplexMatrix p = ComplexMatrix::Constant(2, 2, 0.5);
  return p;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("build_model examples") {
  const auto m = diffusive_model(sz(), {sm()});
  CHECK(max_abs(m.d1() - diag2(1.0, 0.0)) < 1e-15);

  const auto j = single_jump({id2()});
  CHECK(max_abs(j.d2() - id2()) < 1e-15);
  CHECK(j.total_jump_mass() == 1.0);

  ModelDescription bad = empty_description(2);
  bad.hamiltonian = sx() + kI * sy();
  try {
    build_model(bad);
    FAIL("expected NonHermitianH");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonHermitianH);
  }

  ModelDescription mismatch = empty_description(2);
  mismatch.diffusive_ops = {ComplexMatrix::Zero(3, 3)};
  try {
    build_model(mismatch);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }

  const auto empty = build_model(empty_description(2));
  CHECK_FALSE(empty.warnings().empty());

  ModelDescription zero_weight = empty_description(2);
  zero_weight.jump_channels = {{"y", 0.0, {id2()}}};
  CHECK_THROWS_AS(build_model(zero_weight), Error);
}

TEST_CASE("apply_liouvillian examples") {
  CHECK(max_abs(apply_liouvillian(diffusive_model(sz(), {}), 0.5 * id2())) < 1e-15);
  const auto decay = diffusive_model(ComplexMatrix::Zero(2, 2), {sm()});
  CHECK(max_abs(apply_liouvillian(decay, excited()) - (ground() - excited())) < 1e-15);
  RandomStream rng(1);
  const auto j = single_jump({id2()});
  for (int i = 0; i < 5; ++i) {
    CHECK(max_abs(liouvillian_jump(j, random_matrix(2, rng))) < 1e-14);
  }
  CHECK_THROWS_AS(apply_liouvillian(decay, ComplexMatrix::Identity(3, 3)), Error);
}

TEST_CASE("apply_k examples") {
  RandomStream rng(2);
  const ComplexMatrix rho = random_state(2, rng).matrix();
  CHECK(max_abs(apply_k(single_jump({id2()}), rho)) < 1e-14);
  CHECK(max_abs(apply_k(diffusive_model(sz(), {}), sx()) - 2.0 * sy()) < 1e-15);
  const auto decay = diffusive_model(ComplexMatrix::Zero(2, 2), {sm()});
  CHECK(max_abs(apply_k(decay, rho) - liouvillian_diffusive(decay, rho)) < 1e-15);
}

TEST_CASE("apply_jump, jump_rate and output_drift examples") {
  const auto decay = single_jump({sm()});
  CHECK(max_abs(apply_jump(decay, excited(), 0) - ground()) < 1e-15);
  CHECK(max_abs(apply_jump(single_jump({id2()}), excited(), 0) - excited()) < 1e-15);
  const auto two = single_jump({0.5 * sm(), 0.5 * sz()});
  const ComplexMatrix half = 0.5 * id2();
  const ComplexMatrix expected = 0.25 * (sm() * half * sp()) + 0.25 * (sz() * half * sz());
  CHECK(max_abs(apply_jump(two, half, 0) - expected) < 1e-15);
  CHECK_THROWS_AS(apply_jump(decay, half, 1), Error);

  CHECK(jump_rate(decay, QuantumState(excited()), 0) == doctest::Approx(1.0));
  CHECK(jump_rate(decay, QuantumState(ground()), 0) == doctest::Approx(0.0));
  CHECK(jump_rate(decay, QuantumState(half), 0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(jump_rate(decay, QuantumState(half), 3), Error);

  const auto lz = diffusive_model(ComplexMatrix::Zero(2, 2), {sz()});
  CHECK(output_drift(lz, QuantumState(excited()), 0) == doctest::Approx(2.0));
  const auto lm = diffusive_model(ComplexMatrix::Zero(2, 2), {sm()});
  CHECK(std::abs(output_drift(lm, QuantumState(half), 0)) < 1e-15);
  CHECK(output_drift(lm, QuantumState(plus_state()), 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(output_drift(lm, QuantumState(half), 1), Error);
}

TEST_CASE("generator properties on random models") {
  RandomStream rng(3);
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 3);
    const auto m = random_model(n, rng);
    const ComplexMatrix x = random_hermitian(n, rng);
    const ComplexMatrix l = apply_liouvillian(m, x);
    CHECK(std::abs(l.trace()) <= 1e-10);
    const ComplexMatrix y = random_matrix(n, rng);
    CHECK(max_abs(apply_liouvillian(m, y).adjoint() - apply_liouvillian(m, y.adjoint())) < 1e-12);
    CHECK(max_abs(apply_k(m, y).adjoint() - apply_k(m, y.adjoint())) < 1e-12);

    ComplexMatrix compensator = ComplexMatrix::Zero(y.rows(), y.cols());
    for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
      compensator += m.jump_channels()[k].weight * (apply_jump(m, y, k) - y);
    }
    CHECK(max_abs(apply_liouvillian(m, y) - apply_k(m, y) - compensator) <= 1e-10);

    const QuantumState rho = random_state(n, rng);
    for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
      CHECK(std::abs(apply_jump(m, rho.matrix(), k).trace().imag()) < 1e-12);
      CHECK(jump_rate(m, rho, k) >= 0.0);
    }
  }
}

TEST_CASE("Stratonovich fields") {
  // B_j vanishes at eigenprojectors of a self-adjoint L_j
  const auto lz = diffusive_model(sx(), {sz()});
  CHECK(max_abs(stratonovich_diffusion(lz, excited(), 0)) < 1e-15);
  // A reduces to -i[H, rho] without diffusive operators
  RandomStream rng(4);
  const ComplexMatrix h = random_hermitian(3, rng);
  const auto ham = diffusive_model(h, {});
  const ComplexMatrix rho = random_state(3, rng).matrix();
  CHECK(max_abs(stratonovich_drift(ham, rho) - (-kI * (h * rho - rho * h))) < 1e-14);
}

TEST_CASE("Stratonovich drift equals Ito drift minus the correction term") {
  // A(rho) = L[rho] - 1/2 sum_j DB_j(rho)[B_j(rho)], with DB_j by central differences
  RandomStream rng(5);
  for (int i = 0; i < 20; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 2);
    const auto m = diffusive_model(random_hermitian(n, rng),
                                   {random_matrix(n, rng, 0.7), random_matrix(n, rng, 0.7)});
    const ComplexMatrix rho = haar_pure_state(n, rng).projector();
    ComplexMatrix correction = ComplexMatrix::Zero(rho.rows(), rho.cols());
    const double h = 1e-5;
    for (std::size_t j = 0; j < m.diffusive_ops().size(); ++j) {
      const ComplexMatrix b = stratonovich_diffusion(m, rho, j);
      correction += (stratonovich_diffusion(m, rho + h * b, j) -
                     stratonovich_diffusion(m, rho - h * b, j)) /
                    (2.0 * h);
    }
    const ComplexMatrix ito = apply_liouvillian(m, rho);
    CHECK(max_abs(stratonovich_drift(m, rho) - (ito - 0.5 * correction)) < 1e-8);
  }
}

TEST_CASE("check_pure_preserving examples") {
  ModelDescription d = empty_description(2);
  d.diffusive_ops = {sm()};
  d.dissipative_ops = {0.3 * sz()};
  const auto report = check_pure_preserving(build_model(d), 10, 1);
  CHECK_FALSE(report.verdict);
  CHECK(report.dissipative_present);

  CHECK(check_pure_preserving(diffusive_model(sx(), {sm(), sz()}), 50, 1).verdict);
  CHECK(check_pure_preserving(single_jump({sm()}), 50, 1).verdict);

  const auto mixing = single_jump({id2() / std::sqrt(2.0), sx() / std::sqrt(2.0)});
  const auto r = check_pure_preserving(mixing, 20, 1);
  CHECK_FALSE(r.verdict);
  REQUIRE_FALSE(r.witnesses.empty());
  const ComplexVector& w = r.witnesses.front().psi;
  CHECK(std::abs(std::abs(w(0)) - 1.0) < 1e-12);
  CHECK(r.witnesses.front().channel == 0);
}

TEST_CASE("purification obstruction at dimension 2") {
  CHECK_FALSE(check_purification_obstruction_dim2(diffusive_model(sx(), {sm()})).obstruction_exists);
  const auto skew = diffusive_model(sx(), {kI * sz()});
  const auto r = check_purification_obstruction_dim2(skew);
  CHECK(r.obstruction_exists);
  CHECK_FALSE(r.set_a_clause_verified);
  CHECK_FALSE(check_purification_obstruction_dim2(heterodyne()).obstruction_exists);
  const auto three = diffusive_model(ComplexMatrix::Zero(3, 3), {ComplexMatrix::Identity(3, 3)});
  CHECK_THROWS_AS(check_purification_obstruction_dim2(three), Error);
}

TEST_CASE("check_ellipticity examples") {
  const auto het = heterodyne();
  CHECK(check_ellipticity(het, PureStateVector::basis(2, 0)).elliptic);
  const auto at_ground = check_ellipticity(het, PureStateVector::basis(2, 1));
  CHECK_FALSE(at_ground.elliptic);
  CHECK(at_ground.failing_direction.has_value());

  const auto single = diffusive_model(ComplexMatrix::Zero(2, 2), {sm()});
  RandomStream rng(6);
  for (int i = 0; i < 10; ++i) {
    CHECK_FALSE(check_ellipticity(single, haar_pure_state(2, rng)).elliptic);
  }
  CHECK_THROWS_AS(check_ellipticity(single_jump({sm()}), PureStateVector::basis(2, 0)), Error);
}

TEST_CASE("heterodyne ellipticity at random pure states away from the ground state") {
  const auto het = heterodyne();
  RandomStream rng(7);
  int elliptic = 0, near_ground = 0;
  for (int i = 0; i < 100; ++i) {
    const auto psi = haar_pure_state(2, rng);
    const bool close = std::abs(psi.amplitudes()(0)) < 1e-6;
    near_ground += close ? 1 : 0;
    const bool e = check_ellipticity(het, psi).elliptic;
    elliptic += e ? 1 : 0;
    CHECK(e != close);
  }
  CHECK(elliptic + near_ground == 100);
}

}
