#pragma once

#include <cmath>
#include <numbers>

#include "qtraj/atom.hpp"
#include "qtraj/linalg.hpp"
#include "qtraj/model.hpp"
#include "qtraj/rng.hpp"

namespace qtraj::testing {

inline ComplexMatrix sm() { return pauli::lowering(); }
inline ComplexMatrix sp() { return pauli::raising(); }
inline ComplexMatrix sx() { return pauli::x(); }
inline ComplexMatrix sy() { return pauli::y(); }
inline ComplexMatrix sz() { return pauli::z(); }
inline ComplexMatrix id2() { return pauli::identity(); }

inline ComplexMatrix excited() { return QuantumState::basis(2, 0).matrix(); }
inline ComplexMatrix ground() { return QuantumState::basis(2, 1).matrix(); }

inline ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

inline ModelDescription empty_description(std::size_t dim) {
  ModelDescription d;
  d.dim = dim;
  d.hamiltonian = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  return d;
}

inline MeasurementModel diffusive_model(const ComplexMatrix& h, std::vector<ComplexMatrix> ls) {
  ModelDescription d = empty_description(static_cast<std::size_t>(h.rows()));
  d.hamiltonian = h;
  d.diffusive_ops = std::move(ls);
  return build_model(d);
}

inline MeasurementModel heterodyne(double rabi = 1.0, double linewidth = 1.0, double detuning = 0.0) {
  TwoLevelAtomSpec spec;
  const double a = std::sqrt(linewidth / 2.0);
  spec.alpha = {Complex(a, 0.0), Complex(0.0, a)};
  spec.lambda_inner = resonant_coupling(rabi);
  spec.delta_omega = detuning;
  spec.detection = Detection::Heterodyne;
  return generate_atom_model(spec);
}

inline MeasurementModel homodyne(double phi, double rabi = 1.0, double linewidth = 1.0,
                                 double detuning = 0.0) {
  TwoLevelAtomSpec spec;
  spec.alpha = {Complex(std::sqrt(linewidth), 0.0)};
  spec.lambda_inner = resonant_coupling(rabi);
  spec.delta_omega = detuning;
  spec.phi = phi;
  spec.detection = Detection::Homodyne;
  return generate_atom_model(spec);
}

inline MeasurementModel direct_detection(double rabi = 1.0, double linewidth = 1.0) {
  TwoLevelAtomSpec spec;
  spec.alpha = {Complex(std::sqrt(linewidth), 0.0)};
  spec.lambda_inner = resonant_coupling(rabi);
  spec.detection = Detection::Direct;
  return generate_atom_model(spec);
}

inline ComplexMatrix random_matrix(std::size_t n, RandomStream& rng, double scale = 1.0) {
  const auto ni = static_cast<Eigen::Index>(n);
  ComplexMatrix a(ni, ni);
  for (Eigen::Index r = 0; r < ni; ++r) {
    for (Eigen::Index c = 0; c < ni; ++c) a(r, c) = scale * rng.complex_normal();
  }
  return a;
}

inline ComplexMatrix random_hermitian(std::size_t n, RandomStream& rng, double scale = 1.0) {
  return hermitize(random_matrix(n, rng, scale));
}

inline QuantumState random_state(std::size_t n, RandomStream& rng) {
  const ComplexMatrix g = random_matrix(n, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return QuantumState(hermitize(rho));
}

/// Random model with every kind of channel present.
inline MeasurementModel random_model(std::size_t n, RandomStream& rng) {
  ModelDescription d = empty_description(n);
  d.hamiltonian = random_hermitian(n, rng);
  d.diffusive_ops = {random_matrix(n, rng, 0.5), random_matrix(n, rng, 0.5)};
  d.jump_channels = {{"a", 0.7, {random_matrix(n, rng, 0.5), random_matrix(n, rng, 0.5)}},
                     {"b", 1.3, {random_matrix(n, rng, 0.5)}}};
  d.dissipative_ops = {random_matrix(n, rng, 0.5)};
  return build_model(d);
}

inline double max_abs(const ComplexMatrix& a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace qtraj::testing
