#include "qtraj/atom.hpp"

#include <cmath>

#include "qtraj/error.hpp"

namespace qtraj {

namespace pauli {

ComplexMatrix raising() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

ComplexMatrix lowering() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 0) = 1.0;
  return m;
}

ComplexMatrix x() { return raising() + lowering(); }

ComplexMatrix y() { return -kI * (raising() - lowering()); }

ComplexMatrix z() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

ComplexMatrix identity() { return ComplexMatrix::Identity(2, 2); }

}  // namespace pauli

std::string_view to_string(Detection d) noexcept {
  switch (d) {
    case Detection::Homodyne: return "homodyne";
    case Detection::Heterodyne: return "heterodyne";
    case Detection::Direct: return "direct";
  }
  return "unknown";
}

Detection parse_detection(std::string_view name) {
  if (name == "homodyne") return Detection::Homodyne;
  if (name == "heterodyne") return Detection::Heterodyne;
  if (name == "direct") return Detection::Direct;
  throw Error(ErrorCode::InvalidArgument, "unknown detection scheme '" + std::string(name) + "'");
}

double TwoLevelAtomSpec::linewidth() const {
  double sum = 0.0;
  for (const auto& a : alpha) sum += std::norm(a);
  return sum;
}

double TwoLevelAtomSpec::rabi() const { return 2.0 * std::abs(lambda_inner); }

MeasurementModel generate_atom_model(const TwoLevelAtomSpec& spec) {
  const double width = spec.linewidth();
  if (!(width > 0.0)) throw Error(ErrorCode::ZeroLinewidth, "||alpha||^2 must be positive");
  if (!(spec.rabi() > 0.0)) throw Error(ErrorCode::ZeroRabi, "<alpha|lambda> must be nonzero");

  ModelDescription config;
  config.dim = 2;
  const Complex lambda_alpha = std::conj(spec.lambda_inner);  // <lambda|alpha>
  config.hamiltonian = -0.5 * spec.delta_omega * pauli::z() + kI * lambda_alpha * pauli::lowering() -
                       kI * spec.lambda_inner * pauli::raising();

  const double norm_alpha = std::sqrt(width);
  switch (spec.detection) {
    case Detection::Heterodyne:
      for (const auto& a : spec.alpha) config.diffusive_ops.push_back(a * pauli::lowering());
      break;
    case Detection::Homodyne:
      config.diffusive_ops.push_back(std::exp(-kI * spec.phi) * norm_alpha * pauli::lowering());
      break;
    case Detection::Direct:
      config.jump_channels.push_back({"count", 1.0, {norm_alpha * pauli::lowering()}});
      break;
  }
  return build_model(config);
}

ComplexMatrix atom_ground_projector() {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

}  // namespace qtraj
