#include "qtraj/master.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/KroneckerProduct>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

constexpr double kTraceDriftTol = 1e-9;
constexpr double kKernelGap = 1e-8;
constexpr double kStationaryResidualTol = 1e-9;

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// vec(a X a*) - (1/2) vec(D X + X D) summed over a set of operators
void add_lindblad(ComplexMatrix& out, const std::vector<ComplexMatrix>& ops, double weight,
                  const ComplexMatrix& id) {
  for (const auto& a : ops) {
    const ComplexMatrix d = a.adjoint() * a;
    out += weight * (kron(a.conjugate(), a) - 0.5 * (kron(id, d) + kron(d.transpose(), id)));
  }
}

ComplexMatrix build_generator(const MeasurementModel& m) {
  const auto n = static_cast<Eigen::Index>(m.dim());
  const ComplexMatrix id = ComplexMatrix::Identity(n, n);
  const auto& h = m.hamiltonian();
  ComplexMatrix out = -kI * (kron(id, h) - kron(h.transpose(), id));
  add_lindblad(out, m.diffusive_ops(), 1.0, id);
  for (const auto& ch : m.jump_channels()) add_lindblad(out, ch.kraus, ch.weight, id);
  add_lindblad(out, m.dissipative_ops(), 1.0, id);
  return out;
}

}  // namespace

ComplexVector vectorize(const ComplexMatrix& a) {
  return Eigen::Map<const ComplexVector>(a.data(), a.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (v.size() != n * n) throw Error(ErrorCode::DimensionMismatch, "vector length is not dim^2");
  return Eigen::Map<const ComplexMatrix>(v.data(), n, n);
}

VectorizedLiouvillian::VectorizedLiouvillian(const MeasurementModel& m)
    : dim_(m.dim()), cache_(m.generator_cache()) {
  std::call_once(cache_->once, [&] { cache_->matrix = build_generator(m); });
}

ComplexMatrix VectorizedLiouvillian::apply(const ComplexMatrix& rho) const {
  if (rho.rows() != static_cast<Eigen::Index>(dim_) || rho.cols() != rho.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "operand dimension");
  }
  return unvectorize(matrix() * vectorize(rho), dim_);
}

std::vector<QuantumState> evolve_master(const MeasurementModel& m, const QuantumState& rho0,
                                        const std::vector<double>& times) {
  if (rho0.dim() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state dimension");
  double previous = 0.0;
  for (double t : times) {
    if (!(t >= previous) || !std::isfinite(t)) {
      throw Error(ErrorCode::InvalidArgument, "times must be nonnegative, finite and ascending");
    }
    previous = t;
  }
  const VectorizedLiouvillian generator(m);
  const ComplexVector v0 = vectorize(rho0.matrix());
  std::vector<QuantumState> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(rho0);
      continue;
    }
    const ComplexMatrix eta = unvectorize(matrix_exp(generator.matrix(), t) * v0, m.dim());
    const double drift = std::abs(eta.trace() - 1.0);
    if (drift > kTraceDriftTol) {
      throw Error(ErrorCode::TraceDrift, "trace drifted by " + std::to_string(drift) + " at t = " +
                                             std::to_string(t));
    }
    out.push_back(project_to_state(eta));
  }
  return out;
}

QuantumState equilibrium(const MeasurementModel& m) {
  const VectorizedLiouvillian generator(m);
  Eigen::JacobiSVD<ComplexMatrix> svd(generator.matrix(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double scale = std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index kernel_dim = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) kernel_dim += sv(i) <= kKernelGap * scale ? 1 : 0;
  if (kernel_dim == 0) {
    throw Error(ErrorCode::NoStationaryState, "generator has no null vector above the gap threshold");
  }
  if (kernel_dim > 1) {
    throw Error(ErrorCode::NonUniqueEquilibrium,
                "stationary space has dimension " + std::to_string(kernel_dim));
  }
  const ComplexVector v = svd.matrixV().col(sv.size() - 1);
  ComplexMatrix x = unvectorize(v, m.dim());
  const Complex tr = x.trace();
  if (std::abs(tr) < 1e-12) {
    throw Error(ErrorCode::NoStationaryState, "null vector is traceless");
  }
  x /= tr;
  QuantumState eta = project_to_state(x);
  const double residual = apply_liouvillian(m, eta.matrix()).norm();
  if (residual > kStationaryResidualTol) {
    throw Error(ErrorCode::NoStationaryState,
                "repaired null vector has residual " + std::to_string(residual));
  }
  return eta;
}

}  // namespace qtraj
