#include "qtraj/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

void require_square(const ComplexMatrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected a nonempty square matrix, got " + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()));
  }
}

}  // namespace

QuantumState::QuantumState(ComplexMatrix matrix, const NumericPolicy& policy)
    : matrix_(std::move(matrix)), purity_tol_(policy.purity_tol) {
  require_square(matrix_);
  const double n = static_cast<double>(matrix_.rows());
  const double asym = (matrix_ - matrix_.adjoint()).norm();
  if (!std::isfinite(asym) || asym > policy.hermitian_tol * n) {
    throw Error(ErrorCode::InvalidState, "not Hermitian (residual " + std::to_string(asym) + ")");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > policy.trace_tol) {
    throw Error(ErrorCode::InvalidState, "trace is not one (" + std::to_string(tr.real()) + ")");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(matrix_), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -policy.psd_tol) {
    throw Error(ErrorCode::InvalidState,
                "negative eigenvalue " + std::to_string(es.eigenvalues().minCoeff()));
  }
}

QuantumState QuantumState::maximally_mixed(std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  return QuantumState(ComplexMatrix::Identity(n, n) / static_cast<double>(dim));
}

QuantumState QuantumState::basis(std::size_t dim, std::size_t index) {
  return PureStateVector::basis(dim, index).state();
}

PureStateVector::PureStateVector(ComplexVector amplitudes, const NumericPolicy& policy)
    : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "empty state vector");
  }
  const double norm = amplitudes_.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > policy.pure_norm_tol) {
    throw Error(ErrorCode::InvalidState, "state vector norm " + std::to_string(norm) + " != 1");
  }
}

PureStateVector PureStateVector::normalized(const ComplexVector& v) {
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::InvalidState, "cannot normalize a zero vector");
  }
  return PureStateVector(v / norm);
}

PureStateVector PureStateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw Error(ErrorCode::InvalidArgument, "basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return PureStateVector(std::move(v));
}

QuantumState PureStateVector::state() const { return QuantumState(hermitize(projector())); }

void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_square(a);
  require_square(b);
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "dimensions " + std::to_string(a.rows()) + " and " +
                                                  std::to_string(b.rows()) + " differ");
  }
}

ComplexMatrix hermitize(const ComplexMatrix& a) { return 0.5 * (a + a.adjoint()); }

bool is_hermitian(const ComplexMatrix& a, double tol) {
  return a.rows() == a.cols() && (a - a.adjoint()).norm() <= tol;
}

double trace_norm(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().sum();
}

double hs_norm(const ComplexMatrix& a) { return a.norm(); }

double operator_norm(const ComplexMatrix& a) {
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
}

Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_dim(a, b);
  // Tr{a* b} = sum_ij conj(a_ij) b_ij
  return (a.conjugate().cwiseProduct(b)).sum();
}

std::vector<Eigenpair> spectral_decomposition(const ComplexMatrix& a, const NumericPolicy& policy) {
  require_square(a);
  const double n = static_cast<double>(a.rows());
  if (!is_hermitian(a, policy.spectral_hermitian_tol * n)) {
    throw Error(ErrorCode::NotHermitian, "spectral decomposition needs a Hermitian matrix");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a));
  std::vector<Eigenpair> out;
  out.reserve(static_cast<std::size_t>(a.rows()));
  for (Eigen::Index i = a.rows() - 1; i >= 0; --i) {
    out.push_back({es.eigenvalues()(i), es.eigenvectors().col(i)});
  }
  return out;
}

RealVector project_to_simplex(const RealVector& x) {
  // Sort-based projection: find the threshold tau with sum max(x_i - tau, 0) = 1.
  const Eigen::Index n = x.size();
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[static_cast<std::size_t>(k)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[static_cast<std::size_t>(k)] - candidate > 0.0) tau = candidate;
  }
  return (x.array() - tau).cwiseMax(0.0).matrix();
}

QuantumState project_to_state(const ComplexMatrix& a, const NumericPolicy& policy) {
  require_square(a);
  if (!a.allFinite()) throw Error(ErrorCode::ZeroTrace, "matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a));
  const RealVector& values = es.eigenvalues();
  if (values.maxCoeff() <= -1.0) {
    throw Error(ErrorCode::ZeroTrace, "all eigenvalues <= -1, no admissible spectrum");
  }
  const RealVector p = project_to_simplex(values);
  const auto& u = es.eigenvectors();
  ComplexMatrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
  return QuantumState(hermitize(rho), policy.purity_tol, QuantumState::Trusted{});
}

ComplexMatrix matrix_exp(const ComplexMatrix& a, double t) {
  require_square(a);
  const ComplexMatrix scaled = a * t;
  return scaled.exp();
}

ComplexVector matrix_exp_action(const ComplexMatrix& a, double t, const ComplexVector& v) {
  if (v.size() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  if (!std::isfinite(t)) throw Error(ErrorCode::InvalidArgument, "non-finite time");
  return matrix_exp(a, t) * v;
}

}  // namespace qtraj
