#pragma once

// Dense complex linear algebra on n x n operators. At finite dimension the
// bounded, Hilbert-Schmidt and trace-class operator spaces coincide, so one
// matrix type carries operators, states and unnormalized states alike.

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

/// Every tolerance the library gates on, in one place.
struct NumericPolicy {
  double hermitian_tol = 1e-12;     // per unit dimension, for states
  double psd_tol = 1e-10;           // smallest admissible eigenvalue is -psd_tol
  double trace_tol = 1e-12;
  double spectral_hermitian_tol = 1e-10;  // per unit dimension
  double pure_norm_tol = 1e-12;
  double purity_tol = 1e-9;
  double model_hermitian_tol = 1e-12;  // per unit dimension, for H
};

inline const NumericPolicy& default_policy() {
  static const NumericPolicy policy{};
  return policy;
}

/// Hermitian, positive semidefinite, unit-trace matrix. Validated on construction.
class QuantumState {
 public:
  explicit QuantumState(ComplexMatrix matrix, const NumericPolicy& policy = default_policy());

  static QuantumState maximally_mixed(std::size_t dim);
  static QuantumState basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  double purity_tol() const noexcept { return purity_tol_; }

 private:
  struct Trusted {};
  QuantumState(ComplexMatrix matrix, double purity_tol, Trusted)
      : matrix_(std::move(matrix)), purity_tol_(purity_tol) {}
  friend QuantumState project_to_state(const ComplexMatrix&, const NumericPolicy&);

  ComplexMatrix matrix_;
  double purity_tol_;
};

/// Unit vector in C^n; rho = |psi><psi| is the corresponding pure state.
class PureStateVector {
 public:
  explicit PureStateVector(ComplexVector amplitudes, const NumericPolicy& policy = default_policy());

  /// Rescales a nonzero vector to unit norm.
  static PureStateVector normalized(const ComplexVector& v);
  static PureStateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const noexcept { return amplitudes_; }
  ComplexMatrix projector() const { return amplitudes_ * amplitudes_.adjoint(); }
  QuantumState state() const;

 private:
  ComplexVector amplitudes_;
};

struct Eigenpair {
  double value;
  ComplexVector vector;
};

/// Checks that a and b are square with equal size; throws DimensionMismatch otherwise.
void require_same_dim(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix hermitize(const ComplexMatrix& a);
bool is_hermitian(const ComplexMatrix& a, double tol);

/// Sum of singular values.
double trace_norm(const ComplexMatrix& a);
/// Frobenius norm sqrt(Tr a*a).
double hs_norm(const ComplexMatrix& a);
/// Largest singular value.
double operator_norm(const ComplexMatrix& a);

/// Tr{a* b}.
Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b);

/// Eigenpairs of a Hermitian matrix, eigenvalues descending.
std::vector<Eigenpair> spectral_decomposition(const ComplexMatrix& a,
                                              const NumericPolicy& policy = default_policy());

/// Euclidean projection of x onto {p : p_i >= 0, sum p_i = 1}.
RealVector project_to_simplex(const RealVector& x);

/// Nearest state: Hermitize, then project the spectrum onto the probability simplex.
QuantumState project_to_state(const ComplexMatrix& a, const NumericPolicy& policy = default_policy());

/// e^{a t} by scaling and squaring.
ComplexMatrix matrix_exp(const ComplexMatrix& a, double t);
/// e^{a t} v.
ComplexVector matrix_exp_action(const ComplexMatrix& a, double t, const ComplexVector& v);

}  // namespace qtraj
