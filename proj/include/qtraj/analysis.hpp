#pragma once

// Post-processing of a posteriori trajectories: entropies, ergodic averages,
// the variance decomposition, Bloch-sphere histograms and the Lie-rank test.

#include <array>
#include <cstdint>
#include <vector>

#include "qtraj/linalg.hpp"
#include "qtraj/model.hpp"
#include "qtraj/sde.hpp"

namespace qtraj {

/// Tr{rho (1 - rho)}
double linear_entropy(const QuantumState& rho);
/// -Tr{rho ln rho}
double von_neumann_entropy(const QuantumState& rho);

/// Trapezoidal average of the state path over [burn_in, t_final].
QuantumState time_average_state(const PosteriorTrajectory& traj, double burn_in);

/// D^2(a; rho) = <a* a, rho> - |<a, rho>|^2, clipped at 0.
double quantum_variance(const ComplexMatrix& a, const QuantumState& rho);

struct VarianceDecomposition {
  double lhs = 0.0;    // D^2(a; eta_eq)
  double term1 = 0.0;  // time average of D^2(a; rho_t)
  double term2 = 0.0;  // time average of |<a, rho_t - eta_eq>|^2
  double residual = 0.0;
};

VarianceDecomposition variance_decomposition(const ComplexMatrix& a,
                                             const PosteriorTrajectory& traj,
                                             const QuantumState& eta_eq, double burn_in);

struct ErgodicReport {
  QuantumState time_avg_state;
  QuantumState eta_eq;
  double distance = 0.0;  // Hilbert-Schmidt
  std::vector<VarianceDecomposition> variance;
};

ErgodicReport ergodic_report(const PosteriorTrajectory& traj, const QuantumState& eta_eq,
                             double burn_in, const std::vector<ComplexMatrix>& observables);

/// (<sigma_x>, <sigma_y>, <sigma_z>) in the (excited, ground) basis.
std::array<double, 3> bloch_vector(const ComplexMatrix& rho);

struct BlochHistogram {
  std::size_t n_polar = 0;
  std::size_t n_azimuth = 0;
  /// Row-major [theta_index][phi_index].
  std::vector<std::uint64_t> counts;
  std::vector<double> dwell_time;
  std::uint64_t total = 0;
  /// Samples whose linear entropy exceeded 0.05 (binned by dominant eigenvector).
  std::uint64_t flagged = 0;

  std::size_t index(std::size_t theta, std::size_t phi) const { return theta * n_azimuth + phi; }
  std::size_t occupied_bins() const;
  /// Adds another histogram on the same grid.
  void merge(const BlochHistogram& other);
};

/// Equal-angle (theta, phi) bins; theta is measured from the excited state.
BlochHistogram empirical_invariant_measure(const PosteriorTrajectory& traj, std::size_t n_polar,
                                           std::size_t n_azimuth, double burn_in);

struct GreatCircleFit {
  /// Unit normal of the best-fit plane through the origin.
  std::array<double, 3> normal{};
  /// Fraction of dwell time within the angular half-width of the circle.
  double fraction = 0.0;
  double max_angle = 0.0;
};

/// Dwell-weighted principal-axis fit of the Bloch directions after burn_in.
GreatCircleFit great_circle_concentration(const PosteriorTrajectory& traj, double burn_in,
                                          double half_width);

struct LieRankReport {
  std::size_t rank = 0;
  bool full = false;
  std::size_t tangent_dim = 0;
  RealVector singular_values;
};

/// Rank of the tangent projections of the drift and diffusion fields of the
/// Stratonovich equation and their iterated brackets up to max_depth, at |psi><psi|.
LieRankReport lie_rank_check(const MeasurementModel& m, const PureStateVector& psi,
                             std::size_t max_depth = 2);

/// Orthonormal traceless Hermitian basis (Tr G_a G_b = delta_ab) of size n^2 - 1.
std::vector<ComplexMatrix> gell_mann_basis(std::size_t n);

}  // namespace qtraj
