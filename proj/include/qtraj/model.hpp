#pragma once

// Measurement model: Hamiltonian H, diffusive operators L_j, jump channels
// (outcome y_k with mass nu_k and Kraus operators J_n(y_k)) and purely
// dissipative operators S_h, together with the generator pieces built from
// them and structural checks on the model.

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/linalg.hpp"

namespace qtraj {

struct JumpChannel {
  std::string label;
  double weight = 1.0;
  std::vector<ComplexMatrix> kraus;
};

/// Unvalidated model as read from a config file or built in code.
struct ModelDescription {
  std::size_t dim = 0;
  ComplexMatrix hamiltonian;
  std::vector<ComplexMatrix> diffusive_ops;
  std::vector<JumpChannel> jump_channels;
  std::vector<ComplexMatrix> dissipative_ops;
};

namespace detail {
struct GeneratorCache {
  std::once_flag once;
  ComplexMatrix matrix;
};
}  // namespace detail

class MeasurementModel {
 public:
  std::size_t dim() const noexcept { return dim_; }
  const ComplexMatrix& hamiltonian() const noexcept { return h_; }
  const std::vector<ComplexMatrix>& diffusive_ops() const noexcept { return l_; }
  const std::vector<JumpChannel>& jump_channels() const noexcept { return channels_; }
  const std::vector<ComplexMatrix>& dissipative_ops() const noexcept { return s_; }

  /// D1 = sum_j L_j* L_j
  const ComplexMatrix& d1() const noexcept { return d1_; }
  /// D2 = sum_k nu_k sum_n J_n(y_k)* J_n(y_k)
  const ComplexMatrix& d2() const noexcept { return d2_; }
  /// D3 = sum_h S_h* S_h
  const ComplexMatrix& d3() const noexcept { return d3_; }
  /// nu(Y) = sum_k nu_k
  double total_jump_mass() const noexcept { return total_mass_; }

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }
  ModelDescription description() const;

  /// Vectorized generator storage, filled lazily by the master-equation module.
  std::shared_ptr<detail::GeneratorCache> generator_cache() const { return cache_; }

 private:
  friend MeasurementModel build_model(const ModelDescription&, const NumericPolicy&);
  MeasurementModel() = default;

  std::size_t dim_ = 0;
  ComplexMatrix h_;
  std::vector<ComplexMatrix> l_;
  std::vector<JumpChannel> channels_;
  std::vector<ComplexMatrix> s_;
  ComplexMatrix d1_, d2_, d3_;
  double total_mass_ = 0.0;
  std::vector<std::string> warnings_;
  std::shared_ptr<detail::GeneratorCache> cache_;
};

MeasurementModel build_model(const ModelDescription& config,
                             const NumericPolicy& policy = default_policy());

// Generator pieces. All take rho as a plain matrix (it need not be a state).
ComplexMatrix liouvillian_hamiltonian(const MeasurementModel& m, const ComplexMatrix& rho);
ComplexMatrix liouvillian_diffusive(const MeasurementModel& m, const ComplexMatrix& rho);
ComplexMatrix liouvillian_jump(const MeasurementModel& m, const ComplexMatrix& rho);
ComplexMatrix liouvillian_dissipative(const MeasurementModel& m, const ComplexMatrix& rho);
ComplexMatrix apply_liouvillian(const MeasurementModel& m, const ComplexMatrix& rho);
ComplexMatrix apply_k(const MeasurementModel& m, const ComplexMatrix& rho);

/// J[rho](y_k) = sum_n J_n rho J_n*
ComplexMatrix apply_jump(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t k);
/// R_Y[rho] = sum_k nu_k J[rho](y_k)
ComplexMatrix apply_jump_sum(const MeasurementModel& m, const ComplexMatrix& rho);
/// Adjoint jump map at the identity: sum_n J_n* J_n for channel k.
ComplexMatrix jump_effect(const MeasurementModel& m, std::size_t k);

/// lambda_k = Tr J[rho](y_k)
double jump_rate(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t k);
double jump_rate(const MeasurementModel& m, const QuantumState& rho, std::size_t k);
/// m_j = Tr{(L_j + L_j*) rho}
double output_drift(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t j);
double output_drift(const MeasurementModel& m, const QuantumState& rho, std::size_t j);

/// Stratonovich drift field of the diffusive a-posteriori equation.
ComplexMatrix stratonovich_drift(const MeasurementModel& m, const ComplexMatrix& rho);
/// Diffusion field B_j(rho) = L_j rho + rho L_j* - Tr{(L_j + L_j*) rho} rho.
ComplexMatrix stratonovich_diffusion(const MeasurementModel& m, const ComplexMatrix& rho,
                                     std::size_t j);

struct PurityWitness {
  ComplexVector psi;
  std::size_t channel = 0;
  double second_eigenvalue = 0.0;
  double trace = 0.0;
};

struct PurePreservingReport {
  bool verdict = false;
  bool dissipative_present = false;
  std::size_t states_tested = 0;
  std::vector<PurityWitness> witnesses;
};

/// Pure-state preservation: no dissipative part, and every jump channel maps
/// pure states to (multiples of) pure states. Probes the computational basis
/// followed by n_samples Haar-random states.
PurePreservingReport check_pure_preserving(const MeasurementModel& m, std::size_t n_samples,
                                           std::uint64_t rng_seed);

struct ObstructionReport {
  bool obstruction_exists = false;
  std::vector<std::string> details;
  /// The clause restricted to the set A has no constructive counterpart and is not checked.
  bool set_a_clause_verified = false;
};

/// Two-level systems only: with P = I forced, the obstruction to purification
/// exists iff every L_j + L_j* and every channel effect is proportional to I.
ObstructionReport check_purification_obstruction_dim2(const MeasurementModel& m);

struct EllipticityReport {
  bool elliptic = false;
  RealVector singular_values;
  std::optional<ComplexVector> failing_direction;
};

/// Whether phi -> (Re<phi|L_j psi>)_j is injective on the orthogonal complement of psi.
EllipticityReport check_ellipticity(const MeasurementModel& m, const PureStateVector& psi,
                                    double threshold = 1e-9);

}  // namespace qtraj
