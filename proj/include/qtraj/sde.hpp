#pragma once

// Trajectory integrators for continually measured systems:
//  - linear equation for the unnormalized state sigma_t under the reference law,
//    with state-independent Wiener and Poisson driving noise;
//  - nonlinear equation for the a posteriori state rho_t under the physical law,
//    with innovation noise and state-dependent jump intensities;
//  - Stratonovich form of the diffusive pure-state equation (Heun scheme);
//  - the deterministic flow rho' = +-B_1(rho).

#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "qtraj/linalg.hpp"
#include "qtraj/model.hpp"

namespace qtraj {

class TimeGrid {
 public:
  TimeGrid(double t_final, double dt);

  double t_final() const noexcept { return t_final_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  double time(std::size_t step) const noexcept { return static_cast<double>(step) * dt_; }

 private:
  double t_final_;
  double dt_;
  std::size_t n_steps_;
};

enum class Mode { Linear, Posterior, Stratonovich };

std::string_view to_string(Mode mode) noexcept;
Mode parse_mode(std::string_view name);

/// Time stepping for the Ito equations.
///  EulerMaruyama: additive increments, then state repair.
///  Kraus: sigma -> M F^{-1/2} sigma F^{-1/2} M* with M = I + G dt + sum_j L_j dY_j
///         (then the fired jump maps), F the reference-law mean of the step's effect.
///         Keeps sigma positive, maps pure states to pure states, and conserves
///         E_Q[Tr sigma] exactly.
enum class Scheme { EulerMaruyama, Kraus };

std::string_view to_string(Scheme scheme) noexcept;
Scheme parse_scheme(std::string_view name);

struct SimOptions {
  Scheme scheme = Scheme::Kraus;
  /// Store every k-th step (the final step is always stored).
  std::size_t record_stride = 1;
  /// Subdivide steps whose jump probability exceeds max_jump_probability.
  bool adaptive = true;
  double max_jump_probability = 0.1;
  /// Keep the per-step noise increments.
  bool store_output = true;
};

struct JumpEvent {
  std::size_t step = 0;
  std::size_t channel = 0;
};

struct OutputRecord {
  /// wiener[j][i]: driving increment of channel j over step i. Under the
  /// physical law this is the observed output dW_j = dW~_j + m_j dt.
  std::vector<std::vector<double>> wiener;
  /// Innovation increments dW~_j = dW_j - m_j dt.
  std::vector<std::vector<double>> compensated_wiener;
  std::vector<JumpEvent> jump_events;
};

struct LinearTrajectory {
  TimeGrid grid{1.0, 1.0};
  std::vector<double> times;
  std::vector<ComplexMatrix> sigma_path;
  std::vector<double> weight_path;
  OutputRecord output;
};

struct PosteriorTrajectory {
  TimeGrid grid{1.0, 1.0};
  std::vector<double> times;
  std::vector<QuantumState> state_path;
  std::vector<double> entropy_path;
  OutputRecord output;
};

/// What an integrator reports at each stored step.
struct StepSample {
  std::size_t step;
  double time;
  /// sigma_t in linear mode, rho_t otherwise.
  const ComplexMatrix& state;
  /// Tr sigma_t in linear mode, 1 otherwise.
  double weight;
  /// Cumulative jump counts per channel.
  const std::vector<std::size_t>& jump_counts;
  /// Cumulative observed Wiener outputs per diffusive channel.
  const std::vector<double>& wiener_outputs;
};

using StepObserver = std::function<void(const StepSample&)>;

/// Low-level driver shared by the simulate_* entry points and the ensemble runner.
/// Stratonovich mode requires a rank-one initial state.
void integrate(const MeasurementModel& m, Mode mode, const ComplexMatrix& initial,
               const TimeGrid& grid, std::uint64_t seed, const SimOptions& options,
               const StepObserver& observer, OutputRecord* output);

LinearTrajectory simulate_linear(const MeasurementModel& m, const QuantumState& rho0,
                                 const TimeGrid& grid, std::uint64_t seed,
                                 const SimOptions& options = {});

PosteriorTrajectory simulate_posterior(const MeasurementModel& m, const QuantumState& rho0,
                                       const TimeGrid& grid, std::uint64_t seed,
                                       const SimOptions& options = {});

PosteriorTrajectory simulate_stratonovich_pure(const MeasurementModel& m,
                                               const PureStateVector& psi0, const TimeGrid& grid,
                                               std::uint64_t seed, const SimOptions& options = {});

struct FlowPath {
  std::vector<double> times;
  std::vector<QuantumState> states;
  /// Set when the last two samples differ by less than 1e-9 in Hilbert-Schmidt norm.
  std::optional<QuantumState> limit;
};

/// rho_t = |psi_t><psi_t| / ||psi_t||^2 with psi_t = exp(sign L t) psi0, sampled at
/// n_intervals + 1 equally spaced times. `designated` picks L among several diffusive operators.
FlowPath deterministic_flow(const MeasurementModel& m, const PureStateVector& psi0, double t_final,
                            int sign, std::size_t n_intervals = 1000,
                            std::optional<std::size_t> designated = std::nullopt);

}  // namespace qtraj
