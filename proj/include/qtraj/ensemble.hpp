#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qtraj/sde.hpp"

namespace qtraj {

struct EnsembleOptions {
  SimOptions sim;
  /// 0 = use QTRAJ_THREADS, falling back to the hardware concurrency.
  std::size_t threads = 0;
  /// Hermitian observables whose means (with standard errors) are tracked.
  std::vector<ComplexMatrix> observables;
};

/// Per-stored-step Monte-Carlo aggregates. Every quantity is a sample mean of
/// w * f(rho) over trajectories, where w = Tr sigma_t in linear mode (the
/// density of the physical law with respect to the reference law) and w = 1
/// otherwise; so all means estimate expectations under the physical law.
struct EnsembleStats {
  Mode mode = Mode::Posterior;
  std::size_t n_requested = 0;
  std::size_t n_completed = 0;
  std::size_t n_failed = 0;
  std::map<std::string, std::size_t> failures;

  std::vector<double> times;
  std::vector<ComplexMatrix> mean_state;
  std::vector<Eigen::MatrixXd> state_se_real;
  std::vector<Eigen::MatrixXd> state_se_imag;
  std::vector<double> mean_weight, weight_se;
  std::vector<double> mean_entropy, entropy_se;
  /// [time][channel]
  std::vector<std::vector<double>> mean_jump_counts, jump_counts_se;
  std::vector<std::vector<double>> mean_outputs;
  std::vector<std::vector<double>> observable_mean, observable_se;
};

/// Seeds are seed + trajectory index. Trajectories run in blocks that are
/// reduced in block order, so results do not depend on the thread count.
/// Throws EnsembleFailure when more than 1% of the trajectories fail.
EnsembleStats run_ensemble(const MeasurementModel& m, const QuantumState& rho0,
                           const TimeGrid& grid, std::size_t n_traj, std::uint64_t seed, Mode mode,
                           const EnsembleOptions& options = {});

/// Worker count from QTRAJ_THREADS, else std::thread::hardware_concurrency().
std::size_t default_thread_count();

}  // namespace qtraj
