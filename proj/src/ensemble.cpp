#include "qtraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

constexpr std::size_t kBlockSize = 16;

struct Layout {
  std::size_t n2 = 0;
  std::size_t n_jump = 0;
  std::size_t n_diff = 0;
  std::size_t n_obs = 0;

  std::size_t weight() const { return 2 * n2; }
  std::size_t entropy() const { return 2 * n2 + 1; }
  std::size_t jumps() const { return 2 * n2 + 2; }
  std::size_t outputs() const { return jumps() + n_jump; }
  std::size_t observables() const { return outputs() + n_diff; }
  std::size_t fields() const { return observables() + n_obs; }
};

struct Partial {
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::size_t completed = 0;
  std::map<std::string, std::size_t> failures;
};

ComplexMatrix initial_for_mode(const QuantumState& rho0, Mode mode) {
  if (mode != Mode::Stratonovich) return rho0.matrix();
  const auto spectrum = spectral_decomposition(rho0.matrix());
  if (spectrum.front().value < 1.0 - 1e-9) {
    throw Error(ErrorCode::InvalidArgument, "Stratonovich ensembles need a pure initial state");
  }
  return spectrum.front().vector * spectrum.front().vector.adjoint();
}

}  // namespace

std::size_t default_thread_count() {
  if (const char* env = std::getenv("QTRAJ_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && value > 0) return static_cast<std::size_t>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

EnsembleStats run_ensemble(const MeasurementModel& m, const QuantumState& rho0,
                           const TimeGrid& grid, std::size_t n_traj, std::uint64_t seed, Mode mode,
                           const EnsembleOptions& options) {
  if (n_traj == 0) throw Error(ErrorCode::InvalidArgument, "n_traj must be >= 1");
  if (rho0.dim() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "initial state dimension");
  for (const auto& a : options.observables) require_same_dim(a, rho0.matrix());
  const ComplexMatrix initial = initial_for_mode(rho0, mode);

  const std::size_t n = m.dim();
  Layout layout{n * n, m.jump_channels().size(), m.diffusive_ops().size(),
                options.observables.size()};
  const std::size_t stride = std::max<std::size_t>(1, options.sim.record_stride);
  std::vector<double> times;
  for (std::size_t s = 0; s <= grid.n_steps(); ++s) {
    if (s % stride == 0 || s == grid.n_steps()) times.push_back(grid.time(s));
  }
  const std::size_t n_times = times.size();
  const std::size_t width = n_times * layout.fields();

  SimOptions sim = options.sim;
  sim.store_output = false;

  auto run_trajectory = [&](std::uint64_t traj_seed, std::vector<double>& values) {
    std::size_t row = 0;
    integrate(
        m, mode, initial, grid, traj_seed, sim,
        [&](const StepSample& s) {
          double* out = values.data() + row * layout.fields();
          const double w = s.weight;
          const ComplexMatrix& x = s.state;  // sigma (linear) or rho
          for (std::size_t c = 0; c < n; ++c) {
            for (std::size_t r = 0; r < n; ++r) {
              const Complex z = x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
              out[c * n + r] = z.real();
              out[layout.n2 + c * n + r] = z.imag();
            }
          }
          out[layout.weight()] = w;
          // g(rho) with rho = x / w
          const double purity = w > 0.0 ? x.squaredNorm() / (w * w) : 1.0;
          out[layout.entropy()] = w * std::clamp(1.0 - purity, 0.0, 1.0);
          for (std::size_t k = 0; k < layout.n_jump; ++k) {
            out[layout.jumps() + k] = w * static_cast<double>(s.jump_counts[k]);
          }
          for (std::size_t j = 0; j < layout.n_diff; ++j) {
            out[layout.outputs() + j] = w * s.wiener_outputs[j];
          }
          for (std::size_t o = 0; o < layout.n_obs; ++o) {
            out[layout.observables() + o] = (options.observables[o] * x).trace().real();
          }
          ++row;
        },
        nullptr);
  };

  const std::size_t n_blocks = (n_traj + kBlockSize - 1) / kBlockSize;
  Partial total{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0), 0, {}};
  std::map<std::size_t, Partial> pending;
  std::size_t next_merge = 0;
  std::mutex merge_mutex;
  std::atomic<std::size_t> next_block{0};

  auto merge_ready = [&]() {
    for (auto it = pending.find(next_merge); it != pending.end(); it = pending.find(next_merge)) {
      Partial& p = it->second;
      for (std::size_t i = 0; i < width; ++i) {
        total.sum[i] += p.sum[i];
        total.sum_sq[i] += p.sum_sq[i];
      }
      total.completed += p.completed;
      for (const auto& [name, count] : p.failures) total.failures[name] += count;
      pending.erase(it);
      ++next_merge;
    }
  };

  auto worker = [&]() {
    std::vector<double> values(width, 0.0);
    for (std::size_t b = next_block++; b < n_blocks; b = next_block++) {
      Partial block{std::vector<double>(width, 0.0), std::vector<double>(width, 0.0), 0, {}};
      const std::size_t first = b * kBlockSize;
      const std::size_t last = std::min(n_traj, first + kBlockSize);
      for (std::size_t t = first; t < last; ++t) {
        try {
          run_trajectory(seed + t, values);
        } catch (const Error& e) {
          ++block.failures[std::string(to_string(e.code()))];
          continue;
        }
        for (std::size_t i = 0; i < width; ++i) {
          block.sum[i] += values[i];
          block.sum_sq[i] += values[i] * values[i];
        }
        ++block.completed;
      }
      std::lock_guard<std::mutex> lock(merge_mutex);
      pending.emplace(b, std::move(block));
      merge_ready();
    }
  };

  const std::size_t n_threads =
      std::clamp<std::size_t>(options.threads > 0 ? options.threads : default_thread_count(), 1,
                              n_blocks);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EnsembleStats stats;
  stats.mode = mode;
  stats.n_requested = n_traj;
  stats.n_completed = total.completed;
  stats.n_failed = n_traj - total.completed;
  stats.failures = total.failures;
  if (stats.n_failed * 100 > n_traj || stats.n_completed == 0) {
    throw Error(ErrorCode::EnsembleFailure,
                std::to_string(stats.n_failed) + " of " + std::to_string(n_traj) +
                    " trajectories failed");
  }

  const double count = static_cast<double>(stats.n_completed);
  auto mean_se = [&](std::size_t idx) {
    const double mean = total.sum[idx] / count;
    if (stats.n_completed < 2) return std::pair<double, double>{mean, 0.0};
    const double var = std::max(0.0, (total.sum_sq[idx] - count * mean * mean) / (count - 1.0));
    return std::pair<double, double>{mean, std::sqrt(var / count)};
  };

  stats.times = times;
  const auto ni = static_cast<Eigen::Index>(n);
  for (std::size_t row = 0; row < n_times; ++row) {
    const std::size_t base = row * layout.fields();
    ComplexMatrix mean(ni, ni);
    Eigen::MatrixXd se_re(ni, ni), se_im(ni, ni);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t r = 0; r < n; ++r) {
        const auto [re, re_se] = mean_se(base + c * n + r);
        const auto [im, im_se] = mean_se(base + layout.n2 + c * n + r);
        const auto ri = static_cast<Eigen::Index>(r), ci = static_cast<Eigen::Index>(c);
        mean(ri, ci) = Complex(re, im);
        se_re(ri, ci) = re_se;
        se_im(ri, ci) = im_se;
      }
    }
    stats.mean_state.push_back(mean);
    stats.state_se_real.push_back(se_re);
    stats.state_se_imag.push_back(se_im);
    const auto [w, w_se] = mean_se(base + layout.weight());
    stats.mean_weight.push_back(w);
    stats.weight_se.push_back(w_se);
    const auto [g, g_se] = mean_se(base + layout.entropy());
    stats.mean_entropy.push_back(g);
    stats.entropy_se.push_back(g_se);
    std::vector<double> jm, js, om, obm, obs;
    for (std::size_t k = 0; k < layout.n_jump; ++k) {
      const auto [v, e] = mean_se(base + layout.jumps() + k);
      jm.push_back(v);
      js.push_back(e);
    }
    for (std::size_t j = 0; j < layout.n_diff; ++j) om.push_back(mean_se(base + layout.outputs() + j).first);
    for (std::size_t o = 0; o < layout.n_obs; ++o) {
      const auto [v, e] = mean_se(base + layout.observables() + o);
      obm.push_back(v);
      obs.push_back(e);
    }
    stats.mean_jump_counts.push_back(std::move(jm));
    stats.jump_counts_se.push_back(std::move(js));
    stats.mean_outputs.push_back(std::move(om));
    stats.observable_mean.push_back(std::move(obm));
    stats.observable_se.push_back(std::move(obs));
  }
  return stats;
}

}  // namespace qtraj
