#include "qtraj/sde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtraj/error.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

TimeGrid::TimeGrid(double t_final, double dt) : t_final_(t_final), dt_(dt) {
  if (!(dt > 0.0) || !std::isfinite(dt) || !std::isfinite(t_final)) {
    throw Error(ErrorCode::InvalidArgument, "time step must be positive and finite");
  }
  if (!(t_final >= dt)) throw Error(ErrorCode::InvalidArgument, "t_final must be >= dt");
  n_steps_ = static_cast<std::size_t>(std::ceil(t_final / dt - 1e-9));
}

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Linear: return "linear";
    case Mode::Posterior: return "posterior";
    case Mode::Stratonovich: return "stratonovich";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "linear") return Mode::Linear;
  if (name == "posterior") return Mode::Posterior;
  if (name == "stratonovich") return Mode::Stratonovich;
  throw Error(ErrorCode::InvalidArgument, "unknown mode '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::EulerMaruyama: return "euler-maruyama";
    case Scheme::Kraus: return "kraus";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "euler-maruyama" || name == "euler") return Scheme::EulerMaruyama;
  if (name == "kraus") return Scheme::Kraus;
  throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + std::string(name) + "'");
}

namespace {

constexpr double kRateFloor = 1e-12;
constexpr double kWeightFloor = 1e-14;
constexpr int kMaxSubdivision = 30;

ComplexMatrix dominant_projector(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(a));
  const ComplexVector v = es.eigenvectors().col(a.rows() - 1);
  return v * v.adjoint();
}

/// Per-trajectory integrator with preallocated workspace.
class Engine {
 public:
  Engine(const MeasurementModel& m, Mode mode, const SimOptions& options, std::uint64_t seed)
      : m_(m), mode_(mode), options_(options), rng_(seed), n_(static_cast<Eigen::Index>(m.dim())) {
    for (const auto& l : m.diffusive_ops()) {
      l_.push_back(l);
      ldag_.push_back(l.adjoint());
      lsum_.push_back(l + l.adjoint());
    }
    for (const auto& s : m.dissipative_ops()) {
      s_.push_back(s);
      sdag_.push_back(s.adjoint());
    }
    for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
      effects_.push_back(jump_effect(m, k));
    }
    id_ = ComplexMatrix::Identity(n_, n_);
    g_ = -kI * m.hamiltonian() - 0.5 * (m.d1() + m.d2() + m.d3()) +
         0.5 * m.total_jump_mass() * id_;
    n_diff_ = l_.size();
    n_jump_ = effects_.size();
    dw_.assign(n_diff_, 0.0);
    drift_.assign(n_diff_, 0.0);
    fired_.assign(n_jump_, false);
    rates_.assign(n_jump_, 0.0);
    uniforms_.assign(n_jump_, 0.0);
  }

  void run(const ComplexMatrix& initial, const TimeGrid& grid, const StepObserver& observer,
           OutputRecord* output) {
    state_ = initial;
    const std::size_t steps = grid.n_steps();
    std::vector<std::size_t> counts(n_jump_, 0);
    std::vector<double> outputs(n_diff_, 0.0);
    if (output != nullptr) {
      output->wiener.assign(n_diff_, std::vector<double>(steps, 0.0));
      output->compensated_wiener.assign(n_diff_, std::vector<double>(steps, 0.0));
      output->jump_events.clear();
    }
    const std::size_t stride = std::max<std::size_t>(1, options_.record_stride);

    observer({0, 0.0, state_, weight(), counts, outputs});
    step_out_.assign(n_diff_, 0.0);
    step_innov_.assign(n_diff_, 0.0);
    for (std::size_t i = 0; i < steps; ++i) {
      std::fill(step_out_.begin(), step_out_.end(), 0.0);
      std::fill(step_innov_.begin(), step_innov_.end(), 0.0);
      step_events_.clear();
      advance(grid.dt(), 0);
      for (std::size_t j = 0; j < n_diff_; ++j) {
        outputs[j] += step_out_[j];
        if (output != nullptr) {
          output->wiener[j][i] = step_out_[j];
          output->compensated_wiener[j][i] = step_innov_[j];
        }
      }
      for (std::size_t k : step_events_) {
        ++counts[k];
        if (output != nullptr) output->jump_events.push_back({i, k});
      }
      const std::size_t step = i + 1;
      if (step % stride == 0 || step == steps) {
        observer({step, grid.time(step), state_, weight(), counts, outputs});
      }
    }
  }

 private:
  double weight() const {
    return mode_ == Mode::Linear ? state_.trace().real() : 1.0;
  }

  // Splits the step while any jump probability exceeds the configured bound.
  void advance(double h, int depth) {
    double max_prob = 0.0;
    for (std::size_t k = 0; k < n_jump_; ++k) {
      // intensity nu_k under the reference law, lambda_k nu_k under the physical law
      const double nu = m_.jump_channels()[k].weight;
      const double rate =
          mode_ == Mode::Linear ? nu : nu * std::max(0.0, trace_product(effects_[k], state_));
      max_prob = std::max(max_prob, rate * h);
    }
    if (max_prob > options_.max_jump_probability) {
      if (!options_.adaptive) {
        throw Error(ErrorCode::StepTooLarge, "jump probability " + std::to_string(max_prob) +
                                                 " per step exceeds " +
                                                 std::to_string(options_.max_jump_probability));
      }
      if (depth < kMaxSubdivision) {
        advance(0.5 * h, depth + 1);
        advance(0.5 * h, depth + 1);
        return;
      }
    }
    switch (mode_) {
      case Mode::Linear: linear_step(h); break;
      case Mode::Posterior: posterior_step(h); break;
      case Mode::Stratonovich: stratonovich_step(h); break;
    }
  }

  static double trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
    // Tr{a b} for Hermitian a, b
    return (a.transpose().cwiseProduct(b)).sum().real();
  }

  void draw(double h) {
    const double sq = std::sqrt(h);
    for (std::size_t j = 0; j < n_diff_; ++j) dw_[j] = sq * rng_.normal();
    for (std::size_t k = 0; k < n_jump_; ++k) uniforms_[k] = rng_.uniform();
  }

  void apply_channel(std::size_t k, const ComplexMatrix& in, ComplexMatrix& out) {
    out.setZero(n_, n_);
    for (const auto& j : m_.jump_channels()[k].kraus) {
      tmp_.noalias() = j * in;
      out.noalias() += tmp_ * j.adjoint();
    }
  }

  void add_dissipative(const ComplexMatrix& in, ComplexMatrix& out, double h) {
    for (std::size_t s = 0; s < s_.size(); ++s) {
      tmp_.noalias() = s_[s] * in;
      out.noalias() += h * (tmp_ * sdag_[s]);
    }
  }

  void clip_negative_spectrum(ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
    if (es.eigenvalues().minCoeff() >= 0.0) return;
    const RealVector clipped = es.eigenvalues().cwiseMax(0.0);
    a = es.eigenvectors() * clipped.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  }

  void linear_step(double h) {
    draw(h);
    const double tr = state_.trace().real();
    for (std::size_t j = 0; j < n_diff_; ++j) {
      drift_[j] = tr > 0.0 ? trace_product(lsum_[j], state_) / tr : 0.0;
    }
    for (std::size_t k = 0; k < n_jump_; ++k) {
      fired_[k] = uniforms_[k] < std::min(m_.jump_channels()[k].weight * h, 1.0);
    }

    if (options_.scheme == Scheme::Kraus) {
      kraus_update(h, dw_);
      for (std::size_t k = 0; k < n_jump_; ++k) {
        if (!fired_[k]) continue;
        apply_channel(k, next_, tmp2_);
        next_.swap(tmp2_);
      }
      state_ = 0.5 * (next_ + next_.adjoint());
    } else {
      next_ = state_ + h * apply_k(m_, state_);
      for (std::size_t j = 0; j < n_diff_; ++j) {
        tmp_.noalias() = l_[j] * state_;
        next_ += dw_[j] * (tmp_ + tmp_.adjoint());
      }
      for (std::size_t k = 0; k < n_jump_; ++k) {
        if (!fired_[k]) continue;
        apply_channel(k, state_, tmp2_);
        next_ += tmp2_ - state_;
      }
      state_ = 0.5 * (next_ + next_.adjoint());
      clip_negative_spectrum(state_);
    }
    record_increments(h, /*innovation_given=*/false);
    const double w = state_.trace().real();
    if (!(w >= kWeightFloor) || !state_.allFinite()) {
      throw Error(ErrorCode::WeightUnderflow, "trajectory weight fell to " + std::to_string(w));
    }
  }

  void posterior_step(double h) {
    draw(h);
    for (std::size_t j = 0; j < n_diff_; ++j) drift_[j] = trace_product(lsum_[j], state_);
    for (std::size_t k = 0; k < n_jump_; ++k) {
      rates_[k] = std::max(0.0, trace_product(effects_[k], state_));
      const double p = std::min(rates_[k] * m_.jump_channels()[k].weight * h, 1.0);
      fired_[k] = rates_[k] > kRateFloor && uniforms_[k] < p;
    }

    if (options_.scheme == Scheme::Kraus) {
      std::vector<double>& dy = dy_;
      dy.resize(n_diff_);
      for (std::size_t j = 0; j < n_diff_; ++j) dy[j] = dw_[j] + drift_[j] * h;
      kraus_update(h, dy);
      for (std::size_t k = 0; k < n_jump_; ++k) {
        if (!fired_[k]) continue;
        apply_channel(k, next_, tmp2_);
        next_.swap(tmp2_);
      }
      const double tr = next_.trace().real();
      if (!(tr > 0.0) || !next_.allFinite()) {
        throw Error(ErrorCode::ZeroTrace, "a posteriori state lost its trace");
      }
      state_ = (0.5 / tr) * (next_ + next_.adjoint());
    } else {
      next_ = state_ + h * posterior_drift();
      for (std::size_t j = 0; j < n_diff_; ++j) {
        tmp_.noalias() = l_[j] * state_;
        next_ += dw_[j] * (tmp_ + tmp_.adjoint() - drift_[j] * state_);
      }
      for (std::size_t k = 0; k < n_jump_; ++k) {
        if (!fired_[k]) continue;
        apply_channel(k, state_, tmp2_);
        next_ += tmp2_ / rates_[k] - state_;
      }
      state_ = project_to_state(next_).matrix();
    }
    record_increments(h, /*innovation_given=*/true);
  }

  // L[rho] minus the jump compensator over channels with positive rate.
  ComplexMatrix posterior_drift() {
    ComplexMatrix out = liouvillian_hamiltonian(m_, state_) + liouvillian_diffusive(m_, state_) +
                        liouvillian_dissipative(m_, state_) -
                        0.5 * (m_.d2() * state_ + state_ * m_.d2());
    for (std::size_t k = 0; k < n_jump_; ++k) {
      const double nu = m_.jump_channels()[k].weight;
      if (rates_[k] > kRateFloor) {
        out += nu * rates_[k] * state_;
      } else {
        apply_channel(k, state_, tmp2_);
        out += nu * tmp2_;
      }
    }
    return out;
  }

  // F = E_Q[effect of one step]: (I + G h)* Phi (I + G h) + h sum_j L_j* Phi L_j + h sum_h S_h* Phi S_h,
  // Phi = P_0*(P_1*(...(I))) with P_k* = (1 - p_k) id + p_k J_k*, p_k = min(nu_k h, 1).
  // Returns F^{-1/2}; conjugating the state by it makes E_Q[Tr] exactly conserved.
  const ComplexMatrix& normalizer(double h) {
    for (const auto& [step, inv_sqrt] : normalizers_) {
      if (step == h) return inv_sqrt;
    }
    ComplexMatrix phi = id_;
    for (std::size_t k = n_jump_; k-- > 0;) {
      const double p = std::min(m_.jump_channels()[k].weight * h, 1.0);
      ComplexMatrix fired = ComplexMatrix::Zero(n_, n_);
      for (const auto& j : m_.jump_channels()[k].kraus) fired += j.adjoint() * phi * j;
      phi = (1.0 - p) * phi + p * fired;
    }
    const ComplexMatrix a = id_ + h * g_;
    ComplexMatrix f = a.adjoint() * phi * a;
    for (const auto& l : l_) f += h * (l.adjoint() * phi * l);
    for (const auto& s : s_) f += h * (s.adjoint() * phi * s);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(f));
    normalizers_.emplace_back(h, es.operatorInverseSqrt());
    return normalizers_.back().second;
  }

  // next_ = M X M* + h sum_h S X S*,  M = I + G h + sum_j L_j dy_j,  X = F^{-1/2} state_ F^{-1/2}
  void kraus_update(double h, const std::vector<double>& dy) {
    const ComplexMatrix& r = normalizer(h);
    tmp_.noalias() = r * state_;
    scaled_.noalias() = tmp_ * r;
    kraus_ = id_ + h * g_;
    for (std::size_t j = 0; j < n_diff_; ++j) kraus_ += dy[j] * l_[j];
    tmp_.noalias() = kraus_ * scaled_;
    next_.noalias() = tmp_ * kraus_.adjoint();
    add_dissipative(scaled_, next_, h);
  }

  void stratonovich_step(double h) {
    draw(h);
    for (std::size_t j = 0; j < n_diff_; ++j) drift_[j] = trace_product(lsum_[j], state_);
    const ComplexMatrix a0 = stratonovich_drift(m_, state_);
    ComplexMatrix noise0 = ComplexMatrix::Zero(n_, n_);
    for (std::size_t j = 0; j < n_diff_; ++j) {
      noise0 += dw_[j] * stratonovich_diffusion(m_, state_, j);
    }
    const ComplexMatrix predictor = state_ + h * a0 + noise0;
    const ComplexMatrix a1 = stratonovich_drift(m_, predictor);
    ComplexMatrix noise1 = ComplexMatrix::Zero(n_, n_);
    for (std::size_t j = 0; j < n_diff_; ++j) {
      noise1 += dw_[j] * stratonovich_diffusion(m_, predictor, j);
    }
    next_ = state_ + 0.5 * h * (a0 + a1) + 0.5 * (noise0 + noise1);
    if (!next_.allFinite()) throw Error(ErrorCode::ZeroTrace, "Heun step diverged");
    state_ = dominant_projector(next_);
    record_increments(h, /*innovation_given=*/true);
  }

  // Accumulates this (sub)step's increments into the current grid step.
  void record_increments(double h, bool innovation_given) {
    for (std::size_t j = 0; j < n_diff_; ++j) {
      if (innovation_given) {
        step_innov_[j] += dw_[j];
        step_out_[j] += dw_[j] + drift_[j] * h;
      } else {
        step_out_[j] += dw_[j];
        step_innov_[j] += dw_[j] - drift_[j] * h;
      }
    }
    for (std::size_t k = 0; k < n_jump_; ++k) {
      if (fired_[k]) step_events_.push_back(k);
    }
  }

  const MeasurementModel& m_;
  Mode mode_;
  SimOptions options_;
  RandomStream rng_;
  Eigen::Index n_;
  std::size_t n_diff_ = 0;
  std::size_t n_jump_ = 0;

  std::vector<ComplexMatrix> l_, ldag_, lsum_, s_, sdag_, effects_;
  ComplexMatrix id_, g_;
  ComplexMatrix state_, next_, tmp_, tmp2_, kraus_, scaled_;
  std::vector<std::pair<double, ComplexMatrix>> normalizers_;
  std::vector<double> dw_, dy_, drift_, rates_, uniforms_;
  std::vector<bool> fired_;
  std::vector<double> step_out_, step_innov_;
  std::vector<std::size_t> step_events_;
};

void require_model_dim(const MeasurementModel& m, std::size_t dim) {
  if (dim != m.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state dimension " + std::to_string(dim) +
                                                  " != model dimension " +
                                                  std::to_string(m.dim()));
  }
}

void require_stratonovich_model(const MeasurementModel& m) {
  if (!m.jump_channels().empty()) {
    throw Error(ErrorCode::JumpChannelsPresent, "Stratonovich scheme is for diffusive models");
  }
  if (m.diffusive_ops().empty()) {
    throw Error(ErrorCode::NoDiffusiveChannels, "Stratonovich scheme needs diffusive operators");
  }
  if (!check_pure_preserving(m, 16, 0).verdict) {
    throw Error(ErrorCode::NotPurePreserving, "model does not preserve pure states");
  }
}

double linear_entropy_of(const ComplexMatrix& rho) {
  return std::clamp(1.0 - rho.squaredNorm(), 0.0, 1.0);
}

}  // namespace

void integrate(const MeasurementModel& m, Mode mode, const ComplexMatrix& initial,
               const TimeGrid& grid, std::uint64_t seed, const SimOptions& options,
               const StepObserver& observer, OutputRecord* output) {
  if (initial.rows() != initial.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state must be square");
  }
  require_model_dim(m, static_cast<std::size_t>(initial.rows()));
  if (mode == Mode::Stratonovich) require_stratonovich_model(m);
  Engine engine(m, mode, options, seed);
  engine.run(initial, grid, observer, output);
}

LinearTrajectory simulate_linear(const MeasurementModel& m, const QuantumState& rho0,
                                 const TimeGrid& grid, std::uint64_t seed,
                                 const SimOptions& options) {
  LinearTrajectory traj;
  traj.grid = grid;
  integrate(
      m, Mode::Linear, rho0.matrix(), grid, seed, options,
      [&](const StepSample& s) {
        traj.times.push_back(s.time);
        traj.sigma_path.push_back(s.state);
        traj.weight_path.push_back(s.weight);
      },
      options.store_output ? &traj.output : nullptr);
  return traj;
}

PosteriorTrajectory simulate_posterior(const MeasurementModel& m, const QuantumState& rho0,
                                       const TimeGrid& grid, std::uint64_t seed,
                                       const SimOptions& options) {
  PosteriorTrajectory traj;
  traj.grid = grid;
  integrate(
      m, Mode::Posterior, rho0.matrix(), grid, seed, options,
      [&](const StepSample& s) {
        traj.times.push_back(s.time);
        traj.state_path.push_back(s.step == 0 ? rho0 : project_to_state(s.state));
        traj.entropy_path.push_back(linear_entropy_of(traj.state_path.back().matrix()));
      },
      options.store_output ? &traj.output : nullptr);
  return traj;
}

PosteriorTrajectory simulate_stratonovich_pure(const MeasurementModel& m,
                                               const PureStateVector& psi0, const TimeGrid& grid,
                                               std::uint64_t seed, const SimOptions& options) {
  require_model_dim(m, psi0.dim());
  PosteriorTrajectory traj;
  traj.grid = grid;
  integrate(
      m, Mode::Stratonovich, psi0.projector(), grid, seed, options,
      [&](const StepSample& s) {
        traj.times.push_back(s.time);
        traj.state_path.push_back(project_to_state(s.state));
        traj.entropy_path.push_back(linear_entropy_of(traj.state_path.back().matrix()));
      },
      options.store_output ? &traj.output : nullptr);
  return traj;
}

FlowPath deterministic_flow(const MeasurementModel& m, const PureStateVector& psi0, double t_final,
                            int sign, std::size_t n_intervals,
                            std::optional<std::size_t> designated) {
  require_model_dim(m, psi0.dim());
  if (sign != 1 && sign != -1) throw Error(ErrorCode::InvalidArgument, "sign must be +1 or -1");
  if (!(t_final > 0.0) || !std::isfinite(t_final) || n_intervals == 0) {
    throw Error(ErrorCode::InvalidArgument, "flow needs t_final > 0 and at least one interval");
  }
  const auto& ops = m.diffusive_ops();
  if (ops.empty()) throw Error(ErrorCode::NoDiffusiveChannels, "flow needs a diffusive operator");
  std::size_t index = 0;
  if (designated) {
    if (*designated >= ops.size()) throw Error(ErrorCode::BadChannelIndex, "designated operator");
    index = *designated;
  } else if (ops.size() > 1) {
    throw Error(ErrorCode::MultipleDiffusiveOps, "designate which diffusive operator drives the flow");
  }
  const ComplexMatrix generator = static_cast<double>(sign) * ops[index];

  FlowPath path;
  for (std::size_t i = 0; i <= n_intervals; ++i) {
    const double t = t_final * static_cast<double>(i) / static_cast<double>(n_intervals);
    const ComplexVector psi = matrix_exp_action(generator, t, psi0.amplitudes());
    const ComplexVector unit = PureStateVector::normalized(psi).amplitudes();
    path.times.push_back(t);
    path.states.push_back(project_to_state(unit * unit.adjoint()));
  }
  const auto& last = path.states.back().matrix();
  const auto& before = path.states[path.states.size() - 2].matrix();
  if ((last - before).norm() < 1e-9) path.limit = path.states.back();
  return path;
}

}  // namespace qtraj
