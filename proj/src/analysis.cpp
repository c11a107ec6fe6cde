#include "qtraj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "qtraj/error.hpp"

namespace qtraj {

namespace {

constexpr double kEigenFloor = 1e-14;
constexpr double kMixedFlag = 0.05;
constexpr double kBracketStep = 1e-5;
constexpr double kRankThreshold = 1e-6;

// Trapezoidal weights of the samples in [burn_in, t_final]; samples before burn_in get 0.
std::vector<double> window_weights(const std::vector<double>& times, double burn_in) {
  std::vector<double> w(times.size(), 0.0);
  std::size_t first = times.size();
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= burn_in - 1e-12) {
      first = i;
      break;
    }
  }
  if (first + 1 >= times.size()) {
    throw Error(ErrorCode::EmptyWindow, "fewer than two samples after burn-in " +
                                            std::to_string(burn_in));
  }
  double span = 0.0;
  for (std::size_t i = first; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
    span += h;
  }
  if (!(span > 0.0)) throw Error(ErrorCode::EmptyWindow, "averaging window has zero length");
  for (double& x : w) x /= span;
  return w;
}

// Dwell time of each sample: the spacing to the next sample (the last one gets the previous spacing).
std::vector<double> dwell_weights(const std::vector<double>& times, double burn_in) {
  std::vector<double> w(times.size(), 0.0);
  std::size_t used = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < burn_in - 1e-12) continue;
    if (i + 1 < times.size()) {
      w[i] = times[i + 1] - times[i];
    } else if (i > 0) {
      w[i] = times[i] - times[i - 1];
    }
    ++used;
  }
  if (used == 0) {
    throw Error(ErrorCode::EmptyWindow, "no samples after burn-in " + std::to_string(burn_in));
  }
  return w;
}

// Bloch direction of the dominant eigenvector, and whether the state was too mixed.
std::array<double, 3> bloch_direction(const ComplexMatrix& rho, bool& mixed) {
  mixed = 1.0 - rho.squaredNorm() > kMixedFlag;
  ComplexMatrix p = rho;
  if (mixed) {
    const auto top = spectral_decomposition(rho).front();
    p = top.vector * top.vector.adjoint();
  }
  auto r = bloch_vector(p);
  const double norm = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
  if (norm > 0.0) {
    for (double& c : r) c /= norm;
  } else {
    r = {0.0, 0.0, 1.0};
  }
  return r;
}

using Field = std::function<ComplexMatrix(const ComplexMatrix&)>;

// [X, Y](rho) = DY(rho)[X(rho)] - DX(rho)[Y(rho)] with central differences.
Field bracket(Field x, Field y) {
  return [x, y](const ComplexMatrix& rho) -> ComplexMatrix {
    const ComplexMatrix vx = x(rho);
    const ComplexMatrix vy = y(rho);
    const double h = kBracketStep;
    const ComplexMatrix dy = (y(rho + h * vx) - y(rho - h * vx)) / (2.0 * h);
    const ComplexMatrix dx = (x(rho + h * vy) - x(rho - h * vy)) / (2.0 * h);
    return dy - dx;
  };
}

}  // namespace

double linear_entropy(const QuantumState& rho) {
  const double purity = rho.matrix().squaredNorm();
  return std::clamp(1.0 - purity, 0.0, 1.0);
}

double von_neumann_entropy(const QuantumState& rho) {
  double s = 0.0;
  for (const auto& e : spectral_decomposition(rho.matrix())) {
    if (e.value > kEigenFloor) s -= e.value * std::log(e.value);
  }
  return std::max(0.0, s);
}

QuantumState time_average_state(const PosteriorTrajectory& traj, double burn_in) {
  const auto w = window_weights(traj.times, burn_in);
  const auto n = static_cast<Eigen::Index>(traj.state_path.front().dim());
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] != 0.0) acc += w[i] * traj.state_path[i].matrix();
  }
  return project_to_state(acc);
}

double quantum_variance(const ComplexMatrix& a, const QuantumState& rho) {
  require_same_dim(a, rho.matrix());
  const double second = hs_inner(a.adjoint() * a, rho.matrix()).real();
  const double first = std::norm(hs_inner(a, rho.matrix()));
  return std::max(0.0, second - first);
}

VarianceDecomposition variance_decomposition(const ComplexMatrix& a,
                                             const PosteriorTrajectory& traj,
                                             const QuantumState& eta_eq, double burn_in) {
  require_same_dim(a, eta_eq.matrix());
  const auto w = window_weights(traj.times, burn_in);
  VarianceDecomposition out;
  out.lhs = quantum_variance(a, eta_eq);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const QuantumState& rho = traj.state_path[i];
    out.term1 += w[i] * quantum_variance(a, rho);
    out.term2 += w[i] * std::norm(hs_inner(a, rho.matrix() - eta_eq.matrix()));
  }
  out.residual = out.lhs - out.term1 - out.term2;
  return out;
}

ErgodicReport ergodic_report(const PosteriorTrajectory& traj, const QuantumState& eta_eq,
                             double burn_in, const std::vector<ComplexMatrix>& observables) {
  QuantumState avg = time_average_state(traj, burn_in);
  const double distance = hs_norm(avg.matrix() - eta_eq.matrix());
  ErgodicReport report{std::move(avg), eta_eq, distance, {}};
  for (const auto& a : observables) {
    report.variance.push_back(variance_decomposition(a, traj, eta_eq, burn_in));
  }
  return report;
}

std::array<double, 3> bloch_vector(const ComplexMatrix& rho) {
  if (rho.rows() != 2 || rho.cols() != 2) {
    throw Error(ErrorCode::DimensionNotTwo, "Bloch coordinates need a 2x2 matrix");
  }
  return {2.0 * rho(1, 0).real(), 2.0 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

std::size_t BlochHistogram::occupied_bins() const {
  return static_cast<std::size_t>(
      std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; }));
}

void BlochHistogram::merge(const BlochHistogram& other) {
  if (other.n_polar != n_polar || other.n_azimuth != n_azimuth) {
    throw Error(ErrorCode::DimensionMismatch, "histogram grids differ");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] += other.counts[i];
    dwell_time[i] += other.dwell_time[i];
  }
  total += other.total;
  flagged += other.flagged;
}

BlochHistogram empirical_invariant_measure(const PosteriorTrajectory& traj, std::size_t n_polar,
                                           std::size_t n_azimuth, double burn_in) {
  if (traj.state_path.empty() || traj.state_path.front().dim() != 2) {
    throw Error(ErrorCode::DimensionNotTwo, "Bloch histograms need a two-level system");
  }
  if (n_polar == 0 || n_azimuth == 0) {
    throw Error(ErrorCode::InvalidArgument, "histogram grid must be at least 1x1");
  }
  const auto dwell = dwell_weights(traj.times, burn_in);
  BlochHistogram hist;
  hist.n_polar = n_polar;
  hist.n_azimuth = n_azimuth;
  hist.counts.assign(n_polar * n_azimuth, 0);
  hist.dwell_time.assign(n_polar * n_azimuth, 0.0);
  constexpr double pi = std::numbers::pi;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] < burn_in - 1e-12) continue;
    bool mixed = false;
    const auto r = bloch_direction(traj.state_path[i].matrix(), mixed);
    const double theta = std::acos(std::clamp(r[2], -1.0, 1.0));
    double phi = std::atan2(r[1], r[0]);
    if (phi < 0.0) phi += 2.0 * pi;
    const auto ti = std::min(n_polar - 1, static_cast<std::size_t>(theta / pi * n_polar));
    const auto pj = std::min(n_azimuth - 1, static_cast<std::size_t>(phi / (2.0 * pi) * n_azimuth));
    const std::size_t k = hist.index(ti, pj);
    ++hist.counts[k];
    hist.dwell_time[k] += dwell[i];
    ++hist.total;
    if (mixed) ++hist.flagged;
  }
  return hist;
}

GreatCircleFit great_circle_concentration(const PosteriorTrajectory& traj, double burn_in,
                                          double half_width) {
  if (traj.state_path.empty() || traj.state_path.front().dim() != 2) {
    throw Error(ErrorCode::DimensionNotTwo, "Bloch geometry needs a two-level system");
  }
  const auto dwell = dwell_weights(traj.times, burn_in);
  std::vector<std::array<double, 3>> dirs(traj.times.size());
  Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
  double total = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (dwell[i] <= 0.0) continue;
    bool mixed = false;
    dirs[i] = bloch_direction(traj.state_path[i].matrix(), mixed);
    const Eigen::Vector3d r(dirs[i][0], dirs[i][1], dirs[i][2]);
    moment += dwell[i] * r * r.transpose();
    total += dwell[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(moment);
  const Eigen::Vector3d n = eig.eigenvectors().col(0);  // smallest eigenvalue
  GreatCircleFit fit;
  fit.normal = {n(0), n(1), n(2)};
  double inside = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (dwell[i] <= 0.0) continue;
    const double c = n(0) * dirs[i][0] + n(1) * dirs[i][1] + n(2) * dirs[i][2];
    const double angle = std::asin(std::min(1.0, std::abs(c)));
    fit.max_angle = std::max(fit.max_angle, angle);
    if (angle <= half_width) inside += dwell[i];
  }
  fit.fraction = total > 0.0 ? inside / total : 0.0;
  return fit;
}

std::vector<ComplexMatrix> gell_mann_basis(std::size_t n) {
  const auto ni = static_cast<Eigen::Index>(n);
  std::vector<ComplexMatrix> basis;
  const double s = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < ni; ++j) {
    for (Eigen::Index k = j + 1; k < ni; ++k) {
      ComplexMatrix sym = ComplexMatrix::Zero(ni, ni);
      sym(j, k) = sym(k, j) = s;
      basis.push_back(sym);
      ComplexMatrix anti = ComplexMatrix::Zero(ni, ni);
      anti(j, k) = Complex(0.0, -s);
      anti(k, j) = Complex(0.0, s);
      basis.push_back(anti);
    }
  }
  for (Eigen::Index l = 1; l < ni; ++l) {
    ComplexMatrix d = ComplexMatrix::Zero(ni, ni);
    const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
    for (Eigen::Index j = 0; j < l; ++j) d(j, j) = c;
    d(l, l) = -static_cast<double>(l) * c;
    basis.push_back(d);
  }
  return basis;
}

LieRankReport lie_rank_check(const MeasurementModel& m, const PureStateVector& psi,
                             std::size_t max_depth) {
  if (m.diffusive_ops().empty()) {
    throw Error(ErrorCode::NoDiffusiveChannels, "Lie-rank test needs diffusive operators");
  }
  if (psi.dim() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "state dimension");

  std::vector<Field> generators;
  generators.push_back([&m](const ComplexMatrix& r) { return stratonovich_drift(m, r); });
  for (std::size_t j = 0; j < m.diffusive_ops().size(); ++j) {
    generators.push_back(
        [&m, j](const ComplexMatrix& r) { return stratonovich_diffusion(m, r, j); });
  }

  // Right-nested brackets [X_1, [X_2, ... [X_{k-1}, X_k]]] up to max_depth.
  std::vector<Field> all = generators;
  std::vector<Field> layer = generators;
  for (std::size_t depth = 1; depth <= max_depth; ++depth) {
    std::vector<Field> next;
    for (const auto& g : generators) {
      for (const auto& f : layer) next.push_back(bracket(g, f));
    }
    all.insert(all.end(), next.begin(), next.end());
    layer = std::move(next);
  }

  const ComplexMatrix rho = psi.projector();
  const auto basis = gell_mann_basis(m.dim());
  Eigen::MatrixXd columns(static_cast<Eigen::Index>(basis.size()),
                          static_cast<Eigen::Index>(all.size()));
  for (std::size_t c = 0; c < all.size(); ++c) {
    const ComplexMatrix tau = hermitize(all[c](rho));
    const ComplexMatrix t = rho * tau + tau * rho - 2.0 * rho * tau * rho;
    for (std::size_t a = 0; a < basis.size(); ++a) {
      columns(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) =
          hs_inner(basis[a], t).real();
    }
  }

  LieRankReport report;
  report.tangent_dim = 2 * (m.dim() - 1);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(columns);
  report.singular_values = svd.singularValues();
  for (Eigen::Index i = 0; i < report.singular_values.size(); ++i) {
    if (report.singular_values(i) > kRankThreshold) ++report.rank;
  }
  report.rank = std::min(report.rank, report.tangent_dim);
  report.full = report.rank == report.tangent_dim;
  return report;
}

}  // namespace qtraj
