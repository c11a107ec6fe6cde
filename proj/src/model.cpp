#include "qtraj/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtraj/error.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

void require_dim(const ComplexMatrix& a, std::size_t dim, const std::string& what) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (a.rows() != n || a.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, what + " is " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + ", model dimension " +
                                                  std::to_string(dim));
  }
}

void require_state_dim(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_dim(rho, m.dim(), "operand");
}

// a rho + rho a for Hermitian a
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& rho) {
  return a * rho + rho * a;
}

bool proportional_to_identity(const ComplexMatrix& a, double tol, Complex& factor) {
  const auto n = a.rows();
  factor = a.trace() / static_cast<double>(n);
  const ComplexMatrix rest = a - factor * ComplexMatrix::Identity(n, n);
  return rest.norm() <= tol * std::max(1.0, a.norm());
}

std::string format_complex(Complex z) {
  return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

}  // namespace

ModelDescription MeasurementModel::description() const {
  return ModelDescription{dim_, h_, l_, channels_, s_};
}

MeasurementModel build_model(const ModelDescription& config, const NumericPolicy& policy) {
  if (config.dim == 0) throw Error(ErrorCode::DimensionMismatch, "dimension must be positive");
  const std::size_t dim = config.dim;
  const auto n = static_cast<Eigen::Index>(dim);

  ComplexMatrix h = config.hamiltonian.size() == 0 ? ComplexMatrix::Zero(n, n)
                                                   : config.hamiltonian;
  require_dim(h, dim, "hamiltonian");
  if (!h.allFinite()) throw Error(ErrorCode::ConfigError, "hamiltonian has non-finite entries");
  if (!is_hermitian(h, policy.model_hermitian_tol * static_cast<double>(dim))) {
    throw Error(ErrorCode::NonHermitianH, "H differs from its adjoint by " +
                                              std::to_string((h - h.adjoint()).norm()));
  }

  MeasurementModel m;
  m.dim_ = dim;
  m.h_ = hermitize(h);
  m.d1_ = ComplexMatrix::Zero(n, n);
  m.d2_ = ComplexMatrix::Zero(n, n);
  m.d3_ = ComplexMatrix::Zero(n, n);

  for (std::size_t j = 0; j < config.diffusive_ops.size(); ++j) {
    const auto& l = config.diffusive_ops[j];
    require_dim(l, dim, "diffusive_ops[" + std::to_string(j) + "]");
    m.l_.push_back(l);
    m.d1_ += l.adjoint() * l;
  }
  for (std::size_t k = 0; k < config.jump_channels.size(); ++k) {
    const auto& ch = config.jump_channels[k];
    const std::string where = "jump_channels[" + std::to_string(k) + "]";
    if (!(ch.weight > 0.0) || !std::isfinite(ch.weight)) {
      throw Error(ErrorCode::ConfigError, where + " weight must be positive");
    }
    if (ch.kraus.empty()) throw Error(ErrorCode::ConfigError, where + " has no Kraus operators");
    for (const auto& j : ch.kraus) {
      require_dim(j, dim, where + " Kraus operator");
      m.d2_ += ch.weight * (j.adjoint() * j);
    }
    m.channels_.push_back(ch);
    if (m.channels_.back().label.empty()) m.channels_.back().label = "y" + std::to_string(k);
    m.total_mass_ += ch.weight;
  }
  for (std::size_t hidx = 0; hidx < config.dissipative_ops.size(); ++hidx) {
    const auto& s = config.dissipative_ops[hidx];
    require_dim(s, dim, "dissipative_ops[" + std::to_string(hidx) + "]");
    m.s_.push_back(s);
    m.d3_ += s.adjoint() * s;
  }
  m.d1_ = hermitize(m.d1_);
  m.d2_ = hermitize(m.d2_);
  m.d3_ = hermitize(m.d3_);

  if (m.l_.empty() && m.channels_.empty() && m.s_.empty()) {
    m.warnings_.push_back(h.norm() == 0.0 ? "EmptyModel: no channels and H = 0"
                                          : "EmptyModel: no measurement or dissipative channels");
  }
  m.cache_ = std::make_shared<detail::GeneratorCache>();
  return m;
}

ComplexMatrix liouvillian_hamiltonian(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_state_dim(m, rho);
  const auto& h = m.hamiltonian();
  return -kI * (h * rho - rho * h);
}

ComplexMatrix liouvillian_diffusive(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_state_dim(m, rho);
  ComplexMatrix out = -0.5 * anticommutator(m.d1(), rho);
  for (const auto& l : m.diffusive_ops()) out += l * rho * l.adjoint();
  return out;
}

ComplexMatrix liouvillian_jump(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_state_dim(m, rho);
  return apply_jump_sum(m, rho) - 0.5 * anticommutator(m.d2(), rho);
}

ComplexMatrix liouvillian_dissipative(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_state_dim(m, rho);
  ComplexMatrix out = -0.5 * anticommutator(m.d3(), rho);
  for (const auto& s : m.dissipative_ops()) out += s * rho * s.adjoint();
  return out;
}

ComplexMatrix apply_liouvillian(const MeasurementModel& m, const ComplexMatrix& rho) {
  return liouvillian_hamiltonian(m, rho) + liouvillian_diffusive(m, rho) +
         liouvillian_jump(m, rho) + liouvillian_dissipative(m, rho);
}

ComplexMatrix apply_k(const MeasurementModel& m, const ComplexMatrix& rho) {
  return liouvillian_hamiltonian(m, rho) + liouvillian_diffusive(m, rho) -
         0.5 * anticommutator(m.d2(), rho) + m.total_jump_mass() * rho +
         liouvillian_dissipative(m, rho);
}

ComplexMatrix apply_jump(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t k) {
  if (k >= m.jump_channels().size()) {
    throw Error(ErrorCode::BadChannelIndex, "jump channel " + std::to_string(k));
  }
  require_state_dim(m, rho);
  const auto n = static_cast<Eigen::Index>(m.dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& j : m.jump_channels()[k].kraus) out += j * rho * j.adjoint();
  return out;
}

ComplexMatrix apply_jump_sum(const MeasurementModel& m, const ComplexMatrix& rho) {
  require_state_dim(m, rho);
  const auto n = static_cast<Eigen::Index>(m.dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
    out += m.jump_channels()[k].weight * apply_jump(m, rho, k);
  }
  return out;
}

ComplexMatrix jump_effect(const MeasurementModel& m, std::size_t k) {
  if (k >= m.jump_channels().size()) {
    throw Error(ErrorCode::BadChannelIndex, "jump channel " + std::to_string(k));
  }
  const auto n = static_cast<Eigen::Index>(m.dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (const auto& j : m.jump_channels()[k].kraus) out += j.adjoint() * j;
  return out;
}

double jump_rate(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t k) {
  return std::max(0.0, apply_jump(m, rho, k).trace().real());
}

double jump_rate(const MeasurementModel& m, const QuantumState& rho, std::size_t k) {
  return jump_rate(m, rho.matrix(), k);
}

double output_drift(const MeasurementModel& m, const ComplexMatrix& rho, std::size_t j) {
  if (j >= m.diffusive_ops().size()) {
    throw Error(ErrorCode::BadChannelIndex, "diffusive channel " + std::to_string(j));
  }
  require_state_dim(m, rho);
  const auto& l = m.diffusive_ops()[j];
  return ((l + l.adjoint()) * rho).trace().real();
}

double output_drift(const MeasurementModel& m, const QuantumState& rho, std::size_t j) {
  return output_drift(m, rho.matrix(), j);
}

ComplexMatrix stratonovich_diffusion(const MeasurementModel& m, const ComplexMatrix& rho,
                                     std::size_t j) {
  const double mj = output_drift(m, rho, j);
  const auto& l = m.diffusive_ops()[j];
  return l * rho + rho * l.adjoint() - mj * rho;
}

ComplexMatrix stratonovich_drift(const MeasurementModel& m, const ComplexMatrix& rho) {
  ComplexMatrix out = liouvillian_hamiltonian(m, rho);
  for (std::size_t j = 0; j < m.diffusive_ops().size(); ++j) {
    const auto& l = m.diffusive_ops()[j];
    const ComplexMatrix x = l + l.adjoint();
    const ComplexMatrix xl_rho = x * l * rho;
    const ComplexMatrix rho_ldag_x = rho * l.adjoint() * x;
    out += output_drift(m, rho, j) * stratonovich_diffusion(m, rho, j);
    out -= 0.5 * (xl_rho - xl_rho.trace() * rho);
    out -= 0.5 * (rho_ldag_x - rho_ldag_x.trace() * rho);
  }
  return out;
}

PurePreservingReport check_pure_preserving(const MeasurementModel& m, std::size_t n_samples,
                                           std::uint64_t rng_seed) {
  if (n_samples == 0) throw Error(ErrorCode::InvalidArgument, "n_samples must be >= 1");
  PurePreservingReport report;
  for (const auto& s : m.dissipative_ops()) {
    if (s.norm() > 0.0) report.dissipative_present = true;
  }
  if (report.dissipative_present) {
    report.verdict = false;
    return report;
  }

  RandomStream rng(rng_seed);
  const std::size_t total = m.dim() + n_samples;
  for (std::size_t i = 0; i < total; ++i) {
    const PureStateVector psi =
        i < m.dim() ? PureStateVector::basis(m.dim(), i) : haar_pure_state(m.dim(), rng);
    const ComplexMatrix rho = psi.projector();
    for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
      const ComplexMatrix image = hermitize(apply_jump(m, rho, k));
      const double tr = image.trace().real();
      if (tr <= 1e-12) continue;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(image, Eigen::EigenvaluesOnly);
      const auto& ev = es.eigenvalues();
      const double second = ev.size() >= 2 ? ev(ev.size() - 2) : 0.0;
      if (second > 1e-8 * tr) report.witnesses.push_back({psi.amplitudes(), k, second, tr});
    }
    ++report.states_tested;
  }
  report.verdict = report.witnesses.empty();
  return report;
}

ObstructionReport check_purification_obstruction_dim2(const MeasurementModel& m) {
  if (m.dim() != 2) {
    throw Error(ErrorCode::DimensionNotTwo, "obstruction check is exact only for dimension 2");
  }
  constexpr double kTol = 1e-10;
  ObstructionReport report;
  bool all = true;
  for (std::size_t j = 0; j < m.diffusive_ops().size(); ++j) {
    const auto& l = m.diffusive_ops()[j];
    Complex z;
    const bool prop = proportional_to_identity(l + l.adjoint(), kTol, z);
    report.details.push_back("L_" + std::to_string(j) + " + L_" + std::to_string(j) + "*" +
                             (prop ? " = " + format_complex(z) + " I" : " not proportional to I"));
    all = all && prop;
  }
  for (std::size_t k = 0; k < m.jump_channels().size(); ++k) {
    Complex q;
    const bool prop = proportional_to_identity(jump_effect(m, k), kTol, q);
    report.details.push_back("channel " + m.jump_channels()[k].label + " effect" +
                             (prop ? " = " + format_complex(q) + " I" : " not proportional to I"));
    all = all && prop;
  }
  report.details.push_back("clause on the set A not checked (no constructive representation)");
  report.obstruction_exists = all;
  return report;
}

EllipticityReport check_ellipticity(const MeasurementModel& m, const PureStateVector& psi,
                                    double threshold) {
  if (m.diffusive_ops().empty()) {
    throw Error(ErrorCode::NoDiffusiveChannels, "ellipticity needs diffusive operators");
  }
  if (psi.dim() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "psi dimension");
  const auto n = static_cast<Eigen::Index>(m.dim());
  EllipticityReport report;
  if (n == 1) {
    report.elliptic = true;
    return report;
  }

  // Columns 1..n-1 of the Householder completion of psi span its complement.
  Eigen::HouseholderQR<ComplexMatrix> qr(ComplexMatrix(psi.amplitudes()));
  const ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
  const ComplexMatrix complement = q.rightCols(n - 1);

  const auto n_fields = static_cast<Eigen::Index>(m.diffusive_ops().size());
  const Eigen::Index real_dim = 2 * (n - 1);
  Eigen::MatrixXd map(n_fields, real_dim);
  for (Eigen::Index j = 0; j < n_fields; ++j) {
    const ComplexVector lpsi = m.diffusive_ops()[static_cast<std::size_t>(j)] * psi.amplitudes();
    for (Eigen::Index k = 0; k < n - 1; ++k) {
      const Complex c = complement.col(k).dot(lpsi);  // <b_k | L_j psi>
      map(j, 2 * k) = c.real();      // direction b_k
      map(j, 2 * k + 1) = c.imag();  // direction i b_k
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(map, Eigen::ComputeFullV);
  RealVector sv = RealVector::Zero(real_dim);
  sv.head(svd.singularValues().size()) = svd.singularValues();
  report.singular_values = sv;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) rank += sv(i) > threshold ? 1 : 0;
  report.elliptic = rank == real_dim;
  if (!report.elliptic) {
    const RealVector x = svd.matrixV().col(real_dim - 1);
    ComplexVector phi = ComplexVector::Zero(n);
    for (Eigen::Index k = 0; k < n - 1; ++k) {
      phi += Complex(x(2 * k), x(2 * k + 1)) * complement.col(k);
    }
    report.failing_direction = phi;
  }
  return report;
}

}  // namespace qtraj
