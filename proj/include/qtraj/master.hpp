#pragma once

// Deterministic reference dynamics d eta / dt = L[eta] and its stationary state.

#include <memory>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

/// n^2 x n^2 matrix of rho -> L[rho] acting on column-stacked vec(rho).
class VectorizedLiouvillian {
 public:
  explicit VectorizedLiouvillian(const MeasurementModel& m);

  std::size_t dim() const noexcept { return dim_; }
  const ComplexMatrix& matrix() const noexcept { return cache_->matrix; }
  ComplexMatrix apply(const ComplexMatrix& rho) const;

 private:
  std::size_t dim_;
  std::shared_ptr<detail::GeneratorCache> cache_;
};

ComplexVector vectorize(const ComplexMatrix& a);
ComplexMatrix unvectorize(const ComplexVector& v, std::size_t dim);

/// eta_t = exp(L t)[rho0] at each requested time (nonnegative, ascending).
std::vector<QuantumState> evolve_master(const MeasurementModel& m, const QuantumState& rho0,
                                        const std::vector<double>& times);

/// Unique state with L[eta] = 0, from the null space of the vectorized generator.
QuantumState equilibrium(const MeasurementModel& m);

}  // namespace qtraj
