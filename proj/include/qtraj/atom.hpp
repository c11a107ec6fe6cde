#pragma once

// Two-level atom driven by a laser, with fluorescence observed by homodyne,
// heterodyne or direct photodetection. Basis order is (excited, ground).

#include <string>
#include <string_view>
#include <vector>

#include "qtraj/model.hpp"

namespace qtraj {

namespace pauli {
ComplexMatrix raising();   // sigma_+ = |e><g|
ComplexMatrix lowering();  // sigma_- = |g><e|
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
ComplexMatrix identity();
}  // namespace pauli

enum class Detection { Homodyne, Heterodyne, Direct };

std::string_view to_string(Detection d) noexcept;
Detection parse_detection(std::string_view name);

struct TwoLevelAtomSpec {
  double delta_omega = 0.0;         // laser detuning omega - omega_0
  std::vector<Complex> alpha;       // components <e_j|alpha>
  Complex lambda_inner{0.0, 0.5};   // <alpha|lambda>; Rabi frequency is 2|<alpha|lambda>|
  Detection detection = Detection::Heterodyne;
  double phi = 0.0;                 // local-oscillator phase, homodyne only

  double linewidth() const;  // ||alpha||^2
  double rabi() const;       // 2 |<alpha|lambda>|
};

/// <alpha|lambda> = i Omega / 2, the convention under which H = (Omega/2) sigma_x at zero detuning.
inline Complex resonant_coupling(double rabi) { return {0.0, 0.5 * rabi}; }

MeasurementModel generate_atom_model(const TwoLevelAtomSpec& spec);

/// Ground state |g><g| = diag(0, 1), the contraction point of the homodyne model.
ComplexMatrix atom_ground_projector();

}  // namespace qtraj
