#pragma once

// Model files (JSON) and CSV / key-value report writers.
//
// Model schema:
//   {
//     "dimension": n,
//     "hamiltonian": [[z, ...], ...],           row-major, z = [re, im] or a real number
//     "diffusive_ops": [matrix, ...],
//     "jump_channels": [{"label": s, "weight": w, "kraus": [matrix, ...]}, ...],
//     "dissipative_ops": [matrix, ...]
//   }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qtraj/analysis.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/model.hpp"
#include "qtraj/sde.hpp"

namespace qtraj {

std::string_view library_version() noexcept;

ModelDescription parse_model_json(const std::string& text);
std::string model_to_json(const ModelDescription& desc);

ModelDescription load_model_description(const std::filesystem::path& path);
MeasurementModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const ModelDescription& desc);

/// FNV-1a (64 bit) of the canonical JSON form, as 16 hex digits.
std::string model_hash(const ModelDescription& desc);

/// Scientific notation with 17 significant digits.
std::string format_double(double x);

struct RunMetadata {
  std::string command;
  std::string model_hash;
  std::optional<std::uint64_t> seed;
  std::string scheme = "none";
  std::optional<double> dt;
  std::string extra;  // free-form "key=value" pairs appended verbatim
};

/// "# qtraj version=... command=... model_hash=... seed=... scheme=... dt=... rng=..."
std::string metadata_line(const RunMetadata& meta);

void write_posterior_csv(std::ostream& out, const RunMetadata& meta,
                         const PosteriorTrajectory& traj);
void write_linear_csv(std::ostream& out, const RunMetadata& meta, const LinearTrajectory& traj);
void write_ensemble_csv(std::ostream& out, const RunMetadata& meta, const EnsembleStats& stats);
void write_state_path_csv(std::ostream& out, const RunMetadata& meta,
                          const std::vector<double>& times,
                          const std::vector<QuantumState>& states);
void write_histogram_csv(std::ostream& out, const RunMetadata& meta, const BlochHistogram& hist);
void write_ergodic_report(std::ostream& out, const RunMetadata& meta, const ErgodicReport& report,
                          const std::vector<std::string>& observable_names);

}  // namespace qtraj
