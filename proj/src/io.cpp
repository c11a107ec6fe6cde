#include "qtraj/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qtraj/error.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

Complex parse_complex(const json& z, const std::string& where) {
  if (z.is_number()) return {z.get<double>(), 0.0};
  if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
    return {z[0].get<double>(), z[1].get<double>()};
  }
  config_error(where + ": expected [re, im] or a number");
}

ComplexMatrix parse_matrix(const json& rows, std::size_t dim, const std::string& where) {
  if (!rows.is_array() || rows.size() != dim) {
    throw Error(ErrorCode::DimensionMismatch, where + ": expected " + std::to_string(dim) + " rows");
  }
  const auto n = static_cast<Eigen::Index>(dim);
  ComplexMatrix out(n, n);
  for (std::size_t r = 0; r < dim; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || row.size() != dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  where + ": row " + std::to_string(r) + " must have " + std::to_string(dim) +
                      " entries");
    }
    for (std::size_t c = 0; c < dim; ++c) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_complex(row[c], where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return out;
}

std::vector<ComplexMatrix> parse_matrix_list(const json& doc, const char* key, std::size_t dim) {
  std::vector<ComplexMatrix> out;
  if (!doc.contains(key)) return out;
  const json& list = doc.at(key);
  if (!list.is_array()) config_error(std::string(key) + " must be an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    out.push_back(parse_matrix(list[i], dim, std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json matrix_json(const ComplexMatrix& a) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_matrix_header(std::ostream& out, const char* prefix, std::size_t n) {
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      out << ',' << prefix << r << c << "_re," << prefix << r << c << "_im";
    }
  }
}

void write_matrix_row(std::ostream& out, const ComplexMatrix& a) {
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      out << ',' << format_double(a(r, c).real()) << ',' << format_double(a(r, c).imag());
    }
  }
}

}  // namespace

std::string_view library_version() noexcept { return QTRAJ_VERSION; }

ModelDescription parse_model_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("model must be a JSON object");
  if (!doc.contains("dimension") || !doc["dimension"].is_number_integer() ||
      doc["dimension"].get<long long>() < 1) {
    config_error("dimension must be a positive integer");
  }
  if (!doc.contains("hamiltonian")) config_error("missing hamiltonian");
  ModelDescription desc;
  desc.dim = doc["dimension"].get<std::size_t>();
  desc.hamiltonian = parse_matrix(doc["hamiltonian"], desc.dim, "hamiltonian");
  desc.diffusive_ops = parse_matrix_list(doc, "diffusive_ops", desc.dim);
  desc.dissipative_ops = parse_matrix_list(doc, "dissipative_ops", desc.dim);
  if (doc.contains("jump_channels")) {
    const json& channels = doc["jump_channels"];
    if (!channels.is_array()) config_error("jump_channels must be an array");
    for (std::size_t k = 0; k < channels.size(); ++k) {
      const json& ch = channels[k];
      const std::string where = "jump_channels[" + std::to_string(k) + "]";
      if (!ch.is_object()) config_error(where + " must be an object");
      JumpChannel channel;
      if (ch.contains("label")) {
        if (!ch["label"].is_string()) config_error(where + ".label must be a string");
        channel.label = ch["label"].get<std::string>();
      }
      if (ch.contains("weight")) {
        if (!ch["weight"].is_number()) config_error(where + ".weight must be a number");
        channel.weight = ch["weight"].get<double>();
      }
      if (!ch.contains("kraus")) config_error(where + ".kraus is required");
      channel.kraus = parse_matrix_list(ch, "kraus", desc.dim);
      desc.jump_channels.push_back(std::move(channel));
    }
  }
  return desc;
}

std::string model_to_json(const ModelDescription& desc) {
  // One matrix row per line; numbers use the shortest round-trip representation.
  auto matrix_text = [](const ComplexMatrix& a, const std::string& indent) {
    const json rows = matrix_json(a);
    std::string out = "[\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out += indent + "  " + rows[r].dump() + (r + 1 < rows.size() ? ",\n" : "\n");
    }
    return out + indent + "]";
  };
  auto list_text = [&](const std::vector<ComplexMatrix>& list, const std::string& indent) {
    if (list.empty()) return std::string("[]");
    std::string out = "[\n";
    for (std::size_t i = 0; i < list.size(); ++i) {
      out += indent + "  " + matrix_text(list[i], indent + "  ") +
             (i + 1 < list.size() ? ",\n" : "\n");
    }
    return out + indent + "]";
  };
  std::string out = "{\n";
  out += "  \"dimension\": " + std::to_string(desc.dim) + ",\n";
  out += "  \"hamiltonian\": " + matrix_text(desc.hamiltonian, "  ") + ",\n";
  out += "  \"diffusive_ops\": " + list_text(desc.diffusive_ops, "  ") + ",\n";
  out += "  \"jump_channels\": ";
  if (desc.jump_channels.empty()) {
    out += "[]";
  } else {
    out += "[\n";
    for (std::size_t k = 0; k < desc.jump_channels.size(); ++k) {
      const auto& ch = desc.jump_channels[k];
      out += "    {\n      \"label\": " + json(ch.label).dump() + ",\n";
      out += "      \"weight\": " + json(ch.weight).dump() + ",\n";
      out += "      \"kraus\": " + list_text(ch.kraus, "      ") + "\n    }";
      out += k + 1 < desc.jump_channels.size() ? ",\n" : "\n";
    }
    out += "  ]";
  }
  out += ",\n  \"dissipative_ops\": " + list_text(desc.dissipative_ops, "  ") + "\n}\n";
  return out;
}

ModelDescription load_model_description(const std::filesystem::path& path) {
  return parse_model_json(read_file(path));
}

MeasurementModel load_model(const std::filesystem::path& path) {
  return build_model(load_model_description(path));
}

void save_model(const std::filesystem::path& path, const ModelDescription& desc) {
  std::ofstream out(path);
  if (!out) config_error("cannot write " + path.string());
  out << model_to_json(desc);
}

std::string model_hash(const ModelDescription& desc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_json(desc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string metadata_line(const RunMetadata& meta) {
  std::ostringstream out;
  out << "# qtraj version=" << library_version() << " command=" << meta.command
      << " model_hash=" << (meta.model_hash.empty() ? "none" : meta.model_hash)
      << " seed=" << (meta.seed ? std::to_string(*meta.seed) : "none")
      << " scheme=" << meta.scheme << " dt=" << (meta.dt ? format_double(*meta.dt) : "none")
      << " rng=" << Philox4x32::kName;
  if (!meta.extra.empty()) out << ' ' << meta.extra;
  return out.str();
}

void write_posterior_csv(std::ostream& out, const RunMetadata& meta,
                         const PosteriorTrajectory& traj) {
  out << metadata_line(meta) << '\n' << "time";
  const std::size_t n = traj.state_path.empty() ? 0 : traj.state_path.front().dim();
  write_matrix_header(out, "rho", n);
  out << ",linear_entropy\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_double(traj.times[i]);
    write_matrix_row(out, traj.state_path[i].matrix());
    out << ',' << format_double(traj.entropy_path[i]) << '\n';
  }
}

void write_linear_csv(std::ostream& out, const RunMetadata& meta, const LinearTrajectory& traj) {
  out << metadata_line(meta) << '\n' << "time";
  const auto n = traj.sigma_path.empty() ? 0 : static_cast<std::size_t>(traj.sigma_path[0].rows());
  write_matrix_header(out, "sigma", n);
  out << ",weight\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_double(traj.times[i]);
    write_matrix_row(out, traj.sigma_path[i]);
    out << ',' << format_double(traj.weight_path[i]) << '\n';
  }
}

void write_ensemble_csv(std::ostream& out, const RunMetadata& meta, const EnsembleStats& stats) {
  out << metadata_line(meta) << " mode=" << to_string(stats.mode)
      << " trajectories=" << stats.n_completed << " failed=" << stats.n_failed << '\n';
  const auto n = stats.mean_state.empty() ? 0 : static_cast<std::size_t>(stats.mean_state[0].rows());
  const std::size_t n_jump = stats.mean_jump_counts.empty() ? 0 : stats.mean_jump_counts[0].size();
  const std::size_t n_diff = stats.mean_outputs.empty() ? 0 : stats.mean_outputs[0].size();
  out << "time";
  write_matrix_header(out, "mean", n);
  write_matrix_header(out, "se", n);
  out << ",mean_weight,weight_se,mean_linear_entropy,linear_entropy_se";
  for (std::size_t k = 0; k < n_jump; ++k) out << ",jumps" << k << ",jumps" << k << "_se";
  for (std::size_t j = 0; j < n_diff; ++j) out << ",output" << j;
  out << '\n';
  for (std::size_t i = 0; i < stats.times.size(); ++i) {
    out << format_double(stats.times[i]);
    write_matrix_row(out, stats.mean_state[i]);
    ComplexMatrix se = stats.state_se_real[i].cast<Complex>();
    se.imag() = stats.state_se_imag[i];
    write_matrix_row(out, se);
    out << ',' << format_double(stats.mean_weight[i]) << ',' << format_double(stats.weight_se[i])
        << ',' << format_double(stats.mean_entropy[i]) << ',' << format_double(stats.entropy_se[i]);
    for (std::size_t k = 0; k < n_jump; ++k) {
      out << ',' << format_double(stats.mean_jump_counts[i][k]) << ','
          << format_double(stats.jump_counts_se[i][k]);
    }
    for (std::size_t j = 0; j < n_diff; ++j) out << ',' << format_double(stats.mean_outputs[i][j]);
    out << '\n';
  }
}

void write_state_path_csv(std::ostream& out, const RunMetadata& meta,
                          const std::vector<double>& times,
                          const std::vector<QuantumState>& states) {
  out << metadata_line(meta) << '\n' << "time";
  write_matrix_header(out, "eta", states.empty() ? 0 : states.front().dim());
  out << '\n';
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << format_double(times[i]);
    write_matrix_row(out, states[i].matrix());
    out << '\n';
  }
}

void write_histogram_csv(std::ostream& out, const RunMetadata& meta, const BlochHistogram& hist) {
  out << metadata_line(meta) << " total=" << hist.total << " flagged=" << hist.flagged << '\n';
  out << "theta_index,phi_index,dwell_time,count\n";
  for (std::size_t t = 0; t < hist.n_polar; ++t) {
    for (std::size_t p = 0; p < hist.n_azimuth; ++p) {
      const std::size_t k = hist.index(t, p);
      out << t << ',' << p << ',' << format_double(hist.dwell_time[k]) << ',' << hist.counts[k]
          << '\n';
    }
  }
}

void write_ergodic_report(std::ostream& out, const RunMetadata& meta, const ErgodicReport& report,
                          const std::vector<std::string>& observable_names) {
  out << metadata_line(meta) << '\n';
  const auto n = static_cast<Eigen::Index>(report.eta_eq.dim());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const std::string idx = std::to_string(r) + std::to_string(c);
      const Complex a = report.time_avg_state.matrix()(r, c);
      const Complex e = report.eta_eq.matrix()(r, c);
      out << "time_avg_state_" << idx << "_re=" << format_double(a.real()) << '\n'
          << "time_avg_state_" << idx << "_im=" << format_double(a.imag()) << '\n'
          << "eta_eq_" << idx << "_re=" << format_double(e.real()) << '\n'
          << "eta_eq_" << idx << "_im=" << format_double(e.imag()) << '\n';
    }
  }
  out << "distance=" << format_double(report.distance) << '\n';
  for (std::size_t i = 0; i < report.variance.size(); ++i) {
    const std::string name = i < observable_names.size() ? observable_names[i] : "a" + std::to_string(i);
    const auto& v = report.variance[i];
    out << name << ".lhs=" << format_double(v.lhs) << '\n'
        << name << ".term1=" << format_double(v.term1) << '\n'
        << name << ".term2=" << format_double(v.term2) << '\n'
        << name << ".residual=" << format_double(v.residual) << '\n';
  }
}

}  // namespace qtraj
