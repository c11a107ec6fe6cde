// qtraj command-line tool.
// Exit codes: 0 success, 1 validation or usage error, 2 numerical failure.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qtraj/analysis.hpp"
#include "qtraj/atom.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/error.hpp"
#include "qtraj/io.hpp"
#include "qtraj/master.hpp"
#include "qtraj/model.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/sde.hpp"

namespace fs = std::filesystem;
using namespace qtraj;

namespace {

struct Options {
  std::string model;
  double t_final = 1.0;
  double dt = 1e-3;
  std::size_t trajectories = 1;
  std::optional<std::uint64_t> seed;
  std::string mode = "posterior";
  std::string scheme = "kraus";
  std::string initial = "mixed";
  std::size_t stride = 1;
  double burn_in = 0.0;
  std::size_t bins_polar = 12;
  std::size_t bins_azimuth = 24;
  std::string output;
  std::size_t samples = 100;
  std::size_t depth = 2;
  // atom
  std::string detection = "heterodyne";
  double delta_omega = 0.0;
  double rabi = 1.0;
  double linewidth = 1.0;
  double phi = 0.0;
};

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw Error(ErrorCode::InvalidArgument, "--seed is required for stochastic commands");
  return *o.seed;
}

// "mixed" -> I/n; "e<k>" or "<k>" -> k-th basis vector.
ComplexMatrix initial_state(const std::string& spec, std::size_t dim) {
  if (spec == "mixed") return QuantumState::maximally_mixed(dim).matrix();
  std::string digits = spec;
  if (!digits.empty() && digits.front() == 'e') digits.erase(0, 1);
  std::size_t index = 0;
  std::size_t used = 0;
  try {
    index = std::stoul(digits, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != digits.size() || index >= dim) {
    throw Error(ErrorCode::InvalidArgument,
                "--initial must be 'mixed' or a basis index below " + std::to_string(dim));
  }
  return QuantumState::basis(dim, index).matrix();
}

struct LoadedModel {
  ModelDescription desc;
  MeasurementModel model;
  std::string hash;
};

LoadedModel load(const Options& o) {
  if (o.model.empty()) throw Error(ErrorCode::InvalidArgument, "--model is required");
  ModelDescription desc = load_model_description(o.model);
  MeasurementModel model = build_model(desc);
  for (const auto& w : model.warnings()) std::cerr << "warning: " << w << '\n';
  std::string hash = model_hash(desc);
  return {std::move(desc), std::move(model), std::move(hash)};
}

fs::path output_dir(const Options& o) {
  fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  return out;
}

void run_simulate(const Options& o) {
  const auto lm = load(o);
  const std::uint64_t seed = require_seed(o);
  const Mode mode = parse_mode(o.mode);
  const TimeGrid grid(o.t_final, o.dt);
  const QuantumState rho0(initial_state(o.initial, lm.model.dim()));
  if (o.trajectories == 0) throw Error(ErrorCode::InvalidArgument, "--trajectories must be >= 1");

  SimOptions sim;
  sim.scheme = parse_scheme(o.scheme);
  sim.record_stride = o.stride;
  RunMetadata meta{"simulate", lm.hash, seed, std::string(to_string(sim.scheme)), o.dt,
                   "mode=" + std::string(to_string(mode))};
  const fs::path dir = output_dir(o);

  {
    auto out = open_output(dir / "trajectory.csv");
    switch (mode) {
      case Mode::Linear:
        write_linear_csv(out, meta, simulate_linear(lm.model, rho0, grid, seed, sim));
        break;
      case Mode::Posterior:
        write_posterior_csv(out, meta, simulate_posterior(lm.model, rho0, grid, seed, sim));
        break;
      case Mode::Stratonovich: {
        const auto top = spectral_decomposition(rho0.matrix()).front();
        if (top.value < 1.0 - 1e-9) {
          throw Error(ErrorCode::InvalidArgument, "stratonovich mode needs a pure --initial state");
        }
        write_posterior_csv(out, meta,
                            simulate_stratonovich_pure(
                                lm.model, PureStateVector::normalized(top.vector), grid, seed, sim));
        break;
      }
    }
  }

  EnsembleOptions ens;
  ens.sim = sim;
  const auto stats = run_ensemble(lm.model, rho0, grid, o.trajectories, seed, mode, ens);
  auto out = open_output(dir / "ensemble.csv");
  write_ensemble_csv(out, meta, stats);
  std::cout << "simulate: " << stats.n_completed << " trajectories (" << stats.n_failed
            << " failed) written to " << dir.string() << '\n';
}

void run_master(const Options& o) {
  const auto lm = load(o);
  const QuantumState rho0(initial_state(o.initial, lm.model.dim()));
  const TimeGrid grid(o.t_final, o.dt);
  std::vector<double> times;
  for (std::size_t i = 0; i <= grid.n_steps(); i += std::max<std::size_t>(1, o.stride)) {
    times.push_back(std::min(grid.time(i), o.t_final));
  }
  if (times.back() < o.t_final) times.push_back(o.t_final);
  const auto path = evolve_master(lm.model, rho0, times);
  auto out = open_output(output_dir(o) / "master.csv");
  write_state_path_csv(out, RunMetadata{"master", lm.hash, std::nullopt, "expm", o.dt, ""}, times,
                       path);
  std::cout << "master: " << times.size() << " states written\n";
}

void run_equilibrium(const Options& o) {
  const auto lm = load(o);
  const QuantumState eta = equilibrium(lm.model);
  const RunMetadata meta{"equilibrium", lm.hash, std::nullopt, "nullspace", std::nullopt, ""};
  if (!o.output.empty()) {
    auto out = open_output(output_dir(o) / "equilibrium.csv");
    write_state_path_csv(out, meta, {0.0}, {eta});
  }
  const auto n = static_cast<Eigen::Index>(eta.dim());
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      std::cout << "eta_eq_" << r << c << '=' << format_double(eta.matrix()(r, c).real()) << ','
                << format_double(eta.matrix()(r, c).imag()) << '\n';
    }
  }
}

void run_check(const Options& o) {
  const auto lm = load(o);
  const auto& m = lm.model;
  const std::uint64_t seed = o.seed.value_or(0);
  std::ostringstream report;
  report << metadata_line({"check", lm.hash, seed, "none", std::nullopt, ""}) << '\n';

  const auto pure = check_pure_preserving(m, o.samples, seed);
  report << "pure_preserving=" << (pure.verdict ? "true" : "false") << '\n'
         << "dissipative_present=" << (pure.dissipative_present ? "true" : "false") << '\n'
         << "pure_preserving.states_tested=" << pure.states_tested << '\n'
         << "pure_preserving.witnesses=" << pure.witnesses.size() << '\n';

  if (m.dim() == 2) {
    const auto obs = check_purification_obstruction_dim2(m);
    report << "obstruction=" << (obs.obstruction_exists ? "true" : "false") << '\n'
           << "obstruction.set_a_clause_verified="
           << (obs.set_a_clause_verified ? "true" : "false") << '\n';
  } else {
    report << "obstruction=unchecked\n";
  }

  if (!m.diffusive_ops().empty()) {
    RandomStream rng(seed, 1);
    std::size_t elliptic = 0;
    double min_sv = INFINITY;
    for (std::size_t i = 0; i < o.samples; ++i) {
      const auto r = check_ellipticity(m, haar_pure_state(m.dim(), rng));
      elliptic += r.elliptic ? 1 : 0;
      if (r.singular_values.size() > 0) min_sv = std::min(min_sv, r.singular_values.minCoeff());
    }
    report << "ellipticity.random_states=" << o.samples << '\n'
           << "ellipticity.elliptic=" << elliptic << '\n'
           << "ellipticity.min_singular_value=" << format_double(min_sv) << '\n';
    for (std::size_t k = 0; k < m.dim(); ++k) {
      const auto psi = PureStateVector::basis(m.dim(), k);
      const auto e = check_ellipticity(m, psi);
      const auto l = lie_rank_check(m, psi, o.depth);
      report << "ellipticity.e" << k << '=' << (e.elliptic ? "true" : "false") << '\n'
             << "lie_rank.e" << k << '=' << l.rank << '\n'
             << "lie_rank_full.e" << k << '=' << (l.full ? "true" : "false") << '\n';
    }
  } else {
    report << "ellipticity=no_diffusive_channels\n";
  }

  std::cout << report.str();
  if (!o.output.empty()) {
    auto out = open_output(output_dir(o) / "check.txt");
    out << report.str();
  }
}

void run_invariant(const Options& o) {
  const auto lm = load(o);
  const std::uint64_t seed = require_seed(o);
  const QuantumState rho0(initial_state(o.initial, lm.model.dim()));
  const TimeGrid grid(o.t_final, o.dt);
  SimOptions sim;
  sim.scheme = parse_scheme(o.scheme);
  sim.record_stride = o.stride;
  sim.store_output = false;
  const auto traj = simulate_posterior(lm.model, rho0, grid, seed, sim);
  const QuantumState eta = equilibrium(lm.model);

  std::vector<ComplexMatrix> observables;
  std::vector<std::string> names;
  if (lm.model.dim() == 2) {
    observables = {pauli::x(), pauli::y(), pauli::z()};
    names = {"sigma_x", "sigma_y", "sigma_z"};
  } else {
    observables = gell_mann_basis(lm.model.dim());
    for (std::size_t i = 0; i < observables.size(); ++i) names.push_back("g" + std::to_string(i));
  }
  const auto report = ergodic_report(traj, eta, o.burn_in, observables);
  const RunMetadata meta{"invariant", lm.hash, seed, std::string(to_string(sim.scheme)), o.dt,
                         "burn_in=" + format_double(o.burn_in)};
  const fs::path dir = output_dir(o);
  {
    auto out = open_output(dir / "ergodic.txt");
    write_ergodic_report(out, meta, report, names);
  }
  if (lm.model.dim() == 2) {
    const auto hist = empirical_invariant_measure(traj, o.bins_polar, o.bins_azimuth, o.burn_in);
    auto out = open_output(dir / "histogram.csv");
    write_histogram_csv(out, meta, hist);
    std::cout << "invariant: " << hist.occupied_bins() << " of " << hist.counts.size()
              << " bins occupied\n";
  } else {
    std::cerr << "warning: Bloch histogram skipped (dimension " << lm.model.dim() << ")\n";
  }
  std::cout << "invariant: distance to equilibrium " << format_double(report.distance) << '\n';
}

void run_atom(const Options& o) {
  TwoLevelAtomSpec spec;
  spec.detection = parse_detection(o.detection);
  spec.delta_omega = o.delta_omega;
  spec.phi = o.phi;
  spec.lambda_inner = resonant_coupling(o.rabi);
  if (!(o.linewidth > 0.0)) throw Error(ErrorCode::ZeroLinewidth, "--linewidth must be positive");
  const double a = std::sqrt(o.linewidth);
  if (spec.detection == Detection::Heterodyne) {
    // two quadratures, components not proportional to a common complex number
    spec.alpha = {Complex(a / std::sqrt(2.0), 0.0), Complex(0.0, a / std::sqrt(2.0))};
  } else {
    spec.alpha = {Complex(a, 0.0)};
  }
  const auto model = generate_atom_model(spec);
  const std::string text = model_to_json(model.description());
  if (o.output.empty()) {
    std::cout << text;
  } else {
    const fs::path path(o.output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    auto out = open_output(path);
    out << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtraj: quantum trajectories of continually measured systems"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);
  Options o;

  auto add_model = [&](CLI::App* sub) { sub->add_option("--model", o.model, "Model JSON file"); };
  auto add_time = [&](CLI::App* sub) {
    sub->add_option("--t-final", o.t_final, "Final time")->check(CLI::PositiveNumber);
    sub->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", o.seed, "RNG seed"); };
  auto add_output = [&](CLI::App* sub, const char* help) {
    sub->add_option("--output", o.output, help);
  };
  auto add_scheme = [&](CLI::App* sub) {
    sub->add_option("--scheme", o.scheme, "kraus | euler")
        ->check(CLI::IsMember({"kraus", "euler"}));
    sub->add_option("--stride", o.stride, "Store every k-th step")->check(CLI::PositiveNumber);
  };
  auto add_initial = [&](CLI::App* sub) {
    sub->add_option("--initial", o.initial, "'mixed' or a basis index (e0, e1, ...)");
  };

  auto* simulate = app.add_subcommand("simulate", "Trajectory and ensemble simulation");
  add_model(simulate);
  add_time(simulate);
  add_seed(simulate);
  add_scheme(simulate);
  add_initial(simulate);
  simulate->add_option("--trajectories", o.trajectories, "Ensemble size")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--mode", o.mode, "linear | posterior | stratonovich")
      ->check(CLI::IsMember({"linear", "posterior", "stratonovich"}));
  add_output(simulate, "Output directory");

  auto* master = app.add_subcommand("master", "A priori state path");
  add_model(master);
  add_time(master);
  add_initial(master);
  master->add_option("--stride", o.stride, "Store every k-th step")->check(CLI::PositiveNumber);
  add_output(master, "Output directory");

  auto* equil = app.add_subcommand("equilibrium", "Stationary state of the master equation");
  add_model(equil);
  add_output(equil, "Output directory");

  auto* check = app.add_subcommand("check", "Structural checks of a model");
  add_model(check);
  add_seed(check);
  check->add_option("--samples", o.samples, "Random pure states for the sampled checks");
  check->add_option("--depth", o.depth, "Bracket depth of the Lie-rank test");
  add_output(check, "Output directory (report is always printed)");

  auto* invariant = app.add_subcommand("invariant", "Long-run histogram and ergodic report");
  add_model(invariant);
  add_time(invariant);
  add_seed(invariant);
  add_scheme(invariant);
  add_initial(invariant);
  invariant->add_option("--burn-in", o.burn_in, "Discarded initial time")
      ->check(CLI::NonNegativeNumber);
  invariant->add_option("--bins-polar", o.bins_polar, "Polar bins")->check(CLI::PositiveNumber);
  invariant->add_option("--bins-azimuth", o.bins_azimuth, "Azimuthal bins")
      ->check(CLI::PositiveNumber);
  add_output(invariant, "Output directory");

  auto* atom = app.add_subcommand("atom", "Write a two-level atom model file");
  atom->add_option("--detection", o.detection, "homodyne | heterodyne | direct")
      ->check(CLI::IsMember({"homodyne", "heterodyne", "direct"}));
  atom->add_option("--delta-omega", o.delta_omega, "Detuning");
  atom->add_option("--rabi", o.rabi, "Rabi frequency");
  atom->add_option("--linewidth", o.linewidth, "Line width ||alpha||^2");
  atom->add_option("--phi", o.phi, "Local-oscillator phase (homodyne)");
  add_output(atom, "Model file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) run_simulate(o);
    if (*master) run_master(o);
    if (*equil) run_equilibrium(o);
    if (*check) run_check(o);
    if (*invariant) run_invariant(o);
    if (*atom) run_atom(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
