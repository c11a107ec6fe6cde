#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qtraj/analysis.hpp"
#include "qtraj/atom.hpp"
#include "qtraj/ensemble.hpp"
#include "qtraj/error.hpp"
#include "qtraj/io.hpp"
#include "qtraj/master.hpp"

namespace py = pybind11;
using namespace qtraj;

namespace {

using ComplexArray = py::array_t<Complex>;

ComplexArray stack(const std::vector<ComplexMatrix>& mats, std::size_t dim) {
  const auto n = static_cast<py::ssize_t>(dim);
  ComplexArray out({static_cast<py::ssize_t>(mats.size()), n, n});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t i = 0; i < static_cast<py::ssize_t>(mats.size()); ++i) {
    for (py::ssize_t r = 0; r < n; ++r) {
      for (py::ssize_t c = 0; c < n; ++c) v(i, r, c) = mats[static_cast<std::size_t>(i)](r, c);
    }
  }
  return out;
}

ComplexArray stack(const std::vector<QuantumState>& states, std::size_t dim) {
  std::vector<ComplexMatrix> mats;
  mats.reserve(states.size());
  for (const auto& s : states) mats.push_back(s.matrix());
  return stack(mats, dim);
}

SimOptions sim_options(const std::string& scheme, std::size_t stride) {
  SimOptions o;
  o.scheme = parse_scheme(scheme);
  o.record_stride = stride;
  o.store_output = false;
  return o;
}

py::dict posterior_dict(const PosteriorTrajectory& t, std::size_t dim) {
  py::dict d;
  d["times"] = t.times;
  d["states"] = stack(t.state_path, dim);
  d["linear_entropy"] = t.entropy_path;
  return d;
}

PosteriorTrajectory as_trajectory(const std::vector<double>& times,
                                  const std::vector<ComplexMatrix>& states) {
  if (times.size() != states.size() || times.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "times and states must have equal length >= 2");
  }
  PosteriorTrajectory t;
  t.grid = TimeGrid(times.back() - times.front(), times[1] - times[0]);
  t.times = times;
  for (const auto& s : states) {
    t.state_path.push_back(project_to_state(s));
    t.entropy_path.push_back(linear_entropy(t.state_path.back()));
  }
  return t;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantum trajectories of continually measured finite-dimensional systems.";
  m.attr("__version__") = std::string(library_version());

  static py::exception<Error> error(m, "QtrajError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      exc.attr("code") = std::string(to_string(e.code()));
      exc.attr("numerical") = is_numerical(e.code());
      PyErr_SetObject(error.ptr(), exc.ptr());
    }
  });

  py::class_<MeasurementModel>(m, "Model")
      .def_property_readonly("dim", &MeasurementModel::dim)
      .def_property_readonly("hamiltonian", &MeasurementModel::hamiltonian)
      .def_property_readonly("diffusive_ops", &MeasurementModel::diffusive_ops)
      .def_property_readonly("dissipative_ops", &MeasurementModel::dissipative_ops)
      .def_property_readonly("jump_labels",
                             [](const MeasurementModel& self) {
                               std::vector<std::string> out;
                               for (const auto& c : self.jump_channels()) out.push_back(c.label);
                               return out;
                             })
      .def_property_readonly("warnings", &MeasurementModel::warnings)
      .def("to_json", [](const MeasurementModel& self) { return model_to_json(self.description()); })
      .def("hash", [](const MeasurementModel& self) { return model_hash(self.description()); });

  m.def("model_from_json", [](const std::string& text) { return build_model(parse_model_json(text)); },
        py::arg("text"));
  m.def("load_model", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"));
  m.def(
      "atom_model",
      [](const std::string& detection, double rabi, double linewidth, double delta_omega, double phi) {
        TwoLevelAtomSpec spec;
        spec.detection = parse_detection(detection);
        const double a = std::sqrt(linewidth);
        if (spec.detection == Detection::Heterodyne) {
          spec.alpha = {Complex(a / std::sqrt(2.0), 0.0), Complex(0.0, a / std::sqrt(2.0))};
        } else {
          spec.alpha = {Complex(a, 0.0)};
        }
        spec.lambda_inner = resonant_coupling(rabi);
        spec.delta_omega = delta_omega;
        spec.phi = phi;
        return generate_atom_model(spec);
      },
      py::arg("detection") = "heterodyne", py::arg("rabi") = 1.0, py::arg("linewidth") = 1.0,
      py::arg("delta_omega") = 0.0, py::arg("phi") = 0.0);

  m.def("trace_norm", &trace_norm, py::arg("a"));
  m.def("apply_liouvillian", &apply_liouvillian, py::arg("model"), py::arg("rho"));
  m.def("linear_entropy", [](const ComplexMatrix& rho) { return linear_entropy(QuantumState(rho)); },
        py::arg("rho"));
  m.def("von_neumann_entropy",
        [](const ComplexMatrix& rho) { return von_neumann_entropy(QuantumState(rho)); }, py::arg("rho"));
  m.def("bloch_vector", &bloch_vector, py::arg("rho"));

  m.def(
      "evolve_master",
      [](const MeasurementModel& model, const ComplexMatrix& rho0, const std::vector<double>& times) {
        return stack(evolve_master(model, QuantumState(rho0), times), model.dim());
      },
      py::arg("model"), py::arg("rho0"), py::arg("times"));
  m.def("equilibrium", [](const MeasurementModel& model) { return equilibrium(model).matrix(); },
        py::arg("model"));

  m.def(
      "simulate_posterior",
      [](const MeasurementModel& model, const ComplexMatrix& rho0, double t_final, double dt,
         std::uint64_t seed, const std::string& scheme, std::size_t stride) {
        PosteriorTrajectory t;
        {
          py::gil_scoped_release release;
          t = simulate_posterior(model, QuantumState(rho0), TimeGrid(t_final, dt), seed,
                                 sim_options(scheme, stride));
        }
        return posterior_dict(t, model.dim());
      },
      py::arg("model"), py::arg("rho0"), py::arg("t_final"), py::arg("dt"), py::arg("seed"),
      py::arg("scheme") = "kraus", py::arg("stride") = 1);

  m.def(
      "simulate_linear",
      [](const MeasurementModel& model, const ComplexMatrix& rho0, double t_final, double dt,
         std::uint64_t seed, const std::string& scheme, std::size_t stride) {
        LinearTrajectory t;
        {
          py::gil_scoped_release release;
          t = simulate_linear(model, QuantumState(rho0), TimeGrid(t_final, dt), seed,
                              sim_options(scheme, stride));
        }
        py::dict d;
        d["times"] = t.times;
        d["sigma"] = stack(t.sigma_path, model.dim());
        d["weight"] = t.weight_path;
        return d;
      },
      py::arg("model"), py::arg("rho0"), py::arg("t_final"), py::arg("dt"), py::arg("seed"),
      py::arg("scheme") = "kraus", py::arg("stride") = 1);

  m.def(
      "run_ensemble",
      [](const MeasurementModel& model, const ComplexMatrix& rho0, double t_final, double dt,
         std::size_t n_traj, std::uint64_t seed, const std::string& mode, const std::string& scheme,
         std::size_t stride, std::size_t threads) {
        EnsembleOptions o;
        o.sim = sim_options(scheme, stride);
        o.threads = threads;
        EnsembleStats s;
        {
          py::gil_scoped_release release;
          s = run_ensemble(model, QuantumState(rho0), TimeGrid(t_final, dt), n_traj, seed,
                           parse_mode(mode), o);
        }
        py::dict d;
        d["times"] = s.times;
        d["mean_state"] = stack(s.mean_state, model.dim());
        d["mean_weight"] = s.mean_weight;
        d["weight_se"] = s.weight_se;
        d["mean_entropy"] = s.mean_entropy;
        d["entropy_se"] = s.entropy_se;
        d["mean_jump_counts"] = s.mean_jump_counts;
        d["n_completed"] = s.n_completed;
        d["n_failed"] = s.n_failed;
        return d;
      },
      py::arg("model"), py::arg("rho0"), py::arg("t_final"), py::arg("dt"), py::arg("n_traj"),
      py::arg("seed"), py::arg("mode") = "posterior", py::arg("scheme") = "kraus",
      py::arg("stride") = 1, py::arg("threads") = 0);

  m.def(
      "check_ellipticity",
      [](const MeasurementModel& model, const ComplexVector& psi) {
        return check_ellipticity(model, PureStateVector::normalized(psi)).elliptic;
      },
      py::arg("model"), py::arg("psi"));
  m.def(
      "lie_rank",
      [](const MeasurementModel& model, const ComplexVector& psi, std::size_t depth) {
        const auto r = lie_rank_check(model, PureStateVector::normalized(psi), depth);
        return py::make_tuple(r.rank, r.full);
      },
      py::arg("model"), py::arg("psi"), py::arg("depth") = 2);
  m.def(
      "ergodic_distance",
      [](const std::vector<double>& times, const std::vector<ComplexMatrix>& states,
         const ComplexMatrix& eta, double burn_in) {
        return hs_norm(time_average_state(as_trajectory(times, states), burn_in).matrix() - eta);
      },
      py::arg("times"), py::arg("states"), py::arg("eta"), py::arg("burn_in"));
  m.def(
      "bloch_histogram",
      [](const std::vector<double>& times, const std::vector<ComplexMatrix>& states,
         std::size_t n_polar, std::size_t n_azimuth, double burn_in) {
        const auto h = empirical_invariant_measure(as_trajectory(times, states), n_polar, n_azimuth,
                                                   burn_in);
        py::array_t<double> dwell({static_cast<py::ssize_t>(n_polar), static_cast<py::ssize_t>(n_azimuth)});
        py::array_t<std::uint64_t> counts({static_cast<py::ssize_t>(n_polar), static_cast<py::ssize_t>(n_azimuth)});
        auto dv = dwell.mutable_unchecked<2>();
        auto cv = counts.mutable_unchecked<2>();
        for (std::size_t a = 0; a < n_polar; ++a) {
          for (std::size_t b = 0; b < n_azimuth; ++b) {
            dv(a, b) = h.dwell_time[h.index(a, b)];
            cv(a, b) = h.counts[h.index(a, b)];
          }
        }
        return py::make_tuple(dwell, counts);
      },
      py::arg("times"), py::arg("states"), py::arg("n_polar") = 12, py::arg("n_azimuth") = 24,
      py::arg("burn_in") = 0.0);
}
