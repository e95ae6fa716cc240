#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spdekit/domain.hpp"
#include "spdekit/drift.hpp"
#include "spdekit/error.hpp"
#include "spdekit/estimator.hpp"
#include "spdekit/experiments.hpp"
#include "spdekit/io.hpp"
#include "spdekit/noise.hpp"
#include "spdekit/simulator.hpp"
#include "spdekit/trajectory.hpp"
#include "spdekit/uncertainty.hpp"

namespace py = pybind11;
using namespace spdekit;

namespace {

SimulationConfig make_config(const std::vector<double>& lengths, int n_modes, double T, double dt,
                             std::uint64_t seed, int observe, int stride, bool include_zero_mode) {
  SimulationConfig c;
  c.domain = Domain(lengths);
  c.n_modes = n_modes;
  c.T = T;
  c.dt = dt;
  c.seed = seed;
  c.observe = observe;
  c.stride = stride;
  c.include_zero_mode = include_zero_mode;
  return c;
}

py::dict result_dict(const EstimationResult& r) {
  py::dict d;
  d["names"] = r.names;
  d["theta_hat"] = r.theta_hat;
  d["gram"] = r.gram;
  d["rhs"] = r.rhs;
  d["condition_number"] = r.condition_number;
  d["ill_conditioned"] = r.ill_conditioned;
  py::list ci, se;
  for (std::size_t i = 0; i < r.confidence.size(); ++i) {
    ci.append(r.confidence[i] ? py::cast(std::make_pair(r.confidence[i]->low, r.confidence[i]->high))
                              : py::none());
    se.append(r.standard_error[i] ? py::cast(*r.standard_error[i]) : py::none());
  }
  d["ci"] = ci;
  d["standard_error"] = se;
  d["N"] = r.N_used;
  d["T"] = r.T_used;
  d["dt"] = r.dt;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral simulation and parameter estimation for stochastic reaction-diffusion equations";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", error.ptr());

  py::class_<SpectralBasis>(m, "Basis")
      .def_property_readonly("size", &SpectralBasis::size)
      .def_property_readonly("eigenvalues", &SpectralBasis::eigenvalues)
      .def_property_readonly("has_zero_mode", &SpectralBasis::has_zero_mode)
      .def_property_readonly("lengths", [](const SpectralBasis& b) { return b.domain().lengths(); })
      .def("wavevector", [](const SpectralBasis& b, int k) { return b.mode(k).wavevector; })
      .def("is_sine", [](const SpectralBasis& b, int k) { return b.mode(k).sine; })
      .def("__len__", &SpectralBasis::size);

  m.def("build_basis",
        [](const std::vector<double>& lengths, int n, bool zero) { return build_basis(Domain(lengths), n, zero); },
        py::arg("lengths"), py::arg("n_modes"), py::arg("include_zero_mode") = true);
  m.def("weyl_constant", [](const std::vector<double>& lengths) { return weyl_constant(Domain(lengths)); },
        py::arg("lengths"));

  py::class_<ModeTrajectory>(m, "Trajectory")
      .def(py::init([](const SpectralBasis& basis, std::vector<double> times, RowMatrix coeffs) {
             ModeTrajectory t{basis, std::move(times), std::move(coeffs)};
             t.validate();
             return t;
           }),
           py::arg("basis"), py::arg("times"), py::arg("coeffs"))
      .def_readonly("basis", &ModeTrajectory::basis)
      .def_readonly("times", &ModeTrajectory::times)
      .def_readonly("coeffs", &ModeTrajectory::coeffs)
      .def_property_readonly("mode_count", &ModeTrajectory::mode_count)
      .def_property_readonly("step_count", &ModeTrajectory::step_count)
      .def("truncated", &ModeTrajectory::truncated, py::arg("n"));

  py::class_<DriftTerm>(m, "Term")
      .def_static("diffusion", &DriftTerm::diffusion, py::arg("intensity") = 0.0, py::arg("known") = false)
      .def_static("poly", &DriftTerm::poly, py::arg("power"), py::arg("intensity") = 0.0,
                  py::arg("known") = false)
      .def_static("fhn_f1", &DriftTerm::fhn_f1, py::arg("u0"), py::arg("intensity") = 0.0,
                  py::arg("known") = false)
      .def_static("fhn_f2", &DriftTerm::fhn_f2, py::arg("u0"), py::arg("intensity") = 0.0,
                  py::arg("known") = false)
      .def_static("fractional", &DriftTerm::fractional, py::arg("alpha"), py::arg("intensity") = 0.0,
                  py::arg("known") = false)
      .def_readwrite("intensity", &DriftTerm::intensity)
      .def_readwrite("known", &DriftTerm::known)
      .def_property_readonly("name", &DriftTerm::name)
      .def("__repr__", [](const DriftTerm& t) { return "<Term " + t.name() + ">"; });

  py::class_<NoiseSpec>(m, "Noise")
      .def(py::init([](const std::string& kind, double sigma, double gamma, double mu) {
             NoiseSpec n{noise_kind_from_string(kind), sigma, gamma, mu};
             n.validate();
             return n;
           }),
           py::arg("kind") = "white", py::arg("sigma") = 1.0, py::arg("gamma") = 0.0, py::arg("mu") = 0.0)
      .def_property_readonly("kind", [](const NoiseSpec& n) { return to_string(n.kind); })
      .def_readonly("sigma", &NoiseSpec::sigma)
      .def_readonly("gamma", &NoiseSpec::gamma)
      .def_readonly("mu", &NoiseSpec::mu);

  m.def(
      "simulate",
      [](const std::vector<DriftTerm>& terms, const std::vector<double>& lengths, int n_modes, double T,
         double dt, std::uint64_t seed, const NoiseSpec& noise, int observe, int stride,
         bool include_zero_mode) {
        DriftDictionary dict;
        dict.terms = terms;
        const auto config = make_config(lengths, n_modes, T, dt, seed, observe, stride, include_zero_mode);
        py::gil_scoped_release release;
        return simulate(dict, noise, config);
      },
      py::arg("terms"), py::arg("lengths"), py::arg("n_modes"), py::arg("T"), py::arg("dt"),
      py::arg("seed") = 0, py::arg("noise") = NoiseSpec{}, py::arg("observe") = 0, py::arg("stride") = 1,
      py::arg("include_zero_mode") = true);

  m.def(
      "simulate_fhn",
      [](const std::vector<double>& lengths, int n_modes, double T, double dt, std::uint64_t seed,
         const NoiseSpec& noise, int observe, double a, double k1, double k2, double eps, double b,
         double u0, double diffusivity_u, double diffusivity_v) {
        FHNParams p;
        p.a = a;
        p.k1 = k1;
        p.k2 = k2;
        p.eps = eps;
        p.b = b;
        p.u0 = u0;
        p.diffusivity_u = diffusivity_u;
        p.diffusivity_v = diffusivity_v;
        const auto config = make_config(lengths, n_modes, T, dt, seed, observe, 1, true);
        py::gil_scoped_release release;
        return simulate(p, noise, config);
      },
      py::arg("lengths"), py::arg("n_modes"), py::arg("T"), py::arg("dt"), py::arg("seed") = 0,
      py::arg("noise") = NoiseSpec{}, py::arg("observe") = 0, py::arg("a") = 0.5, py::arg("k1") = 1.0,
      py::arg("k2") = 1.0, py::arg("eps") = 1.0, py::arg("b") = 1.0, py::arg("u0") = 1.0,
      py::arg("diffusivity_u") = 1.0, py::arg("diffusivity_v") = 1.0);

  m.def(
      "estimate",
      [](const ModeTrajectory& traj, const std::vector<DriftTerm>& terms, int N, double weight_exponent,
         double z) {
        EstimationProblem problem;
        problem.dictionary.terms = terms;
        problem.mode_count = N;
        problem.weight_exponent = weight_exponent;
        return result_dict(estimate(traj, problem, z));
      },
      py::arg("traj"), py::arg("terms"), py::arg("N") = 0, py::arg("weight_exponent") = 0.0,
      py::arg("z") = 1.96);

  m.def(
      "normal_equations",
      [](const ModeTrajectory& traj, const std::vector<DriftTerm>& terms, int N, double weight_exponent) {
        EstimationProblem problem;
        problem.dictionary.terms = terms;
        problem.mode_count = N;
        problem.weight_exponent = weight_exponent;
        const auto ne = assemble_normal_equations(traj, problem);
        return py::make_tuple(ne.gram, ne.rhs, ne.names);
      },
      py::arg("traj"), py::arg("terms"), py::arg("N") = 0, py::arg("weight_exponent") = 0.0);

  m.def("plain_diffusivity", &plain_diffusivity, py::arg("traj"), py::arg("weight_exponent") = 0.0);

  m.def(
      "identify_noise",
      [](const ModeTrajectory& traj) {
        const auto e = identify_noise_parameters(traj);
        return py::dict(py::arg("sigma") = e.sigma, py::arg("gamma") = e.gamma);
      },
      py::arg("traj"));

  m.def(
      "lasso_path",
      [](const Matrix& gram, const Vector& rhs, std::optional<std::vector<double>> lambdas,
         std::vector<bool> unpenalized) {
        LassoOptions opt;
        opt.unpenalized = std::move(unpenalized);
        const auto grid = lambdas ? *lambdas : default_lambda_grid(gram, rhs, opt);
        const auto path = lasso_path(gram, rhs, grid, opt);
        Matrix out(static_cast<Eigen::Index>(path.size()), gram.rows());
        for (std::size_t i = 0; i < path.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = path[i].transpose();
        return py::make_tuple(grid, out);
      },
      py::arg("gram"), py::arg("rhs"), py::arg("lambdas") = py::none(),
      py::arg("unpenalized") = std::vector<bool>{});

  m.def("clt_variance", &clt_variance, py::arg("theta0"), py::arg("d"), py::arg("T"), py::arg("weyl"));
  m.def(
      "confidence_interval",
      [](double theta, int d, double T, double weyl, int N, double z) {
        const auto ci = confidence_interval(theta, d, T, weyl, N, z);
        return std::make_pair(ci.low, ci.high);
      },
      py::arg("theta0_hat"), py::arg("d"), py::arg("T"), py::arg("weyl"), py::arg("N"), py::arg("z") = 1.96);

  m.def(
      "modes_to_grid",
      [](const ModeTrajectory& traj, const std::vector<int>& shape) { return modes_to_grid(traj, shape).frames; },
      py::arg("traj"), py::arg("grid_shape"));
  m.def(
      "project_frames",
      [](RowMatrix frames, const std::vector<double>& lengths, const std::vector<int>& shape, double dt,
         int n_modes, bool include_zero_mode) {
        GridFrameSeries f{Domain(lengths), shape, dt, std::move(frames)};
        f.validate();
        return project_frames_to_modes(f, build_basis(f.domain, n_modes, include_zero_mode));
      },
      py::arg("frames"), py::arg("lengths"), py::arg("grid_shape"), py::arg("dt"), py::arg("n_modes"),
      py::arg("include_zero_mode") = true);

  m.def("load_modes", [](const std::filesystem::path& dir) { return load_modes(dir); }, py::arg("dir"));
  m.def(
      "save_modes",
      [](const ModeTrajectory& traj, const std::filesystem::path& dir, std::uint64_t seed, const std::string& model) {
        save_modes(traj, dir, {traj.duration(), seed, model});
      },
      py::arg("traj"), py::arg("dir"), py::arg("seed") = 0, py::arg("model") = "");
}
