// Copyright 2026 The nsswig Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nsswig/benchmarks.hpp>
#include <nsswig/diag.hpp>
#include <nsswig/engine.hpp>
#include <nsswig/io.hpp>

namespace py = pybind11;
using namespace nsswig;

namespace {

py::array_t<double> column(const RunResult& r, double DeadRecord::*field) {
  py::array_t<double> out(static_cast<py::ssize_t>(r.dead.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < r.dead.size(); ++i) v(static_cast<py::ssize_t>(i)) = r.dead[i].*field;
  return out;
}

Points to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected a 2-d array of shape (n, d)");
  const auto u = a.unchecked<2>();
  Points p(static_cast<std::size_t>(u.shape(0)), std::vector<double>(static_cast<std::size_t>(u.shape(1))));
  for (py::ssize_t i = 0; i < u.shape(0); ++i) {
    for (py::ssize_t j = 0; j < u.shape(1); ++j) p[i][j] = u(i, j);
  }
  return p;
}

py::array_t<double> to_array(const Points& p) {
  const std::size_t d = p.empty() ? 0 : p.front().size();
  py::array_t<double> out({static_cast<py::ssize_t>(p.size()), static_cast<py::ssize_t>(d)});
  auto v = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) v(i, j) = p[i][j];
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_nsswig, m) {
  m.doc() = "Nested sampling with Slice-within-Gibbs kernels";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);

  py::enum_<KernelKind>(m, "KernelKind").value("swig", KernelKind::swig).value("nss", KernelKind::nss);

  py::class_<ModelDims>(m, "ModelDims")
      .def_readonly("d_psi", &ModelDims::d_psi)
      .def_readonly("groups", &ModelDims::groups)
      .def_readonly("d_theta", &ModelDims::d_theta)
      .def_property_readonly("d_total", &ModelDims::d_total);

  py::class_<Model, std::shared_ptr<Model>>(m, "Model")
      .def_property_readonly("name", &Model::name)
      .def_property_readonly("dims", &Model::dims)
      .def_property_readonly("analytic_logz", &Model::analytic_logz)
      .def_property("force_full_recompute_on_psi", &Model::force_full_recompute_on_psi,
                    &Model::set_force_full_recompute_on_psi)
      .def("log_prior_hyper", [](const Model& self, std::vector<double> psi) { return self.log_prior_hyper(psi); })
      .def("group_loglike", [](const Model& self, std::vector<double> theta, std::vector<double> psi,
                               std::size_t j) { return self.group_loglike(theta, psi, j); });

  py::class_<HierGaussConfig>(m, "HierGaussConfig")
      .def(py::init<>())
      .def_readwrite("mu0", &HierGaussConfig::mu0)
      .def_readwrite("sigma_psi", &HierGaussConfig::sigma_psi)
      .def_readwrite("sigma_theta", &HierGaussConfig::sigma_theta)
      .def_readwrite("sigma_obs", &HierGaussConfig::sigma_obs)
      .def_readwrite("groups", &HierGaussConfig::groups)
      .def_readwrite("psi_true", &HierGaussConfig::psi_true)
      .def_readwrite("seed", &HierGaussConfig::seed);

  py::class_<FunnelConfig>(m, "FunnelConfig")
      .def(py::init<>())
      .def_readwrite("sigma_psi_sq", &FunnelConfig::sigma_psi_sq)
      .def_readwrite("groups", &FunnelConfig::groups)
      .def_readwrite("theta_bound", &FunnelConfig::theta_bound);

  py::class_<SVConfig>(m, "SVConfig")
      .def(py::init<>())
      .def_readwrite("sites", &SVConfig::sites)
      .def_readwrite("mu", &SVConfig::mu)
      .def_readwrite("beta", &SVConfig::beta)
      .def_readwrite("sigma", &SVConfig::sigma)
      .def_readwrite("seed", &SVConfig::seed);

  py::class_<HierGaussModel, Model, std::shared_ptr<HierGaussModel>>(m, "HierGaussModel")
      .def(py::init<HierGaussConfig, std::vector<double>>(), py::arg("config"), py::arg("y"));
  py::class_<FunnelModel, Model, std::shared_ptr<FunnelModel>>(m, "FunnelModel")
      .def(py::init<FunnelConfig>(), py::arg("config"));
  py::class_<SVModel, Model, std::shared_ptr<SVModel>>(m, "SVModel")
      .def(py::init<std::size_t, std::vector<double>>(), py::arg("sites"), py::arg("y"));

  m.def("generate_hg_data", &generate_hg_data, py::arg("config"));
  m.def("generate_sv_data", [](const SVConfig& c) {
    auto d = generate_sv_data(c);
    return py::make_tuple(d.y, d.log_vol);
  }, py::arg("config"), "Returns (y, latent log-variances).");
  m.def("hg_analytic_logz", [](std::vector<double> y, const HierGaussConfig& c) { return hg_analytic_logz(y, c); },
        py::arg("y"), py::arg("config"));
  m.def("funnel_analytic_logz", &funnel_analytic_logz, py::arg("config"), py::arg("tolerance") = 1e-10);

  py::class_<KernelConfig>(m, "KernelConfig")
      .def(py::init<>())
      .def_readwrite("sweeps", &KernelConfig::sweeps)
      .def_readwrite("psi_steps", &KernelConfig::psi_steps)
      .def_readwrite("theta_steps", &KernelConfig::theta_steps)
      .def_readwrite("nss_steps", &KernelConfig::nss_steps)
      .def_readwrite("shuffle_sweep", &KernelConfig::shuffle_sweep);

  py::class_<RunConfig>(m, "RunConfig")
      .def(py::init<>())
      .def_readwrite("live_points", &RunConfig::live_points)
      .def_readwrite("batch", &RunConfig::batch)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("kernel", &RunConfig::kernel)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("kernel_cfg", &RunConfig::kernel_cfg)
      .def_readwrite("store_params_every", &RunConfig::store_params_every)
      .def_readwrite("pool_local_cov", &RunConfig::pool_local_cov)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("max_iterations", &RunConfig::max_iterations);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("model_name", &RunResult::model_name)
      .def_readonly("log_z", &RunResult::log_z)
      .def_readonly("sigma_hat", &RunResult::sigma_hat)
      .def_readonly("h", &RunResult::h)
      .def_readonly("ess", &RunResult::ess)
      .def_readonly("n_iterations", &RunResult::n_iterations)
      .def_readonly("n_group_calls", &RunResult::n_group_calls)
      .def_readonly("full_equivalents", &RunResult::full_equivalents)
      .def_readonly("analytic_logz", &RunResult::analytic_logz)
      .def_readonly("wall_seconds", &RunResult::wall_seconds)
      .def_property_readonly("stall_count", [](const RunResult& r) { return r.stats.stalls(); })
      .def_property_readonly("log_like", [](const RunResult& r) { return column(r, &DeadRecord::log_like); })
      .def_property_readonly("log_x", [](const RunResult& r) { return column(r, &DeadRecord::log_x); })
      .def_property_readonly("log_weight", [](const RunResult& r) { return column(r, &DeadRecord::log_weight); })
      .def("posterior_samples",
           [](const RunResult& r, std::size_t n, std::uint64_t seed) {
             Rng rng = make_stream(seed, {0x5053});
             return to_array(posterior_samples(r, n, rng));
           },
           py::arg("n"), py::arg("seed") = 0)
      .def("summary", [](const RunResult& r) { return run_summary(r).dump(); }, "Summary document as JSON text.")
      .def("write", [](const RunResult& r, const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir);
        write_dead_points(dir / "dead.txt", r);
        write_summary(dir / "summary.json", r);
      });

  m.def("run_nested_sampling", &run_nested_sampling, py::arg("model"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>());

  m.def("compute_budget", &compute_budget, py::arg("lstar"), py::arg("total"), py::arg("ell_k"));
  m.def("compress_volume", [](double log_x, std::size_t mm, std::size_t k) {
    auto v = compress_volume(log_x, mm, k);
    return py::make_tuple(v.log_x, v.new_log_x);
  });
  m.def("select_batch", [](std::vector<double> ll, std::size_t k) {
    auto s = select_batch(ll, k);
    return py::make_tuple(s.indices, s.lstar);
  });

  py::class_<MMDResult>(m, "MMDResult")
      .def_readonly("value", &MMDResult::value)
      .def_readonly("bandwidth", &MMDResult::bandwidth)
      .def_readonly("n_subsample", &MMDResult::n_subsample)
      .def_readonly("n_repeats", &MMDResult::n_repeats)
      .def_readonly("std_over_repeats", &MMDResult::std_over_repeats);

  m.def("mmd",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b, std::size_t n_sub,
           std::size_t repeats, std::uint64_t seed, bool standardize) {
          Rng rng = make_stream(seed, {0x4D4D44});
          return mmd(to_points(a), to_points(b), rng, MMDOptions{n_sub, repeats, standardize});
        },
        py::arg("a"), py::arg("b"), py::arg("n_sub") = 1000, py::arg("repeats") = 5, py::arg("seed") = 0,
        py::arg("standardize") = false);

  m.def("fit_loglog", [](std::vector<double> x, std::vector<double> y) {
    const auto f = fit_loglog(x, y);
    return py::make_tuple(f.slope, f.slope_se, f.r2);
  }, "Returns (slope, slope standard error, R^2).");

  m.def("parse_config", [](const std::string& text) { return serialize_config(parse_config(text)); },
        "Parses and re-serializes an INI experiment config (raises on unknown keys).");
  m.def("run_config", [](const std::string& text) {
    py::gil_scoped_release release;
    const auto res = run_experiment(parse_config(text), true);
    std::size_t failed = 0;
    for (const auto& p : res.points) failed += p.n_failed;
    return failed;
  }, "Runs an experiment config; returns the number of failed runs.");
}
