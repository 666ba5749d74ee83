// Python bindings for the core library.
#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "edlab/config.hpp"
#include "edlab/datasets.hpp"
#include "edlab/energy_model.hpp"
#include "edlab/experiments.hpp"
#include "edlab/losses.hpp"
#include "edlab/runs.hpp"

namespace py = pybind11;
using namespace edlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Dense to_dense(const Array& a) {
  const auto buf = a.request();
  if (buf.ndim == 1) {
    const auto* p = static_cast<const double*>(buf.ptr);
    return Dense(static_cast<std::size_t>(buf.shape[0]), 1, std::vector<double>(p, p + buf.shape[0]));
  }
  if (buf.ndim != 2) throw py::value_error("expected a 1-d or 2-d array");
  const auto rows = static_cast<std::size_t>(buf.shape[0]);
  const auto cols = static_cast<std::size_t>(buf.shape[1]);
  const auto* p = static_cast<const double*>(buf.ptr);
  return Dense(rows, cols, std::vector<double>(p, p + rows * cols));
}

Array to_array(const Dense& d) {
  Array out({d.rows(), d.cols()});
  std::copy(d.span().begin(), d.span().end(), out.mutable_data());
  return out;
}

Array to_vector(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

const std::vector<std::string> kExperimentSections{"mixture", "wstudy", "ising", "ablation", "graycode"};

// config file then overrides; experiment sections are split off like the CLI does
std::pair<RunConfig, KeyValues> run_config(const KeyValues& overrides, const std::string& config_file) {
  KeyValues all = config_file.empty() ? KeyValues{} : parse_config_file(config_file);
  for (const auto& [k, v] : overrides) all[k] = v;
  KeyValues run_kv, extra;
  for (const auto& [k, v] : all) {
    const auto section = k.substr(0, k.find('.'));
    const bool exp = std::find(kExperimentSections.begin(), kExperimentSections.end(), section) !=
                     kExperimentSections.end();
    (exp ? extra : run_kv)[k] = v;
  }
  RunConfig cfg;
  cfg.apply(run_kv);
  cfg.validate();
  return {cfg, extra};
}

}  // namespace

PYBIND11_MODULE(_edlab, m) {
  m.doc() = "energy discrepancy lab (compiled core)";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

  py::class_<LossResult>(m, "LossResult")
      .def_readonly("loss", &LossResult::loss)
      .def_property_readonly("grad", [](const LossResult& r) { return to_vector(r.grad.span()); })
      .def_property_readonly("diverged", [](const LossResult& r) { return r.status == LossStatus::diverged; })
      .def_property_readonly("terms", [](const LossResult& r) { return to_vector(r.terms); })
      .def_readonly("bound_violations", &LossResult::bound_violations)
      .def("__repr__", [](const LossResult& r) { return "<LossResult loss=" + std::to_string(r.loss) + ">"; });

  py::class_<EnergyModel>(m, "EnergyModel")
      .def_static(
          "mlp",
          [](std::size_t input_dim, std::vector<std::size_t> hidden, const std::string& activation,
             std::uint64_t seed) {
            MlpSpec spec{input_dim, std::move(hidden), activation_from_string(activation)};
            spec.validate();
            RngStream rng = RngStream(seed).split("init");
            return EnergyModel::mlp(spec, init_xavier(spec, rng));
          },
          py::arg("input_dim") = 2, py::arg("hidden") = std::vector<std::size_t>{64, 64},
          py::arg("activation") = "softplus", py::arg("seed") = 0, "Xavier-initialised MLP energy.")
      .def_static("gauss_quad", &EnergyModel::gauss_quad, py::arg("mean"), py::arg("var") = 1.0,
                  "(x - mean)^2 / (2 var) plus its normaliser.")
      .def_static("mixture1d", &EnergyModel::mixture1d, py::arg("rho"))
      .def_static("ising", [](const Array& j) { return EnergyModel::ising(to_dense(j)); }, py::arg("coupling"))
      .def_property_readonly("kind", &EnergyModel::kind)
      .def_property_readonly("input_dim", &EnergyModel::input_dim)
      .def_property_readonly("param_count", &EnergyModel::param_count)
      .def_property(
          "params", [](const EnergyModel& e) { return to_vector(e.params().span()); },
          [](EnergyModel& e, const Array& p) { e.set_params(to_dense(p).span()); })
      .def("energies", [](const EnergyModel& e, const Array& x) { return to_vector(e.energies(to_dense(x))); },
           py::arg("points"))
      .def("grad_inputs", [](const EnergyModel& e, const Array& x) { return to_array(e.grad_inputs(to_dense(x))); },
           py::arg("points"))
      .def("save", [](const EnergyModel& e, const std::string& path) { save_checkpoint(e, path); }, py::arg("path"));

  m.def("load_checkpoint", [](const std::string& path) { return load_checkpoint(path); }, py::arg("path"));

  m.def(
      "ed_loss",
      [](const EnergyModel& model, const Array& batch, double t, std::size_t m_, double w, std::uint64_t seed,
         bool with_grad) {
        RngStream rng(seed);
        return ed_loss_grad(model, to_dense(batch), EdConfig{t, m_, w}, rng, with_grad);
      },
      py::arg("model"), py::arg("batch"), py::arg("t") = 1.0, py::arg("m") = 4, py::arg("w") = 1.0,
      py::arg("seed") = 0, py::arg("with_grad") = true);
  m.def(
      "ed_discrete_loss",
      [](const EnergyModel& model, const Array& bits, double eps, std::size_t m_, double w, std::uint64_t seed,
         bool with_grad) {
        RngStream rng(seed);
        EdConfig cfg{1.0, m_, w};
        cfg.eps = eps;
        return ed_discrete_loss_grad(model, to_dense(bits), cfg, rng, with_grad);
      },
      py::arg("model"), py::arg("bits"), py::arg("eps") = 0.05, py::arg("m") = 4, py::arg("w") = 1.0,
      py::arg("seed") = 0, py::arg("with_grad") = true);
  m.def(
      "cd_loss",
      [](const EnergyModel& model, const Array& batch, std::size_t steps, double step_size, std::uint64_t seed,
         bool with_grad) {
        RngStream rng(seed);
        return cd_loss_grad(model, to_dense(batch), CdConfig{steps, step_size}, rng, with_grad);
      },
      py::arg("model"), py::arg("batch"), py::arg("steps") = 1, py::arg("step_size") = 0.1, py::arg("seed") = 0,
      py::arg("with_grad") = true);
  m.def(
      "sm_loss",
      [](const EnergyModel& model, const Array& batch, double fd_step, bool with_grad) {
        return sm_loss_grad(model, to_dense(batch), SmConfig{fd_step}, with_grad);
      },
      py::arg("model"), py::arg("batch"), py::arg("fd_step") = 1e-3, py::arg("with_grad") = true);
  m.def(
      "dsm_loss",
      [](const EnergyModel& model, const Array& batch, double t, double fd_step, std::uint64_t seed,
         bool with_grad) {
        RngStream rng(seed);
        return dsm_loss_grad(model, to_dense(batch), DsmConfig{t, fd_step}, rng, with_grad);
      },
      py::arg("model"), py::arg("batch"), py::arg("t") = 1.0, py::arg("fd_step") = 1e-3, py::arg("seed") = 0,
      py::arg("with_grad") = true);

  m.def("dataset_names", &toy2d_names);
  m.def(
      "dataset_sample",
      [](const std::string& name, std::size_t n, std::uint64_t seed) {
        RngStream rng = RngStream(seed).split("data");
        return to_array(sample_toy2d(name, n, rng).points);
      },
      py::arg("name"), py::arg("n"), py::arg("seed") = 0);
  m.def(
      "dataset_logp",
      [](const std::string& name, const Array& x) {
        if (!toy2d_has_logp(name)) throw py::value_error("dataset '" + name + "' has no exact density");
        const Dense pts = to_dense(x);
        std::vector<double> out(pts.rows());
        for (std::size_t i = 0; i < pts.rows(); ++i) out[i] = toy2d_logp(name, pts.row(i));
        return to_vector(out);
      },
      py::arg("name"), py::arg("points"));

  m.def(
      "_train",
      [](const std::string& out, const KeyValues& overrides, const std::string& config_file) {
        const auto [cfg, extra] = run_config(overrides, config_file);
        if (!extra.empty()) throw ConfigError("train: unexpected key '" + extra.begin()->first + "'");
        const TrainSummary s = cmd_train(cfg, out);
        py::dict d;
        d["status"] = s.status;
        d["iters_completed"] = s.iters_completed;
        d["diverged_at"] = s.diverged_at ? py::cast(*s.diverged_at) : py::none();
        py::list rows;
        for (const auto& r : s.metrics) rows.append(py::make_tuple(r.iter, r.loss, r.density_mse, r.log_z));
        d["metrics"] = rows;
        return d;
      },
      py::arg("out_dir"), py::arg("overrides"), py::arg("config_file"));
  m.def(
      "sample",
      [](const std::string& ckpt, std::size_t n, std::size_t steps, double step_size, std::uint64_t seed,
         const std::string& out_csv) {
        return to_array(cmd_sample(ckpt, n, LangevinConfig{steps, step_size}, seed, out_csv));
      },
      py::arg("checkpoint"), py::arg("n") = 1000, py::arg("steps") = 100, py::arg("step_size") = 0.1,
      py::arg("seed") = 0, py::arg("out_csv") = "");
  m.def(
      "eval_density",
      [](const std::string& ckpt, const std::string& dataset, std::size_t grid, std::size_t logz_n,
         std::uint64_t seed) {
        const DensityReport r = cmd_eval_density(ckpt, dataset, grid, logz_n, seed);
        py::dict d;
        d["log_z"] = r.log_z;
        d["density_mse"] = r.density_mse;
        return d;
      },
      py::arg("checkpoint"), py::arg("dataset") = "gauss25", py::arg("grid") = 100, py::arg("logz_n") = 5000,
      py::arg("seed") = 0);

  m.def("experiment_names", &experiment_names);
  m.def(
      "_experiment",
      [](const std::string& name, const std::string& out, const KeyValues& overrides, const std::string& config_file) {
        const auto [base, extra] = run_config(overrides, config_file);
        return run_named_experiment(name, base, extra, out);
      },
      py::arg("name"), py::arg("out_dir"), py::arg("overrides"), py::arg("config_file"));

  m.def("verify_check_names", &verify_check_names);
  m.def(
      "_verify",
      [](const std::string& check, std::uint64_t seed) {
        std::vector<std::string> lines;
        for (const auto& r : run_verify(check, seed)) lines.push_back(report_json(r));
        return lines;
      },
      py::arg("check"), py::arg("seed"));
}
