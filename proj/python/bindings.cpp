// Python bindings for the core library.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "sfcdelay/analytic.hpp"
#include "sfcdelay/control.hpp"
#include "sfcdelay/evalkit.hpp"
#include "sfcdelay/mdn.hpp"
#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

namespace py = pybind11;
using namespace sfcdelay;

namespace {

// Records as a dict of numpy arrays: arrival_time, b (n x N), path_id, delay.
py::dict records_to_dict(const std::vector<netsim::CustomerRecord>& records, std::size_t stages) {
  const auto n = static_cast<py::ssize_t>(records.size());
  py::array_t<double> arrival(n), delay(n);
  py::array_t<int> path_id(n);
  py::array_t<int> b({n, static_cast<py::ssize_t>(stages)});
  py::array_t<std::uint64_t> ids(n);
  auto a = arrival.mutable_unchecked<1>();
  auto d = delay.mutable_unchecked<1>();
  auto p = path_id.mutable_unchecked<1>();
  auto q = b.mutable_unchecked<2>();
  auto id = ids.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const auto& r = records[i];
    id(i) = r.id;
    a(i) = r.arrival_time;
    d(i) = r.delay;
    p(i) = r.path_id;
    for (std::size_t s = 0; s < stages; ++s) q(i, s) = r.b[s];
  }
  py::dict out;
  out["id"] = ids;
  out["arrival_time"] = arrival;
  out["b"] = b;
  out["path_id"] = path_id;
  out["delay"] = delay;
  return out;
}

mdn::Batch batch_from_arrays(py::array_t<double, py::array::c_style | py::array::forcecast> features,
                             py::array_t<double, py::array::c_style | py::array::forcecast> targets) {
  if (features.ndim() != 2) throw std::invalid_argument("features must be a 2-D array (samples x stages)");
  if (targets.ndim() != 1 || targets.shape(0) != features.shape(0)) {
    throw std::invalid_argument("targets must be 1-D with one entry per feature row");
  }
  const auto n = features.shape(0), dim = features.shape(1);
  mdn::Batch batch;
  batch.features.resize(dim, n);
  batch.targets.resize(n);
  auto f = features.unchecked<2>();
  auto t = targets.unchecked<1>();
  for (py::ssize_t j = 0; j < n; ++j) {
    for (py::ssize_t i = 0; i < dim; ++i) batch.features(i, j) = f(j, i);
    batch.targets[j] = t(j);
  }
  return batch;
}

std::vector<MixtureComponent> components_from_py(const py::iterable& comps) {
  std::vector<MixtureComponent> out;
  for (const auto& c : comps) {
    const auto t = c.cast<std::tuple<double, double, double>>();
    out.push_back({std::get<0>(t), std::get<1>(t), std::get<2>(t)});
  }
  return out;
}

py::dict bounds_dict(const DelayBounds& b) {
  py::dict d;
  d["d_lb"] = b.d_lb;
  d["d_ub"] = b.d_ub;
  d["mmse"] = b.mmse;
  d["ci_half_width"] = b.ci_half_width;
  d["eps_lb"] = b.eps_lb;
  d["eps_ub"] = b.eps_ub;
  d["p_cl"] = b.p_cl;
  return d;
}

py::dict report_dict(const control::ThroughputReport& r) {
  py::dict d;
  d["offered"] = r.offered;
  d["admitted"] = r.admitted;
  d["dropped"] = r.dropped;
  d["delivered_in_deadline"] = r.delivered_in_deadline;
  d["throughput"] = r.throughput;
  return d;
}

}  // namespace

PYBIND11_MODULE(_sfcdelay, m) {
  m.doc() = "Conditional end-to-end delay prediction for queueing networks";

  py::class_<GaussianMixture>(m, "Mixture")
      .def(py::init([](const py::iterable& comps) { return GaussianMixture(components_from_py(comps)); }),
           py::arg("components"), "Mixture from (weight, mean, variance) triples.")
      .def_property_readonly("components",
                             [](const GaussianMixture& g) {
                               std::vector<std::tuple<double, double, double>> out;
                               for (const auto& c : g.components()) out.emplace_back(c.weight, c.mean, c.variance);
                               return out;
                             })
      .def("pdf", &GaussianMixture::pdf, py::arg("d"))
      .def("cdf", &GaussianMixture::cdf, py::arg("d"))
      .def("log_pdf", &GaussianMixture::log_pdf, py::arg("d"))
      .def_property_readonly("mean", &GaussianMixture::mean)
      .def_property_readonly("variance", &GaussianMixture::variance)
      .def("mmse", [](const GaussianMixture& g) { return mmse(g); })
      .def("upper_bound", [](const GaussianMixture& g, double eps) { return upper_bound(g, eps); }, py::arg("eps"))
      .def("lower_bound", [](const GaussianMixture& g, double eps) { return lower_bound(g, eps); }, py::arg("eps"))
      .def("confidence_interval", [](const GaussianMixture& g, double p) { return confidence_interval(g, p); },
           py::arg("p_cl"))
      .def("bounds",
           [](const GaussianMixture& g, double eps_lb, double eps_ub, double p_cl) {
             return bounds_dict(delay_bounds(g, eps_lb, eps_ub, p_cl));
           },
           py::arg("eps_lb") = 0.05, py::arg("eps_ub") = 0.05, py::arg("p_cl") = 0.95)
      .def("to_json", [](const GaussianMixture& g) { return to_json(g).dump(); })
      .def("__repr__", [](const GaussianMixture& g) { return "Mixture(" + to_json(g).dump() + ")"; });

  m.def("preset_names", &netsim::preset_names);
  m.def(
      "network_config",
      [](const std::string& topology, double p) { return netsim::to_config_yaml(netsim::build_topology(topology, p)); },
      py::arg("topology"), py::arg("acyclic1_p") = 2.0 / 3.0, "YAML description of a preset or config file.");

  m.def(
      "simulate",
      [](const std::string& topology, std::uint64_t packets, std::optional<std::uint64_t> warmup,
         std::uint64_t seed, double acyclic1_p) {
        const auto spec = netsim::build_topology(topology, acyclic1_p);
        auto opt = netsim::SimulationOptions::with_default_warmup(packets, seed);
        if (warmup) opt.warmup = *warmup;
        netsim::SimulationRun run;
        {
          py::gil_scoped_release release;
          run = netsim::simulate(spec, opt);
        }
        py::dict out = records_to_dict(run.records, spec.stage_count());
        std::vector<double> util;
        for (const auto& s : run.stages) util.push_back(s.utilization);
        out["utilization"] = util;
        return out;
      },
      py::arg("topology"), py::arg("packets") = 200000, py::arg("warmup") = py::none(), py::arg("seed") = 1,
      py::arg("acyclic1_p") = 2.0 / 3.0,
      "Simulate a preset (or config file) and return post-warmup records as numpy arrays.");

  m.def(
      "simulate_to_file",
      [](const std::string& topology, const std::filesystem::path& path, std::uint64_t packets,
         std::optional<std::uint64_t> warmup, std::uint64_t seed) {
        const auto spec = netsim::build_topology(topology);
        auto opt = netsim::SimulationOptions::with_default_warmup(packets, seed);
        if (warmup) opt.warmup = *warmup;
        py::gil_scoped_release release;
        const auto run = netsim::simulate(spec, opt);
        netsim::write_dataset(run.records, spec.stage_count(), path);
        return run.records.size();
      },
      py::arg("topology"), py::arg("path"), py::arg("packets") = 200000, py::arg("warmup") = py::none(),
      py::arg("seed") = 1);

  m.def(
      "read_dataset",
      [](const std::filesystem::path& path) {
        const auto records = netsim::read_dataset(path);
        return records_to_dict(records, records.empty() ? 0 : records.front().b.size());
      },
      py::arg("path"));

  m.def(
      "analytic_mixture",
      [](const std::string& topology, const std::vector<int>& b, double acyclic1_p) {
        return analytic::gmm_approximation(netsim::build_topology(topology, acyclic1_p), b);
      },
      py::arg("topology"), py::arg("b"), py::arg("acyclic1_p") = 2.0 / 3.0,
      "Path-weighted Gaussian mixture approximation of the delay given b.");

  m.def(
      "seen_queue_lengths",
      [](const std::string& topology, const std::vector<int>& b, int path) {
        const auto spec = netsim::build_topology(topology);
        const auto& p = spec.routing.paths().at(path);
        return analytic::propagate_queue_lengths(analytic::path_stages(spec, p), analytic::restrict_to_path(b, p)).q;
      },
      py::arg("topology"), py::arg("b"), py::arg("path") = 0);

  py::class_<mdn::MdnModel>(m, "Model")
      .def_static("load", &mdn::load_model, py::arg("path"))
      .def("save", [](const mdn::MdnModel& model, const std::filesystem::path& p) { mdn::save_model(model, p); },
           py::arg("path"))
      .def("predict", [](const mdn::MdnModel& model, const std::vector<double>& b) { return model.forward(b); },
           py::arg("b"))
      .def("nll",
           [](const mdn::MdnModel& model, py::array_t<double, py::array::c_style | py::array::forcecast> f,
              py::array_t<double, py::array::c_style | py::array::forcecast> t) {
             return mdn::nll_loss(model, batch_from_arrays(f, t));
           },
           py::arg("features"), py::arg("targets"), "Summed negative log-likelihood.")
      .def_property_readonly("input_dim", [](const mdn::MdnModel& model) { return model.architecture().input_dim; })
      .def_property_readonly("hidden", [](const mdn::MdnModel& model) { return model.architecture().hidden; })
      .def_property_readonly("kernels", [](const mdn::MdnModel& model) { return model.architecture().kernels; })
      .def_property_readonly("parameter_count", &mdn::MdnModel::parameter_count);

  m.def(
      "train",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> features,
         py::array_t<double, py::array::c_style | py::array::forcecast> targets, std::vector<int> hidden,
         int kernels, int epochs, int batch_size, double learning_rate, std::uint64_t seed,
         double holdout_fraction) {
        const auto batch = batch_from_arrays(features, targets);
        mdn::Architecture arch;
        arch.input_dim = static_cast<int>(batch.features.rows());
        arch.hidden = std::move(hidden);
        arch.kernels = kernels;
        mdn::TrainConfig cfg;
        cfg.epochs = epochs;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.seed = seed;
        cfg.holdout_fraction = holdout_fraction;
        mdn::TrainResult result;
        {
          py::gil_scoped_release release;
          result = mdn::train(batch, arch, cfg);
        }
        std::vector<double> trace;
        for (const auto& r : result.trace) trace.push_back(r.train_loss);
        py::dict out;
        out["model"] = result.model;
        out["loss_trace"] = trace;
        out["holdout_nll"] = result.holdout_nll;
        return out;
      },
      py::arg("features"), py::arg("targets"), py::arg("hidden") = std::vector<int>{64, 32, 32},
      py::arg("kernels") = 3, py::arg("epochs") = 500, py::arg("batch_size") = 512,
      py::arg("learning_rate") = 1e-3, py::arg("seed") = 1, py::arg("holdout_fraction") = 0.1,
      "Train a mixture density network; returns model, per-epoch loss trace and held-out NLL.");

  m.def(
      "admission_experiment",
      [](const std::string& topology, const mdn::MdnModel* model, double deadline, double threshold,
         std::uint64_t packets, std::uint64_t seed) {
        const auto spec = netsim::build_topology(topology);
        control::AdmissionPolicy policy;
        policy.deadline = deadline;
        policy.drop_threshold = threshold;
        policy.predictor =
            model ? control::Predictor::from_model(*model) : control::Predictor::from_analytic(spec);
        control::AdmissionExperiment exp;
        {
          py::gil_scoped_release release;
          exp = control::run_admission_experiment(spec, policy,
                                                  netsim::SimulationOptions::with_default_warmup(packets, seed));
        }
        py::dict out;
        out["baseline"] = report_dict(exp.baseline);
        out["controlled"] = report_dict(exp.controlled);
        return out;
      },
      py::arg("topology"), py::arg("model") = nullptr, py::arg("deadline") = 80.0, py::arg("threshold") = 0.95,
      py::arg("packets") = 200000, py::arg("seed") = 1,
      "Paired baseline and admission-controlled runs; the analytic mixture is used when no model is given.");

  m.def(
      "ks_distance", [](const GaussianMixture& mix, std::vector<double> samples) {
        return eval::ks_distance(mix, std::move(samples));
      },
      py::arg("mixture"), py::arg("samples"));
}
