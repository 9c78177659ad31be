// sfcdelay: command-line driver for simulation, training, prediction,
// admission control and evaluation.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "sfcdelay/analytic.hpp"
#include "sfcdelay/control.hpp"
#include "sfcdelay/evalkit.hpp"
#include "sfcdelay/mdn.hpp"
#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

namespace fs = std::filesystem;
using namespace sfcdelay;

namespace {

enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kMissingInput = 3,
  kMalformedInput = 4,
  kDimensionMismatch = 5,
  kDiverged = 6,
  kSimulationFailed = 7,
  kOutputFailed = 8,
};

struct CliError : std::runtime_error {
  CliError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
  int code;
};

constexpr const char* kOutDirEnv = "SFCDELAY_OUT_DIR";

fs::path output_dir() {
  const char* env = std::getenv(kOutDirEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

// Flag value if given, otherwise `name` inside the default output directory.
fs::path output_path(const std::string& flag, const std::string& name) {
  fs::path p = flag.empty() ? output_dir() / name : fs::path(flag);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    if (ec) throw CliError(kOutputFailed, "cannot create directory " + p.parent_path().string());
  }
  return p;
}

template <class F>
void write_output(const fs::path& path, F&& writer) {
  try {
    writer(path);
  } catch (const std::exception& e) {
    throw CliError(kOutputFailed, e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  write_output(path, [&](const fs::path& p) {
    std::ofstream out(p);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + p.string());
  });
}

void require_file(const std::string& path, const std::string& flag) {
  if (path.empty()) throw CliError(kUsage, flag + " is required");
  if (!fs::is_regular_file(path)) throw CliError(kMissingInput, flag + ": no such file " + path);
}

std::vector<int> parse_ints(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto first = tok.find_first_not_of(" \t");
    const auto last = tok.find_last_not_of(" \t");
    if (first == std::string::npos) throw CliError(kUsage, flag + ": empty entry in '" + text + "'");
    tok = tok.substr(first, last - first + 1);
    int v = 0;
    const auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || end != tok.data() + tok.size()) {
      throw CliError(kUsage, flag + ": '" + tok + "' is not an integer");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CliError(kUsage, flag + ": expected a comma-separated list");
  return out;
}

std::vector<int> parse_queue_vector(const std::string& text, const std::string& flag) {
  auto b = parse_ints(text, flag);
  for (int v : b) {
    if (v < 0) throw CliError(kUsage, flag + ": queue lengths must be nonnegative");
  }
  return b;
}

netsim::NetworkSpec load_topology(const std::string& name, double acyclic1_p) {
  try {
    return netsim::build_topology(name, acyclic1_p);
  } catch (const std::invalid_argument& e) {
    throw CliError(kUsage, std::string("--topology: ") + e.what());
  }
}

mdn::MdnModel load_model_file(const std::string& path) {
  require_file(path, "--model");
  try {
    return mdn::load_model(path);
  } catch (const std::exception& e) {
    throw CliError(kMalformedInput, e.what());
  }
}

std::vector<netsim::CustomerRecord> load_dataset(const std::string& path) {
  require_file(path, "--data");
  try {
    return netsim::read_dataset(path);
  } catch (const std::exception& e) {
    throw CliError(kMalformedInput, e.what());
  }
}

// Predictor options shared by predict, bounds, admission and evaluate.
struct PredictorFlags {
  std::string model;
  bool analytic = false;
  std::string topology = "tandem1";
  double acyclic1_p = 2.0 / 3.0;

  void add(CLI::App* cmd, bool topology_for_analytic_only = true) {
    cmd->add_option("--model", model, "MDN model file");
    cmd->add_flag("--analytic", analytic, "Use the analytic mixture instead of a model");
    cmd->add_option("--topology", topology,
                    topology_for_analytic_only ? "Preset or config file (with --analytic)"
                                               : "Preset name or network config file")
        ->capture_default_str();
    cmd->add_option("--acyclic1-p", acyclic1_p, "Upper-branch probability of acyclic1")
        ->capture_default_str();
  }

  control::Predictor make() const {
    if (analytic && !model.empty()) throw CliError(kUsage, "--model and --analytic are exclusive");
    if (analytic) return control::Predictor::from_analytic(load_topology(topology, acyclic1_p));
    if (model.empty()) throw CliError(kUsage, "--model (or --analytic) is required");
    return control::Predictor::from_model(load_model_file(model));
  }
};

GaussianMixture predict_checked(const control::Predictor& p, std::span<const int> b) {
  if (b.size() != p.input_dim) {
    throw CliError(kDimensionMismatch, "--b has " + std::to_string(b.size()) +
                                           " entries, predictor expects " +
                                           std::to_string(p.input_dim));
  }
  return p.predict(b);
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string topology = "tandem1";
  std::uint64_t packets = 200000;
  std::optional<std::uint64_t> warmup;
  std::uint64_t seed = 1;
  std::string out;
  double deadline = 80.0;
  double acyclic1_p = 2.0 / 3.0;
};

int run_simulate(const SimulateArgs& a) {
  const auto spec = load_topology(a.topology, a.acyclic1_p);
  for (const auto& w : spec.validate()) std::cerr << "warning: " << w << "\n";
  netsim::SimulationOptions opt = netsim::SimulationOptions::with_default_warmup(a.packets, a.seed);
  if (a.warmup) opt.warmup = *a.warmup;
  if (opt.warmup >= opt.horizon) throw CliError(kUsage, "--warmup must be smaller than --packets");

  netsim::SimulationRun run;
  try {
    run = netsim::simulate(spec, opt);
  } catch (const netsim::QueueOverflow& e) {
    throw CliError(kSimulationFailed, e.what());
  }
  const auto path = output_path(a.out, spec.name + ".csv");
  write_output(path, [&](const fs::path& p) { netsim::write_dataset(run.records, spec.stage_count(), p); });

  double total = 0.0;
  std::size_t in_deadline = 0;
  std::vector<std::size_t> per_path(spec.routing.paths().size(), 0);
  for (const auto& r : run.records) {
    total += r.delay;
    if (r.delay <= a.deadline) ++in_deadline;
    ++per_path[r.path_id];
  }
  const double n = static_cast<double>(run.records.size());
  std::cout << "topology\t" << spec.name << "\n"
            << "arrivals\t" << netsim::describe(spec.arrivals) << "\n"
            << "customers\t" << run.records.size() << " (warmup " << opt.warmup << ")\n"
            << "mean_delay\t" << fixed(total / n) << "\n"
            << "within_" << fixed(a.deadline) << "\t" << fixed(in_deadline / n) << "\n"
            << "stage\tservers\tutilization\n";
  for (std::size_t s = 0; s < spec.stage_count(); ++s) {
    std::cout << s << "\t" << spec.stages[s].servers << "\t" << fixed(run.stages[s].utilization, 4)
              << "\n";
  }
  std::cout << "path\tstages\tfrequency\tprobability\n";
  for (std::size_t k = 0; k < per_path.size(); ++k) {
    const auto& p = spec.routing.paths()[k];
    std::string stages;
    for (std::size_t i = 0; i < p.stages.size(); ++i) stages += (i ? "-" : "") + std::to_string(p.stages[i]);
    std::cout << k << "\t" << stages << "\t" << fixed(per_path[k] / n, 4) << "\t"
              << fixed(p.probability, 4) << "\n";
  }
  std::cout << "dataset\t" << path.string() << "\n";
  return kOk;
}

struct TrainArgs {
  std::string data;
  std::string hidden = "64,32,32";
  int kernels = 3;
  mdn::TrainConfig config;
  std::string out_model;
  std::string loss_trace;
  bool verbose = false;
};

int run_train(const TrainArgs& a) {
  const auto records = load_dataset(a.data);
  if (records.empty()) throw CliError(kMalformedInput, "--data: dataset has no rows");
  mdn::Architecture arch;
  arch.input_dim = static_cast<int>(records.front().b.size());
  arch.hidden = parse_ints(a.hidden, "--hidden");
  arch.kernels = a.kernels;
  try {
    arch.validate();
    a.config.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(kUsage, e.what());
  }
  const auto batch = mdn::Batch::from_records(records);
  mdn::TrainResult result;
  try {
    result = mdn::train(batch, arch, a.config, [&](const mdn::EpochReport& r) {
      if (a.verbose && (r.epoch == 1 || r.epoch % 10 == 0)) {
        std::cerr << "epoch " << r.epoch << " loss " << fixed(r.train_loss) << "\n";
      }
    });
  } catch (const mdn::TrainingDiverged& e) {
    throw CliError(kDiverged, std::string("training diverged: ") + e.what());
  }
  const auto model_path = output_path(a.out_model, "model.txt");
  write_output(model_path, [&](const fs::path& p) { mdn::save_model(result.model, p); });
  const auto trace_path =
      a.loss_trace.empty() ? fs::path(model_path.string() + ".loss.txt") : output_path(a.loss_trace, "");
  write_output(trace_path, [&](const fs::path& p) { mdn::write_loss_trace(result.trace, p); });

  std::cout << "samples\t" << batch.size() << " (holdout " << result.holdout.size() << ")\n"
            << "architecture\t" << arch.input_dim << " -> " << a.hidden << " -> 3x" << arch.kernels
            << "\n"
            << "final_train_nll\t" << fixed(result.trace.back().train_loss) << "\n"
            << "holdout_nll\t" << fixed(result.holdout_nll) << "\n"
            << "model\t" << model_path.string() << "\n"
            << "loss_trace\t" << trace_path.string() << "\n";
  return kOk;
}

struct PredictArgs {
  PredictorFlags predictor;
  std::string b;
  std::string plot_out;
  bool json = false;
};

int run_predict(const PredictArgs& a) {
  const auto predictor = a.predictor.make();
  const auto b = parse_queue_vector(a.b, "--b");
  const auto mix = predict_checked(predictor, b);
  const auto [xs, ys] = eval::pdf_series(mix);
  const auto plot = output_path(a.plot_out, "predict_pdf.txt");
  write_output(plot, [&](const fs::path& p) { eval::write_series(p, "delay", "density", xs, ys); });
  if (a.json) {
    std::cout << to_json(mix).dump(2) << "\n";
  } else {
    std::cout << format_mixture(mix) << "mmse\t" << fixed(mmse(mix)) << "\n"
              << "sd\t" << fixed(std::sqrt(mix.variance())) << "\n"
              << "pdf\t" << plot.string() << "\n";
  }
  return kOk;
}

struct BoundsArgs {
  PredictorFlags predictor;
  std::string b;
  double eps = 0.05;
  std::optional<double> eps_lb, eps_ub;
  double pcl = 0.95;
  bool json = false;
};

int run_bounds(const BoundsArgs& a) {
  const auto predictor = a.predictor.make();
  const auto b = parse_queue_vector(a.b, "--b");
  const auto mix = predict_checked(predictor, b);
  DelayBounds d;
  try {
    d = delay_bounds(mix, a.eps_lb.value_or(a.eps), a.eps_ub.value_or(a.eps), a.pcl);
  } catch (const std::invalid_argument& e) {
    throw CliError(kUsage, e.what());
  }
  if (a.json) {
    std::cout << to_json(d).dump(2) << "\n";
  } else {
    std::cout << "d_lb\t" << fixed(d.d_lb, 8) << "\n"
              << "d_ub\t" << fixed(d.d_ub, 8) << "\n"
              << "mmse\t" << fixed(d.mmse, 8) << "\n"
              << "ci_half_width\t" << fixed(d.ci_half_width, 8) << "\n"
              << "eps_lb\t" << d.eps_lb << "\neps_ub\t" << d.eps_ub << "\np_cl\t" << d.p_cl << "\n";
  }
  return kOk;
}

struct AdmissionArgs {
  PredictorFlags predictor;
  double deadline = 80.0;
  double threshold = 0.95;
  std::uint64_t packets = 200000;
  std::optional<std::uint64_t> warmup;
  std::uint64_t seed = 1;
  std::string out_dir;
};

void write_delay_series(const fs::path& path, const control::ThroughputReport& r) {
  std::vector<double> ids, delays;
  for (const auto& e : r.log) {
    if (e.decision == control::Decision::Drop) continue;
    ids.push_back(static_cast<double>(e.record.id));
    delays.push_back(e.record.delay);
  }
  eval::write_series(path, "id", "delay", ids, delays);
}

int run_admission(const AdmissionArgs& a) {
  const auto spec = load_topology(a.predictor.topology, a.predictor.acyclic1_p);
  control::AdmissionPolicy policy;
  policy.deadline = a.deadline;
  policy.drop_threshold = a.threshold;
  policy.predictor = a.predictor.make();
  if (policy.predictor.input_dim != spec.stage_count()) {
    throw CliError(kDimensionMismatch, "predictor expects " + std::to_string(policy.predictor.input_dim) +
                                           " queue lengths, topology has " +
                                           std::to_string(spec.stage_count()) + " stages");
  }
  try {
    policy.validate();
  } catch (const std::invalid_argument& e) {
    throw CliError(kUsage, e.what());
  }
  auto opt = netsim::SimulationOptions::with_default_warmup(a.packets, a.seed);
  if (a.warmup) opt.warmup = *a.warmup;
  if (opt.warmup >= opt.horizon) throw CliError(kUsage, "--warmup must be smaller than --packets");

  control::AdmissionExperiment exp;
  try {
    exp = control::run_admission_experiment(spec, policy, opt);
  } catch (const netsim::QueueOverflow& e) {
    throw CliError(kSimulationFailed, e.what());
  }
  const fs::path dir = a.out_dir.empty() ? output_dir() : fs::path(a.out_dir);
  const auto report = output_path((dir / "admission_report.json").string(), "");
  auto j = control::to_json(exp, policy);
  j["topology"] = spec.name;
  j["seed"] = a.seed;
  j["warmup"] = opt.warmup;
  write_text(report, j.dump(2) + "\n");
  write_output(dir / "packets_baseline.csv",
               [&](const fs::path& p) { control::write_packet_log(exp.baseline, spec.stage_count(), p); });
  write_output(dir / "packets_controlled.csv", [&](const fs::path& p) {
    control::write_packet_log(exp.controlled, spec.stage_count(), p);
  });
  write_output(dir / "delays_baseline.txt", [&](const fs::path& p) { write_delay_series(p, exp.baseline); });
  write_output(dir / "delays_controlled.txt",
               [&](const fs::path& p) { write_delay_series(p, exp.controlled); });
  std::cout << j.dump(2) << "\n";
  return kOk;
}

struct EvaluateArgs {
  PredictorFlags predictor;
  std::string data;
  std::string probe_b;
  double eps = 0.05;
  double pcl = 0.95;
  int radius = 0;
  std::string out;
  std::size_t plot_points = 500;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto predictor = a.predictor.make();
  const auto records = load_dataset(a.data);
  if (records.empty()) throw CliError(kMalformedInput, "--data: dataset has no rows");
  if (records.front().b.size() != predictor.input_dim) {
    throw CliError(kDimensionMismatch, "dataset has " + std::to_string(records.front().b.size()) +
                                           " stages, predictor expects " +
                                           std::to_string(predictor.input_dim));
  }
  std::vector<GaussianMixture> preds;
  std::vector<double> delays;
  preds.reserve(records.size());
  double mean = 0.0;
  for (const auto& r : records) {
    preds.push_back(predictor.predict(r.b));
    delays.push_back(r.delay);
    mean += r.delay / static_cast<double>(records.size());
  }
  eval::HoldoutMetrics m;
  try {
    m = eval::evaluate_predictions(preds, delays, a.eps, a.eps, a.pcl, mean);
  } catch (const std::invalid_argument& e) {
    throw CliError(kUsage, e.what());
  }
  nlohmann::json report;
  report["holdout"] = eval::to_json(m);

  const fs::path out = output_path(a.out, "evaluation.json");
  const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
  const std::size_t shown = std::min(a.plot_points, records.size());
  std::vector<double> idx(shown), d(shown), mm(shown), lb(shown), ub(shown);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto bd = delay_bounds(preds[i], a.eps, a.eps, a.pcl);
    idx[i] = static_cast<double>(i);
    d[i] = delays[i];
    mm[i] = bd.mmse;
    lb[i] = bd.d_lb;
    ub[i] = bd.d_ub;
  }
  write_output(dir / "eval_delay.txt", [&](const fs::path& p) { eval::write_series(p, "index", "delay", idx, d); });
  write_output(dir / "eval_mmse.txt", [&](const fs::path& p) { eval::write_series(p, "index", "mmse", idx, mm); });
  write_output(dir / "eval_d_lb.txt", [&](const fs::path& p) { eval::write_series(p, "index", "d_lb", idx, lb); });
  write_output(dir / "eval_d_ub.txt", [&](const fs::path& p) { eval::write_series(p, "index", "d_ub", idx, ub); });

  if (!a.probe_b.empty()) {
    const auto probe = parse_queue_vector(a.probe_b, "--probe-b");
    if (probe.size() != predictor.input_dim) {
      throw CliError(kDimensionMismatch, "--probe-b has " + std::to_string(probe.size()) +
                                             " entries, predictor expects " +
                                             std::to_string(predictor.input_dim));
    }
    eval::DistributionMatch match;
    try {
      const int radius = eval::widen_radius(records, probe, eval::kMinMatchedRecords, a.radius);
      match = eval::conditional_distribution_match(predictor.predict, records, probe, radius);
    } catch (const std::exception& e) {
      throw CliError(kMalformedInput, std::string("--probe-b: ") + e.what());
    }
    report["probe"] = eval::to_json(match);
    report["probe"]["b"] = probe;
    const auto mix = predictor.predict(probe);
    const auto [xs, ys] = eval::pdf_series(mix);
    write_output(dir / "probe_predicted_pdf.txt",
                 [&](const fs::path& p) { eval::write_series(p, "delay", "density", xs, ys); });
    // Empirical density of the matched delays as a histogram over the same grid.
    const std::size_t bins = 60;
    const double lo = xs.front(), hi = xs.back(), w = (hi - lo) / bins;
    std::vector<double> centers(bins), density(bins, 0.0);
    for (std::size_t k = 0; k < bins; ++k) centers[k] = lo + (k + 0.5) * w;
    for (double v : match.matched_delays) {
      if (v < lo || v >= hi) continue;
      density[static_cast<std::size_t>((v - lo) / w)] += 1.0 / (match.matched_delays.size() * w);
    }
    write_output(dir / "probe_empirical_pdf.txt",
                 [&](const fs::path& p) { eval::write_series(p, "delay", "density", centers, density); });
  }
  write_text(out, report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional end-to-end delay prediction for service function chains"};
  app.require_subcommand(1);
  app.footer(std::string("Outputs without an explicit path go to $") + kOutDirEnv +
             " (default: current directory).");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate a network and write a delay dataset");
  c_sim->add_option("--topology", sim.topology, "Preset name or network config file")->capture_default_str();
  c_sim->add_option("--packets", sim.packets, "Customers to simulate, warmup included")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  c_sim->add_option("--warmup", sim.warmup, "Discarded leading customers (default: packets/10)");
  c_sim->add_option("--seed", sim.seed)->capture_default_str();
  c_sim->add_option("--out", sim.out, "Dataset file (default: <topology>.csv)");
  c_sim->add_option("--deadline", sim.deadline, "Deadline for the summary line")->capture_default_str();
  c_sim->add_option("--acyclic1-p", sim.acyclic1_p, "Upper-branch probability of acyclic1")
      ->capture_default_str();

  TrainArgs tr;
  auto* c_tr = app.add_subcommand("train", "Train a mixture density network on a dataset");
  c_tr->add_option("--data", tr.data, "Dataset written by simulate")->required();
  c_tr->add_option("--hidden", tr.hidden, "Hidden layer widths")->capture_default_str();
  c_tr->add_option("--kernels", tr.kernels)->capture_default_str();
  c_tr->add_option("--epochs", tr.config.epochs)->capture_default_str();
  c_tr->add_option("--batch", tr.config.batch_size)->capture_default_str();
  c_tr->add_option("--lr", tr.config.learning_rate)->capture_default_str();
  c_tr->add_option("--seed", tr.config.seed)->capture_default_str();
  c_tr->add_option("--holdout", tr.config.holdout_fraction, "Held-out fraction")->capture_default_str();
  c_tr->add_option("--out-model", tr.out_model, "Model file (default: model.txt)");
  c_tr->add_option("--loss-trace", tr.loss_trace, "Loss trace file (default: <model>.loss.txt)");
  c_tr->add_flag("--verbose", tr.verbose, "Report progress on stderr");

  PredictArgs pr;
  auto* c_pr = app.add_subcommand("predict", "Predict the delay mixture for a queue vector");
  pr.predictor.add(c_pr);
  c_pr->add_option("--b", pr.b, "Queue lengths on entry, e.g. 6,12,13")->required();
  c_pr->add_option("--plot-out", pr.plot_out, "PDF plot data (default: predict_pdf.txt)");
  c_pr->add_flag("--json", pr.json, "Print the mixture as JSON");

  BoundsArgs bo;
  auto* c_bo = app.add_subcommand("bounds", "Probabilistic delay bounds and confidence interval");
  bo.predictor.add(c_bo);
  c_bo->add_option("--b", bo.b, "Queue lengths on entry")->required();
  c_bo->add_option("--eps", bo.eps, "Violation probability for both bounds")->capture_default_str();
  c_bo->add_option("--eps-lb", bo.eps_lb, "Lower-bound violation probability");
  c_bo->add_option("--eps-ub", bo.eps_ub, "Upper-bound violation probability");
  c_bo->add_option("--pcl", bo.pcl, "Confidence level")->capture_default_str();
  c_bo->add_flag("--json", bo.json, "Print JSON");

  AdmissionArgs ad;
  auto* c_ad = app.add_subcommand("admission", "Baseline versus admission-controlled throughput");
  ad.predictor.add(c_ad, false);
  c_ad->add_option("--deadline", ad.deadline)->capture_default_str();
  c_ad->add_option("--threshold", ad.threshold, "Drop when P(D > deadline) >= threshold")
      ->capture_default_str();
  c_ad->add_option("--packets", ad.packets)->check(CLI::PositiveNumber)->capture_default_str();
  c_ad->add_option("--warmup", ad.warmup, "Discarded leading customers (default: packets/10)");
  c_ad->add_option("--seed", ad.seed)->capture_default_str();
  c_ad->add_option("--out-dir", ad.out_dir, "Directory for the report and packet logs");

  EvaluateArgs ev;
  auto* c_ev = app.add_subcommand("evaluate", "Score predictions against a dataset");
  ev.predictor.add(c_ev);
  c_ev->add_option("--data", ev.data, "Dataset to score")->required();
  c_ev->add_option("--probe-b", ev.probe_b, "Queue vector for a conditional distribution check");
  c_ev->add_option("--eps", ev.eps)->capture_default_str();
  c_ev->add_option("--pcl", ev.pcl)->capture_default_str();
  c_ev->add_option("--radius", ev.radius, "Starting L1 match radius for --probe-b")->capture_default_str();
  c_ev->add_option("--out", ev.out, "Report file (default: evaluation.json)");
  c_ev->add_option("--plot-points", ev.plot_points, "Records written to the per-packet plot data")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim);
    if (c_tr->parsed()) return run_train(tr);
    if (c_pr->parsed()) return run_predict(pr);
    if (c_bo->parsed()) return run_bounds(bo);
    if (c_ad->parsed()) return run_admission(ad);
    if (c_ev->parsed()) return run_evaluate(ev);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}
