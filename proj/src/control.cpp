#include "sfcdelay/control.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sfcdelay/analytic.hpp"

namespace sfcdelay::control {

Predictor Predictor::from_model(const mdn::MdnModel& model) {
  // The model is captured by value so the predictor owns its weights.
  return {[model](std::span<const int> b) { return model.forward(b); },
          static_cast<std::size_t>(model.architecture().input_dim)};
}

Predictor Predictor::from_analytic(const netsim::NetworkSpec& spec) {
  return {[spec](std::span<const int> b) { return analytic::gmm_approximation(spec, b); },
          spec.stage_count()};
}

void AdmissionPolicy::validate() const {
  if (!(deadline > 0.0)) throw std::invalid_argument("admission: deadline must be > 0");
  if (!(drop_threshold > 0.0 && drop_threshold <= 1.0)) {
    throw std::invalid_argument("admission: threshold must lie in (0,1]");
  }
  if (!predictor.predict) throw std::invalid_argument("admission: no predictor");
}

AdmissionDecision admit(const AdmissionPolicy& policy, std::span<const int> b) {
  if (b.size() != policy.predictor.input_dim) {
    throw std::invalid_argument("admission: queue vector has " + std::to_string(b.size()) +
                                " entries, predictor expects " +
                                std::to_string(policy.predictor.input_dim));
  }
  const GaussianMixture mix = policy.predictor.predict(b);
  AdmissionDecision d;
  d.miss_probability = 1.0 - mix.cdf(policy.deadline);
  const bool disabled = policy.drop_threshold >= 1.0;
  d.decision = !disabled && d.miss_probability >= policy.drop_threshold ? Decision::Drop
                                                                        : Decision::Admit;
  return d;
}

ThroughputReport run_policy(const netsim::NetworkSpec& spec, const AdmissionPolicy* policy,
                            double deadline, const netsim::SimulationOptions& options) {
  if (policy) policy->validate();
  std::vector<double> miss;  // indexed by id - warmup
  netsim::AdmissionGate gate;
  if (policy) {
    miss.assign(options.horizon - options.warmup, std::numeric_limits<double>::quiet_NaN());
    gate = [&](std::uint64_t id, std::span<const int> b) {
      const auto d = admit(*policy, b);
      if (id >= options.warmup) miss[id - options.warmup] = d.miss_probability;
      return d.decision == Decision::Admit;
    };
  }
  auto run = netsim::simulate(spec, options, gate);

  ThroughputReport report;
  report.log.reserve(run.records.size());
  for (std::size_t i = 0; i < run.records.size(); ++i) {
    PacketLogEntry e;
    e.record = std::move(run.records[i]);
    e.decision = run.admitted[i] ? Decision::Admit : Decision::Drop;
    e.miss_probability = policy ? miss[i] : std::numeric_limits<double>::quiet_NaN();
    ++report.offered;
    if (e.decision == Decision::Admit) {
      ++report.admitted;
      if (e.record.delay <= deadline) ++report.delivered_in_deadline;
    } else {
      ++report.dropped;
    }
    report.log.push_back(std::move(e));
  }
  report.throughput = report.offered ? static_cast<double>(report.delivered_in_deadline) /
                                           static_cast<double>(report.offered)
                                     : 0.0;
  return report;
}

AdmissionExperiment run_admission_experiment(const netsim::NetworkSpec& spec,
                                             const AdmissionPolicy& policy,
                                             const netsim::SimulationOptions& options) {
  policy.validate();
  if (policy.predictor.input_dim != spec.stage_count()) {
    throw std::invalid_argument("admission: predictor expects " +
                                std::to_string(policy.predictor.input_dim) +
                                " queue lengths, network has " +
                                std::to_string(spec.stage_count()) + " stages");
  }
  AdmissionExperiment out;
  out.baseline = run_policy(spec, nullptr, policy.deadline, options);
  out.controlled = run_policy(spec, &policy, policy.deadline, options);
  return out;
}

nlohmann::json summary_json(const ThroughputReport& r) {
  return {{"offered", r.offered},
          {"admitted", r.admitted},
          {"dropped", r.dropped},
          {"delivered_in_deadline", r.delivered_in_deadline},
          {"throughput", r.throughput}};
}

nlohmann::json to_json(const AdmissionExperiment& e, const AdmissionPolicy& policy) {
  return {{"deadline", policy.deadline},
          {"drop_threshold", policy.drop_threshold},
          {"baseline", summary_json(e.baseline)},
          {"controlled", summary_json(e.controlled)}};
}

void write_packet_log(const ThroughputReport& report, std::size_t stage_count,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write packet log " + path.string());
  out.precision(17);
  out << netsim::dataset_header(stage_count) << ",decision,p_miss\n";
  for (const auto& e : report.log) {
    if (e.decision == Decision::Admit) {
      out << netsim::dataset_row(e.record);
    } else {
      const auto& r = e.record;
      out << r.id << ',' << r.arrival_time;
      for (int v : r.b) out << ',' << v;
      out << ',' << r.path_id << ",,,";
    }
    out << ',' << (e.decision == Decision::Admit ? "admit" : "drop") << ',';
    if (!std::isnan(e.miss_probability)) out << e.miss_probability;
    out << '\n';
  }
}

}  // namespace sfcdelay::control
