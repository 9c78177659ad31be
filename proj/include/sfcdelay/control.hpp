#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sfcdelay/mdn.hpp"
#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

namespace sfcdelay::control {

/// Maps an entry queue-length vector to a predicted delay distribution.
struct Predictor {
  std::function<GaussianMixture(std::span<const int>)> predict;
  std::size_t input_dim = 0;

  static Predictor from_model(const mdn::MdnModel& model);
  static Predictor from_analytic(const netsim::NetworkSpec& spec);
};

struct AdmissionPolicy {
  double deadline = 80.0;
  /// Drop when P(D > deadline) >= threshold. A threshold of 1 disables dropping.
  double drop_threshold = 0.95;
  Predictor predictor;

  void validate() const;
};

enum class Decision { Admit, Drop };

struct AdmissionDecision {
  Decision decision = Decision::Admit;
  double miss_probability = 0.0;
};

AdmissionDecision admit(const AdmissionPolicy& policy, std::span<const int> b);

struct PacketLogEntry {
  netsim::CustomerRecord record;  // delay is 0 and sojourns empty when dropped
  Decision decision = Decision::Admit;
  double miss_probability = 0.0;  // NaN when no predictor was consulted
};

struct ThroughputReport {
  std::uint64_t offered = 0;
  std::uint64_t admitted = 0;
  std::uint64_t dropped = 0;
  std::uint64_t delivered_in_deadline = 0;
  double throughput = 0.0;  // delivered_in_deadline / offered
  std::vector<PacketLogEntry> log;
};

struct AdmissionExperiment {
  ThroughputReport baseline;
  ThroughputReport controlled;
};

/// Runs the same arrival stream twice: once admitting everything and once
/// gated by `policy`. Warmup customers are excluded from both reports.
AdmissionExperiment run_admission_experiment(const netsim::NetworkSpec& spec,
                                             const AdmissionPolicy& policy,
                                             const netsim::SimulationOptions& options);

ThroughputReport run_policy(const netsim::NetworkSpec& spec, const AdmissionPolicy* policy,
                            double deadline, const netsim::SimulationOptions& options);

nlohmann::json summary_json(const ThroughputReport& report);
nlohmann::json to_json(const AdmissionExperiment& experiment, const AdmissionPolicy& policy);

/// Dataset columns plus `decision` and `p_miss`; dropped rows leave delay,
/// path and sojourns empty.
void write_packet_log(const ThroughputReport& report, std::size_t stage_count,
                      const std::filesystem::path& path);

}  // namespace sfcdelay::control
