#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace sfcdelay::netsim {

using Rng = std::mt19937_64;

// ---------------------------------------------------------------------------
// Network description

enum class ServiceFamily { Exponential, Gamma };

struct ServiceModel {
  ServiceFamily family = ServiceFamily::Exponential;
  double mean = 1.0;  // 1/mu
  double scv = 1.0;   // forced to 1 for Exponential

  double variance() const { return scv * mean * mean; }
  double sample(Rng& rng) const;
};

struct StageSpec {
  int servers = 1;
  ServiceModel service;

  double rate() const { return 1.0 / service.mean; }
  double capacity() const { return servers / service.mean; }
};

struct RoutingEdge {
  int from = 0;
  int to = 0;
  double probability = 1.0;
};

/// A source-to-sink walk together with the branch probabilities taken.
struct Path {
  std::vector<int> stages;
  std::vector<double> edge_probabilities;  // size stages.size() - 1
  double probability = 1.0;
};

class RoutingDag {
 public:
  RoutingDag() = default;
  RoutingDag(int node_count, std::vector<RoutingEdge> edges, int source = 0);

  static RoutingDag chain(int node_count);

  int node_count() const { return node_count_; }
  int source() const { return source_; }
  const std::vector<RoutingEdge>& edges() const { return edges_; }
  const std::vector<int>& sinks() const { return sinks_; }
  std::span<const RoutingEdge> successors(int node) const;
  bool is_sink(int node) const;

  /// All source-to-sink paths in depth-first order; index is the path id.
  const std::vector<Path>& paths() const { return paths_; }
  /// Path id of an exact stage sequence, or -1.
  int path_id(std::span<const int> stages) const;

 private:
  int node_count_ = 0;
  int source_ = 0;
  std::vector<RoutingEdge> edges_;  // sorted by (from, input order)
  std::vector<std::size_t> first_edge_;
  std::vector<int> sinks_;
  std::vector<Path> paths_;
};

struct GammaRenewal {
  double rate = 1.0;
  double scv = 1.0;
};

/// Sinusoidal-rate Poisson process: rate(t) = mean_rate * (1 + amplitude * sin(2 pi t / period)).
struct Nhpp {
  double mean_rate = 1.0;
  double amplitude = 0.0;
  double period = 1.0;

  double rate_at(double t) const;
};

/// On/off Markov-modulated Poisson process. The modulating chain steps once
/// per unit of time; the off state emits nothing.
struct Mmpp {
  double mean_rate = 1.0;
  double p_on_to_off = 0.5;
  double p_off_to_on = 0.5;

  double stationary_on() const { return p_off_to_on / (p_on_to_off + p_off_to_on); }
  double on_rate() const { return mean_rate / stationary_on(); }
};

using ArrivalModel = std::variant<GammaRenewal, Nhpp, Mmpp>;

double mean_arrival_rate(const ArrivalModel& model);
std::string describe(const ArrivalModel& model);

struct NetworkSpec {
  std::string name;
  std::vector<StageSpec> stages;
  RoutingDag routing;
  ArrivalModel arrivals = GammaRenewal{};

  std::size_t stage_count() const { return stages.size(); }

  /// Throws std::invalid_argument naming the violated invariant. Returns
  /// non-fatal warnings (e.g. ingress capacity not normalized to 1).
  std::vector<std::string> validate() const;
};

// ---------------------------------------------------------------------------
// Topology catalog and config files

std::vector<std::string> preset_names();

/// Preset name ("tandem1", "tandem2", "acyclic1", "acyclic2") or a path to a
/// YAML network config. `acyclic1_branch` is the probability of the upper
/// branch of Acyclic I.
NetworkSpec build_topology(const std::string& name_or_path, double acyclic1_branch = 2.0 / 3.0);

NetworkSpec load_network_config(const std::filesystem::path& path);
NetworkSpec parse_network_config(const std::string& yaml_text);
std::string to_config_yaml(const NetworkSpec& spec);

// ---------------------------------------------------------------------------
// Arrivals

/// Stateful arrival generator. Only the MMPP variant carries state (the
/// modulating chain); it is initialized from the chain's stationary law.
class ArrivalProcess {
 public:
  ArrivalProcess(ArrivalModel model, Rng& rng);

  /// Gap from `now` to the next arrival.
  double next_gap(double now, Rng& rng);

  const ArrivalModel& model() const { return model_; }

 private:
  ArrivalModel model_;
  bool on_ = true;
  double next_step_ = 1.0;
};

double sample_interarrival(ArrivalProcess& process, double now, Rng& rng);

// ---------------------------------------------------------------------------
// Simulation

struct CustomerRecord {
  std::uint64_t id = 0;
  double arrival_time = 0.0;
  std::vector<int> b;  // waiting (not in service) at every stage on entry
  int path_id = -1;
  std::vector<int> path;
  std::vector<double> stage_sojourns;
  double delay = 0.0;

  bool operator==(const CustomerRecord&) const = default;
};

struct SimulationOptions {
  std::uint64_t horizon = 100000;  // total customers offered
  std::uint64_t warmup = 10000;    // leading customers not recorded
  std::uint64_t seed = 1;
  std::size_t queue_cap = 1000000;

  static SimulationOptions with_default_warmup(std::uint64_t horizon, std::uint64_t seed);
};

/// Called once per offered customer with its queue-length vector; returning
/// false drops the customer at the ingress.
using AdmissionGate = std::function<bool(std::uint64_t id, std::span<const int> b)>;

struct StageStats {
  std::uint64_t arrivals = 0;
  std::uint64_t departures = 0;
  double busy_time = 0.0;
  double utilization = 0.0;
  std::size_t max_waiting = 0;
};

struct SimulationRun {
  std::vector<CustomerRecord> records;  // all post-warmup offered customers, by id
  std::vector<bool> admitted;           // parallel to records
  std::vector<StageStats> stages;
  double end_time = 0.0;
};

/// Raised by the runaway-queue watchdog.
class QueueOverflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Receives each post-warmup record as it completes (or is dropped). When a
/// sink is supplied, SimulationRun::records stays empty.
using RecordSink = std::function<void(const CustomerRecord&, bool admitted)>;

SimulationRun simulate(const NetworkSpec& spec, const SimulationOptions& options,
                       const AdmissionGate& gate = {}, const RecordSink& sink = {});

/// Admitted post-warmup customers only.
std::vector<CustomerRecord> run_simulation(const NetworkSpec& spec, std::uint64_t horizon,
                                           std::uint64_t warmup, std::uint64_t seed);

/// Independent replications, one per seed, run concurrently. Keyed by seed;
/// each record list ordered by id.
std::map<std::uint64_t, std::vector<CustomerRecord>> run_replications(
    const NetworkSpec& spec, const SimulationOptions& options,
    std::span<const std::uint64_t> seeds);

/// Explicit customer for trace-driven runs (tests, replay).
struct TracedCustomer {
  double arrival_time = 0.0;
  std::vector<int> path;
  std::vector<double> services;  // one per path stage
};

/// Observer hooks used by invariant tests.
struct TraceObserver {
  std::function<void(int stage, std::uint64_t id, double t)> on_enqueue;
  std::function<void(int stage, std::uint64_t id, double t)> on_service_start;
  std::function<void(int stage, std::uint64_t id, double t)> on_departure;
};

SimulationRun simulate_trace(const NetworkSpec& spec, std::span<const TracedCustomer> customers,
                             const TraceObserver& observer = {});

SimulationRun simulate_observed(const NetworkSpec& spec, const SimulationOptions& options,
                                const TraceObserver& observer);

// ---------------------------------------------------------------------------
// Dataset files

/// Columns: id, arrival_time, b_1..b_N, path_id, delay, path, sojourns.
/// `path` and `sojourns` are '-' and ';' separated lists.
void write_dataset(std::span<const CustomerRecord> records, std::size_t stage_count,
                   const std::filesystem::path& path);
std::vector<CustomerRecord> read_dataset(const std::filesystem::path& path);

std::string dataset_header(std::size_t stage_count);
std::string dataset_row(const CustomerRecord& r);

}  // namespace sfcdelay::netsim
