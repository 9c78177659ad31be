#include <algorithm>
#include <deque>
#include <future>
#include <optional>
#include <queue>
#include <sstream>

#include "sfcdelay/netsim.hpp"

namespace sfcdelay::netsim {

namespace {

struct Departure {
  double time;
  std::uint64_t seq;
  int stage;
  std::size_t slot;

  bool operator>(const Departure& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

struct ActiveCustomer {
  CustomerRecord record;
  std::vector<double> services;
  std::size_t hop = 0;
  double stage_entry = 0.0;
};

struct StageState {
  int busy = 0;
  std::deque<std::size_t> waiting;
};

class Engine {
 public:
  Engine(const NetworkSpec& spec, std::size_t queue_cap, std::uint64_t warmup,
         std::uint64_t total, const TraceObserver& observer, const AdmissionGate& gate,
         const RecordSink& sink)
      : spec_(spec),
        queue_cap_(queue_cap),
        warmup_(warmup),
        observer_(observer),
        gate_(gate),
        sink_(sink),
        stages_(spec.stage_count()) {
    run_.stages.resize(spec.stage_count());
    if (!sink_ && total > warmup_) {
      run_.records.resize(total - warmup_);
      run_.admitted.resize(total - warmup_, false);
    }
  }

  // `next` yields customers in nondecreasing arrival order.
  template <typename Source>
  SimulationRun run(Source&& next) {
    std::optional<TracedCustomer> pending = next();
    std::uint64_t id = 0;
    while (pending || !departures_.empty()) {
      const bool take_arrival =
          pending && (departures_.empty() || pending->arrival_time < departures_.top().time);
      if (take_arrival) {
        now_ = pending->arrival_time;
        offer(id++, std::move(*pending));
        pending = next();
      } else {
        const Departure d = departures_.top();
        departures_.pop();
        now_ = d.time;
        depart(d);
      }
    }
    run_.end_time = now_;
    for (std::size_t n = 0; n < stages_.size(); ++n) {
      auto& st = run_.stages[n];
      st.utilization = now_ > 0.0 ? st.busy_time / (spec_.stages[n].servers * now_) : 0.0;
    }
    return std::move(run_);
  }

 private:
  void offer(std::uint64_t id, TracedCustomer c) {
    CustomerRecord rec;
    rec.id = id;
    rec.arrival_time = c.arrival_time;
    rec.b.resize(stages_.size());
    for (std::size_t n = 0; n < stages_.size(); ++n) {
      rec.b[n] = static_cast<int>(stages_[n].waiting.size());
    }
    rec.path_id = spec_.routing.path_id(c.path);
    rec.path = std::move(c.path);

    if (gate_ && !gate_(id, rec.b)) {
      emit(std::move(rec), false);
      return;
    }

    std::size_t slot;
    if (free_.empty()) {
      slot = active_.size();
      active_.emplace_back();
    } else {
      slot = free_.back();
      free_.pop_back();
    }
    auto& a = active_[slot];
    a.record = std::move(rec);
    a.record.stage_sojourns.clear();
    a.record.stage_sojourns.reserve(a.record.path.size());
    a.services = std::move(c.services);
    a.hop = 0;
    enter(slot);
  }

  void enter(std::size_t slot) {
    auto& a = active_[slot];
    const int stage = a.record.path[a.hop];
    a.stage_entry = now_;
    auto& st = stages_[stage];
    ++run_.stages[stage].arrivals;
    if (observer_.on_enqueue) observer_.on_enqueue(stage, a.record.id, now_);
    if (st.busy < spec_.stages[stage].servers) {
      start_service(stage, slot);
    } else {
      st.waiting.push_back(slot);
      auto& stats = run_.stages[stage];
      stats.max_waiting = std::max(stats.max_waiting, st.waiting.size());
      if (st.waiting.size() > queue_cap_) {
        std::ostringstream msg;
        msg << "runaway queue: stage " << stage << " holds " << st.waiting.size()
            << " waiting customers at t=" << now_ << " (cap " << queue_cap_
            << "); check that every stage's capacity exceeds its offered load";
        throw QueueOverflow(msg.str());
      }
    }
  }

  void start_service(int stage, std::size_t slot) {
    auto& a = active_[slot];
    ++stages_[stage].busy;
    const double s = a.services[a.hop];
    run_.stages[stage].busy_time += s;
    if (observer_.on_service_start) observer_.on_service_start(stage, a.record.id, now_);
    departures_.push({now_ + s, seq_++, stage, slot});
  }

  void depart(const Departure& d) {
    auto& st = stages_[d.stage];
    --st.busy;
    ++run_.stages[d.stage].departures;
    if (!st.waiting.empty()) {
      const std::size_t head = st.waiting.front();
      st.waiting.pop_front();
      start_service(d.stage, head);
    }
    auto& a = active_[d.slot];
    if (observer_.on_departure) observer_.on_departure(d.stage, a.record.id, now_);
    a.record.stage_sojourns.push_back(now_ - a.stage_entry);
    if (++a.hop < a.record.path.size()) {
      enter(d.slot);
      return;
    }
    double total = 0.0;
    for (double t : a.record.stage_sojourns) total += t;
    a.record.delay = total;
    emit(std::move(a.record), true);
    free_.push_back(d.slot);
  }

  void emit(CustomerRecord rec, bool admitted) {
    if (rec.id < warmup_) return;
    if (sink_) {
      sink_(rec, admitted);
      return;
    }
    const std::size_t idx = rec.id - warmup_;
    if (idx >= run_.records.size()) {
      run_.records.resize(idx + 1);
      run_.admitted.resize(idx + 1, false);
    }
    run_.admitted[idx] = admitted;
    run_.records[idx] = std::move(rec);
  }

  const NetworkSpec& spec_;
  std::size_t queue_cap_;
  std::uint64_t warmup_;
  const TraceObserver& observer_;
  const AdmissionGate& gate_;
  const RecordSink& sink_;

  std::vector<StageState> stages_;
  std::vector<ActiveCustomer> active_;
  std::vector<std::size_t> free_;
  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> departures_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  SimulationRun run_;
};

// Draws arrival times, paths and service requirements for every offered
// customer from two independent streams, so that gating decisions never shift
// the randomness seen by later customers.
class SpecSource {
 public:
  SpecSource(const NetworkSpec& spec, const SimulationOptions& options)
      : spec_(spec),
        remaining_(options.horizon),
        arrival_rng_(seed_for(options.seed, 1)),
        customer_rng_(seed_for(options.seed, 2)),
        process_(spec.arrivals, arrival_rng_) {
    double acc = 0.0;
    for (const auto& p : spec.routing.paths()) {
      acc += p.probability;
      cumulative_.push_back(acc);
    }
  }

  std::optional<TracedCustomer> operator()() {
    if (remaining_ == 0) return std::nullopt;
    --remaining_;
    now_ += process_.next_gap(now_, arrival_rng_);
    TracedCustomer c;
    c.arrival_time = now_;
    const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(customer_rng_);
    const auto k = std::min<std::size_t>(
        std::upper_bound(cumulative_.begin(), cumulative_.end(), u) - cumulative_.begin(),
        cumulative_.size() - 1);
    c.path = spec_.routing.paths()[k].stages;
    c.services.reserve(c.path.size());
    for (int stage : c.path) c.services.push_back(spec_.stages[stage].service.sample(customer_rng_));
    return c;
  }

 private:
  static Rng seed_for(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
  }

  const NetworkSpec& spec_;
  std::uint64_t remaining_;
  Rng arrival_rng_;
  Rng customer_rng_;
  ArrivalProcess process_;
  std::vector<double> cumulative_;
  double now_ = 0.0;
};

void check_options(const SimulationOptions& options) {
  if (!(options.horizon > options.warmup)) {
    throw std::invalid_argument("simulation: horizon must exceed warmup");
  }
}

}  // namespace

SimulationOptions SimulationOptions::with_default_warmup(std::uint64_t horizon,
                                                         std::uint64_t seed) {
  SimulationOptions o;
  o.horizon = horizon;
  o.warmup = horizon / 10;
  o.seed = seed;
  return o;
}

SimulationRun simulate(const NetworkSpec& spec, const SimulationOptions& options,
                       const AdmissionGate& gate, const RecordSink& sink) {
  spec.validate();
  check_options(options);
  const TraceObserver none;
  Engine engine(spec, options.queue_cap, options.warmup, options.horizon, none, gate, sink);
  return engine.run(SpecSource(spec, options));
}

SimulationRun simulate_observed(const NetworkSpec& spec, const SimulationOptions& options,
                                const TraceObserver& observer) {
  spec.validate();
  check_options(options);
  const AdmissionGate no_gate;
  const RecordSink no_sink;
  Engine engine(spec, options.queue_cap, options.warmup, options.horizon, observer, no_gate,
                no_sink);
  return engine.run(SpecSource(spec, options));
}

std::vector<CustomerRecord> run_simulation(const NetworkSpec& spec, std::uint64_t horizon,
                                           std::uint64_t warmup, std::uint64_t seed) {
  SimulationOptions o;
  o.horizon = horizon;
  o.warmup = warmup;
  o.seed = seed;
  return simulate(spec, o).records;
}

std::map<std::uint64_t, std::vector<CustomerRecord>> run_replications(
    const NetworkSpec& spec, const SimulationOptions& options,
    std::span<const std::uint64_t> seeds) {
  std::vector<std::future<std::vector<CustomerRecord>>> jobs;
  for (auto seed : seeds) {
    SimulationOptions o = options;
    o.seed = seed;
    jobs.push_back(std::async(std::launch::async, [&spec, o] { return simulate(spec, o).records; }));
  }
  std::map<std::uint64_t, std::vector<CustomerRecord>> out;
  for (std::size_t i = 0; i < jobs.size(); ++i) out[seeds[i]] = jobs[i].get();
  return out;
}

SimulationRun simulate_trace(const NetworkSpec& spec, std::span<const TracedCustomer> customers,
                             const TraceObserver& observer) {
  spec.validate();
  for (std::size_t i = 0; i < customers.size(); ++i) {
    const auto& c = customers[i];
    if (spec.routing.path_id(c.path) < 0 || c.services.size() != c.path.size()) {
      throw std::invalid_argument("trace customer " + std::to_string(i) +
                                  ": path is not a source-to-sink walk or services mismatch");
    }
    if (i > 0 && c.arrival_time < customers[i - 1].arrival_time) {
      throw std::invalid_argument("trace: arrival times must be nondecreasing");
    }
  }
  const AdmissionGate no_gate;
  const RecordSink no_sink;
  Engine engine(spec, SimulationOptions{}.queue_cap, 0, customers.size(), observer, no_gate,
                no_sink);
  std::size_t next = 0;
  return engine.run([&]() -> std::optional<TracedCustomer> {
    if (next == customers.size()) return std::nullopt;
    return customers[next++];
  });
}

}  // namespace sfcdelay::netsim
