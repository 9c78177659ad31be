#include "sfcdelay/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sfcdelay::analytic {

namespace {

void check_lengths(std::size_t q, std::size_t stages) {
  if (q != stages) {
    throw std::invalid_argument("queue vector has " + std::to_string(q) + " entries for a " +
                                std::to_string(stages) + "-stage path");
  }
}

// Expected sojourn at a stage entered behind `q` waiting customers.
double expected_sojourn(const PathStage& s, int q) {
  return (q + 1.0) / (s.servers * s.rate()) + s.service_mean;
}

// Floor of an expected customer count. Counts that are integers in exact
// arithmetic often land a few ulps below in floating point.
long count_floor(double x) {
  return static_cast<long>(std::floor(x + 1e-9 * std::max(1.0, std::abs(x))));
}

long departures(const PathStage& s, double horizon) {
  return count_floor(s.servers * s.rate() * horizon);
}

long merge_arrivals(const PathStage& s, double horizon) {
  return count_floor(s.merge_inflow_rate * horizon);
}

}  // namespace

std::vector<PathStage> path_stages(const netsim::NetworkSpec& spec, const netsim::Path& path) {
  std::vector<PathStage> out;
  out.reserve(path.stages.size());
  for (std::size_t i = 0; i < path.stages.size(); ++i) {
    const auto& st = spec.stages.at(path.stages[i]);
    PathStage p;
    p.servers = st.servers;
    p.service_mean = st.service.mean;
    p.service_variance = st.service.variance();
    p.inflow_probability = i == 0 ? 1.0 : path.edge_probabilities.at(i - 1);
    const int on_path_pred = i == 0 ? -1 : path.stages[i - 1];
    for (const auto& e : spec.routing.edges()) {
      if (e.to == path.stages[i] && e.from != on_path_pred) {
        p.merge_inflow_rate += e.probability * spec.stages[e.from].capacity();
      }
    }
    out.push_back(p);
  }
  return out;
}

std::vector<int> restrict_to_path(std::span<const int> b, const netsim::Path& path) {
  std::vector<int> out;
  out.reserve(path.stages.size());
  for (int s : path.stages) out.push_back(b[s]);
  return out;
}

SeenQueueVector propagate_queue_lengths(std::span<const PathStage> stages, std::span<const int> b) {
  check_lengths(b.size(), stages.size());
  for (int v : b) {
    if (v < 0) throw std::invalid_argument("queue lengths must be nonnegative");
  }
  // work[n] holds b_n^{tau-1}; entries before the customer's position are final (q).
  std::vector<long> work(b.begin(), b.end());
  const std::size_t n_stages = stages.size();
  for (std::size_t tau = 0; tau + 1 < n_stages; ++tau) {
    const auto& here = stages[tau];
    const double sojourn = expected_sojourn(here, static_cast<int>(work[tau]));

    // Everyone ahead at the stage being left (waiting plus in service) moves on.
    const auto& next = stages[tau + 1];
    const long inflow = count_floor(next.inflow_probability * (work[tau] + here.servers));
    work[tau + 1] = std::max(
        0L, work[tau + 1] + inflow + merge_arrivals(next, sojourn) - departures(next, sojourn));

    for (std::size_t n = tau + 2; n < n_stages; ++n) {
      const long upstream = count_floor(stages[n].inflow_probability * stages[n - 1].servers *
                                        stages[n - 1].rate() * sojourn);
      work[n] = std::max(0L, work[n] + upstream + merge_arrivals(stages[n], sojourn) -
                                 departures(stages[n], sojourn));
    }
  }
  SeenQueueVector out;
  out.q.assign(work.begin(), work.end());
  return out;
}

DelayMoments delay_moments(std::span<const int> q, std::span<const PathStage> stages) {
  check_lengths(q.size(), stages.size());
  DelayMoments m;
  for (std::size_t n = 0; n < q.size(); ++n) {
    const auto& s = stages[n];
    if (!(s.service_mean > 0.0) || s.service_variance < 0.0 || s.servers < 1) {
      throw std::invalid_argument("stage " + std::to_string(n) + ": invalid service moments");
    }
    const double c = s.servers;
    m.mean += ((q[n] + 1.0) / c + 1.0) * s.service_mean;
    m.variance += ((q[n] + 1.0) / (c * c) + 1.0) * s.service_variance;
  }
  return m;
}

ScvBound scv_bound(std::span<const int> q, std::span<const PathStage> stages) {
  const DelayMoments m = delay_moments(q, stages);
  double beta1 = 0.0, beta2 = 0.0;
  double beta3 = stages[0].service_mean / stages[0].servers;
  double beta4 = stages[0].service_mean;
  double occupancy = 0.0;
  for (std::size_t n = 0; n < stages.size(); ++n) {
    const auto& s = stages[n];
    const double c = s.servers;
    beta1 = std::max(beta1, s.service_variance / (c * c));
    beta2 = std::max(beta2, s.service_variance);
    beta3 = std::min(beta3, s.service_mean / c);
    beta4 = std::min(beta4, s.service_mean);
    occupancy += q[n] + 1.0;
  }
  const double n_stages = static_cast<double>(stages.size());
  ScvBound out;
  out.total_occupancy = occupancy;
  out.scv = m.variance / (m.mean * m.mean);
  const double lower_mean = occupancy * beta3 + n_stages * beta4;
  out.bound = (occupancy * beta1 + n_stages * beta2) / (lower_mean * lower_mean);
  const double printed_mean = occupancy * beta3 + beta4;
  out.printed_bound = (occupancy * beta1 + beta2) / (printed_mean * printed_mean);
  return out;
}

GaussianMixture gmm_approximation(const netsim::NetworkSpec& spec, std::span<const int> b) {
  if (b.size() != spec.stage_count()) {
    throw std::invalid_argument("queue vector has " + std::to_string(b.size()) +
                                " entries, network has " + std::to_string(spec.stage_count()) +
                                " stages");
  }
  std::vector<MixtureComponent> comps;
  double total = 0.0;
  for (const auto& path : spec.routing.paths()) {
    const auto stages = path_stages(spec, path);
    const auto seen = propagate_queue_lengths(stages, restrict_to_path(b, path));
    const auto m = delay_moments(seen.q, stages);
    comps.push_back({path.probability, m.mean, m.variance});
    total += path.probability;
  }
  for (auto& c : comps) c.weight /= total;
  return GaussianMixture(std::move(comps));
}

}  // namespace sfcdelay::analytic
