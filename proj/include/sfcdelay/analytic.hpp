#pragma once

#include <span>
#include <vector>

#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

// Heavy-traffic approximation of the end-to-end delay given the queue
// lengths seen on entry: seen-queue propagation, conditional moments, the
// SCV bound and the path-weighted Gaussian mixture.
namespace sfcdelay::analytic {

/// One stage of a path as the approximation sees it.
struct PathStage {
  int servers = 1;
  double service_mean = 1.0;
  double service_variance = 1.0;
  /// Probability of the edge leading into this stage from its predecessor on
  /// the path (1 for the first stage and for tandem links).
  double inflow_probability = 1.0;
  /// Customers per unit time fed into this stage by predecessors that are
  /// not on the path (merge points of an acyclic network), assuming their
  /// servers stay busy. Zero on tandem paths.
  double merge_inflow_rate = 0.0;

  double rate() const { return 1.0 / service_mean; }
};

struct SeenQueueVector {
  std::vector<int> q;
};

struct DelayMoments {
  double mean = 0.0;
  double variance = 0.0;
};

struct ScvBound {
  double scv = 0.0;
  /// (Q b1 + N b2) / (Q b3 + N b4)^2; always >= scv.
  double bound = 0.0;
  /// (Q b1 + b2) / (Q b3 + b4)^2; equals `bound` for one stage, may fall
  /// below `scv` for longer paths.
  double printed_bound = 0.0;
  double total_occupancy = 0.0;  // Q = sum (q_n + 1)
};

std::vector<PathStage> path_stages(const netsim::NetworkSpec& spec, const netsim::Path& path);

/// Restriction of a full-network queue vector to the stages of a path.
std::vector<int> restrict_to_path(std::span<const int> b, const netsim::Path& path);

/// Queue lengths the tagged customer meets at each stage of the path,
/// estimated from the occupancies `b` observed on entry.
SeenQueueVector propagate_queue_lengths(std::span<const PathStage> stages, std::span<const int> b);

DelayMoments delay_moments(std::span<const int> q, std::span<const PathStage> stages);

ScvBound scv_bound(std::span<const int> q, std::span<const PathStage> stages);

/// One component per source-to-sink path, weighted by the path probability.
GaussianMixture gmm_approximation(const netsim::NetworkSpec& spec, std::span<const int> b);

}  // namespace sfcdelay::analytic
