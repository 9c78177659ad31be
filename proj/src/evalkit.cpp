#include "sfcdelay/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sfcdelay::eval {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

int l1_distance(std::span<const int> a, std::span<const int> b) {
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

}  // namespace

double mse(std::span<const double> predictions, std::span<const double> truths) {
  require_same_length(predictions.size(), truths.size(), "mse");
  if (predictions.empty()) throw std::invalid_argument("mse: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = truths[i] - predictions[i];
    s += e * e;
  }
  return s / static_cast<double>(predictions.size());
}

ViolationRates violation_rates(std::span<const DelayBounds> bounds, std::span<const double> delays) {
  require_same_length(bounds.size(), delays.size(), "violation_rates");
  ViolationRates r;
  if (delays.empty()) return r;
  std::size_t up = 0, low = 0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    up += delays[i] > bounds[i].d_ub;
    low += delays[i] < bounds[i].d_lb;
  }
  r.upper = static_cast<double>(up) / static_cast<double>(delays.size());
  r.lower = static_cast<double>(low) / static_cast<double>(delays.size());
  return r;
}

double ci_coverage(std::span<const double> mmse, std::span<const double> half_widths,
                   std::span<const double> delays) {
  require_same_length(mmse.size(), delays.size(), "ci_coverage");
  require_same_length(half_widths.size(), delays.size(), "ci_coverage");
  if (delays.empty()) return 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    inside += std::abs(delays[i] - mmse[i]) < half_widths[i];
  }
  return static_cast<double>(inside) / static_cast<double>(delays.size());
}

double ks_distance(const GaussianMixture& mix, std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("ks_distance: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = mix.cdf(samples[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n),
                  std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

std::vector<const netsim::CustomerRecord*> match_records(
    std::span<const netsim::CustomerRecord> records, std::span<const int> probe, int radius) {
  std::vector<const netsim::CustomerRecord*> out;
  for (const auto& r : records) {
    require_same_length(r.b.size(), probe.size(), "match_records");
    if (l1_distance(r.b, probe) <= radius) out.push_back(&r);
  }
  return out;
}

int widen_radius(std::span<const netsim::CustomerRecord> records, std::span<const int> probe,
                 std::size_t min_matches, int start) {
  if (records.size() < min_matches) {
    throw std::invalid_argument("widen_radius: only " + std::to_string(records.size()) +
                                " records available, " + std::to_string(min_matches) + " needed");
  }
  std::vector<int> dist;
  dist.reserve(records.size());
  for (const auto& r : records) {
    require_same_length(r.b.size(), probe.size(), "widen_radius");
    dist.push_back(l1_distance(r.b, probe));
  }
  std::nth_element(dist.begin(), dist.begin() + (min_matches - 1), dist.end());
  return std::max(start, dist[min_matches - 1]);
}

DistributionMatch conditional_distribution_match(
    const std::function<GaussianMixture(std::span<const int>)>& predictor,
    std::span<const netsim::CustomerRecord> records, std::span<const int> probe, int radius) {
  const auto matched = match_records(records, probe, radius);
  if (matched.size() < kMinMatchedRecords) {
    throw std::runtime_error("conditional_distribution_match: only " +
                             std::to_string(matched.size()) + " records within L1 radius " +
                             std::to_string(radius) + " of the probe (need " +
                             std::to_string(kMinMatchedRecords) + ")");
  }
  DistributionMatch m;
  m.radius = radius;
  m.matched = matched.size();
  for (const auto* r : matched) m.matched_delays.push_back(r->delay);
  double s = 0.0;
  for (double d : m.matched_delays) s += d;
  m.empirical_mean = s / static_cast<double>(m.matched);
  const GaussianMixture mix = predictor(probe);
  m.predicted_mean = mix.mean();
  m.ks = ks_distance(mix, m.matched_delays);
  return m;
}

HoldoutMetrics evaluate_predictions(std::span<const GaussianMixture> predictions,
                                    std::span<const double> delays, double eps_lb, double eps_ub,
                                    double p_cl, double unconditional_mean) {
  require_same_length(predictions.size(), delays.size(), "evaluate_predictions");
  if (delays.empty()) throw std::invalid_argument("evaluate_predictions: no records");
  HoldoutMetrics m;
  m.count = delays.size();
  m.eps_lb = eps_lb;
  m.eps_ub = eps_ub;
  m.p_cl = p_cl;
  std::vector<DelayBounds> bounds;
  std::vector<double> means, widths;
  double nll = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    bounds.push_back(delay_bounds(predictions[i], eps_lb, eps_ub, p_cl));
    means.push_back(bounds.back().mmse);
    widths.push_back(bounds.back().ci_half_width);
    nll -= predictions[i].log_pdf(delays[i]);
  }
  m.violations = violation_rates(bounds, delays);
  m.coverage = ci_coverage(means, widths, delays);
  m.mse_mmse = mse(means, delays);
  const std::vector<double> constant(delays.size(), unconditional_mean);
  m.mse_unconditional = mse(constant, delays);
  m.mean_nll = nll / static_cast<double>(delays.size());
  return m;
}

nlohmann::json to_json(const HoldoutMetrics& m) {
  return {{"count", m.count},
          {"eps_lb", m.eps_lb},
          {"eps_ub", m.eps_ub},
          {"p_cl", m.p_cl},
          {"violation_rate_ub", m.violations.upper},
          {"violation_rate_lb", m.violations.lower},
          {"ci_coverage", m.coverage},
          {"mse_mmse", m.mse_mmse},
          {"mse_unconditional_mean", m.mse_unconditional},
          {"mean_nll", m.mean_nll}};
}

nlohmann::json to_json(const DistributionMatch& m) {
  return {{"ks", m.ks},
          {"matched", m.matched},
          {"radius", m.radius},
          {"empirical_mean", m.empirical_mean},
          {"predicted_mean", m.predicted_mean}};
}

void write_series(const std::filesystem::path& path, const std::string& x_name,
                  const std::string& y_name, std::span<const double> xs, std::span<const double> ys) {
  require_same_length(xs.size(), ys.size(), "write_series");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(10);
  out << "# " << x_name << ' ' << y_name << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) out << xs[i] << ' ' << ys[i] << '\n';
}

std::pair<std::vector<double>, std::vector<double>> pdf_series(const GaussianMixture& mix,
                                                                std::size_t points) {
  // Grid spans +-5 sigma around every component.
  double lo = mix.components()[0].mean, hi = lo;
  for (const auto& c : mix.components()) {
    const double s = std::sqrt(c.variance);
    lo = std::min(lo, c.mean - 5.0 * s);
    hi = std::max(hi, c.mean + 5.0 * s);
  }
  std::vector<double> xs(points), ys(points);
  for (std::size_t i = 0; i < points; ++i) {
    xs[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    ys[i] = mix.pdf(xs[i]);
  }
  return {xs, ys};
}

}  // namespace sfcdelay::eval
