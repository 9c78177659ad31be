#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sfcdelay/mixture.hpp"
#include "sfcdelay/netsim.hpp"

namespace sfcdelay::eval {

double mse(std::span<const double> predictions, std::span<const double> truths);

struct ViolationRates {
  double upper = 0.0;  // fraction with D > d_ub
  double lower = 0.0;  // fraction with D < d_lb
};

ViolationRates violation_rates(std::span<const DelayBounds> bounds, std::span<const double> delays);

/// Fraction of records with |D - mmse| < x.
double ci_coverage(std::span<const double> mmse, std::span<const double> half_widths,
                   std::span<const double> delays);

/// sup_d |F_mix(d) - F_empirical(d)|.
double ks_distance(const GaussianMixture& mix, std::vector<double> samples);

/// Records whose queue vector lies within L1 distance `radius` of `probe`.
std::vector<const netsim::CustomerRecord*> match_records(
    std::span<const netsim::CustomerRecord> records, std::span<const int> probe, int radius);

/// Smallest radius (starting at `start`) with at least `min_matches` records;
/// throws if even the whole dataset is too small.
int widen_radius(std::span<const netsim::CustomerRecord> records, std::span<const int> probe,
                 std::size_t min_matches = 200, int start = 0);

struct DistributionMatch {
  double ks = 0.0;
  std::size_t matched = 0;
  int radius = 0;
  double empirical_mean = 0.0;
  double predicted_mean = 0.0;
  std::vector<double> matched_delays;
};

inline constexpr std::size_t kMinMatchedRecords = 200;

/// KS distance between the predicted distribution at `probe` and the
/// empirical delays of records matched within `radius`. Throws if fewer than
/// kMinMatchedRecords records match.
DistributionMatch conditional_distribution_match(
    const std::function<GaussianMixture(std::span<const int>)>& predictor,
    std::span<const netsim::CustomerRecord> records, std::span<const int> probe, int radius);

struct HoldoutMetrics {
  std::size_t count = 0;
  double eps_lb = 0.05, eps_ub = 0.05, p_cl = 0.95;
  ViolationRates violations;
  double coverage = 0.0;
  double mse_mmse = 0.0;
  double mse_unconditional = 0.0;  // predictor = training-free sample mean of the delays
  double mean_nll = 0.0;
};

HoldoutMetrics evaluate_predictions(std::span<const GaussianMixture> predictions,
                                    std::span<const double> delays, double eps_lb, double eps_ub,
                                    double p_cl, double unconditional_mean);

nlohmann::json to_json(const HoldoutMetrics& m);
nlohmann::json to_json(const DistributionMatch& m);

/// Two-column plain text "x y" per line, with a '#' header naming the columns.
void write_series(const std::filesystem::path& path, const std::string& x_name,
                  const std::string& y_name, std::span<const double> xs, std::span<const double> ys);

/// Density of `mix` over an automatically chosen grid covering its support.
std::pair<std::vector<double>, std::vector<double>> pdf_series(const GaussianMixture& mix,
                                                                std::size_t points = 400);

}  // namespace sfcdelay::eval
