#include "sfcdelay/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace sfcdelay {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

double normal_cdf(double d, double mean, double sd) {
  return 0.5 * std::erfc(-(d - mean) / (sd * std::numbers::sqrt2));
}

// Bisection on a monotone predicate until the bracket cannot shrink further
// in double precision. Returns the endpoint on the side where `pred` holds.
template <typename Pred>
double bisect(double lo, double hi, Pred pred_holds_at_hi, bool want_hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    if (pred_holds_at_hi(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return want_hi ? hi : lo;
}

void check_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument(std::string(what) + " must lie in (0,1), got " +
                                std::to_string(p));
  }
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("GaussianMixture: at least one component required");
  }
  double total = 0.0;
  for (const auto& c : components_) {
    if (!std::isfinite(c.weight) || c.weight < 0.0 || c.weight > 1.0) {
      throw std::invalid_argument("GaussianMixture: weight outside [0,1]");
    }
    if (!std::isfinite(c.mean)) {
      throw std::invalid_argument("GaussianMixture: non-finite mean");
    }
    if (!std::isfinite(c.variance) || c.variance <= 0.0) {
      throw std::invalid_argument("GaussianMixture: variance must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw std::invalid_argument("GaussianMixture: weights sum to " + std::to_string(total));
  }
}

GaussianMixture GaussianMixture::single(double mean, double variance) {
  return GaussianMixture({{1.0, mean, variance}});
}

double GaussianMixture::pdf(double d) const {
  double p = 0.0;
  for (const auto& c : components_) {
    const double z = d - c.mean;
    p += c.weight * std::exp(-0.5 * z * z / c.variance) /
         std::sqrt(2.0 * std::numbers::pi * c.variance);
  }
  return p;
}

double GaussianMixture::log_pdf(double d) const {
  double peak = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    const double z = d - c.mean;
    const double t = std::log(c.weight) - 0.5 * std::log(2.0 * std::numbers::pi * c.variance) -
                     0.5 * z * z / c.variance;
    terms.push_back(t);
    peak = std::max(peak, t);
  }
  if (!std::isfinite(peak)) return peak;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - peak);
  return peak + std::log(s);
}

double GaussianMixture::cdf(double d) const {
  double p = 0.0;
  for (const auto& c : components_) {
    p += c.weight * normal_cdf(d, c.mean, std::sqrt(c.variance));
  }
  return std::clamp(p, 0.0, 1.0);
}

double GaussianMixture::mean() const {
  double m = 0.0;
  for (const auto& c : components_) m += c.weight * c.mean;
  return m;
}

double GaussianMixture::variance() const {
  const double m = mean();
  double v = 0.0;
  for (const auto& c : components_) {
    v += c.weight * (c.variance + (c.mean - m) * (c.mean - m));
  }
  return v;
}

std::pair<double, double> GaussianMixture::support_bracket() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : components_) {
    const double s = std::sqrt(c.variance);
    lo = std::min(lo, c.mean - 10.0 * s);
    hi = std::max(hi, c.mean + 10.0 * s);
  }
  return {lo, hi};
}

double pdf(const GaussianMixture& mix, double d) { return mix.pdf(d); }
double cdf(const GaussianMixture& mix, double d) { return mix.cdf(d); }
double mmse(const GaussianMixture& mix) { return mix.mean(); }

double upper_bound(const GaussianMixture& mix, double eps_ub) {
  check_probability(eps_ub, "eps_ub");
  auto [lo, hi] = mix.support_bracket();
  return bisect(lo, hi, [&](double d) { return 1.0 - mix.cdf(d) <= eps_ub; }, true);
}

double lower_bound(const GaussianMixture& mix, double eps_lb) {
  check_probability(eps_lb, "eps_lb");
  auto [lo, hi] = mix.support_bracket();
  return bisect(lo, hi, [&](double d) { return mix.cdf(d) > eps_lb; }, false);
}

double confidence_interval(const GaussianMixture& mix, double p_cl) {
  check_probability(p_cl, "p_cl");
  const double centre = mix.mean();
  auto [lo, hi] = mix.support_bracket();
  const double reach = std::max(centre - lo, hi - centre);
  auto coverage = [&](double x) { return mix.cdf(centre + x) - mix.cdf(centre - x); };
  return bisect(0.0, reach, [&](double x) { return coverage(x) >= p_cl; }, true);
}

DelayBounds delay_bounds(const GaussianMixture& mix, double eps_lb, double eps_ub,
                         double p_cl) {
  DelayBounds b;
  b.eps_lb = eps_lb;
  b.eps_ub = eps_ub;
  b.p_cl = p_cl;
  b.d_lb = lower_bound(mix, eps_lb);
  b.d_ub = upper_bound(mix, eps_ub);
  b.mmse = mix.mean();
  b.ci_half_width = confidence_interval(mix, p_cl);
  return b;
}

nlohmann::json to_json(const GaussianMixture& mix) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : mix.components()) {
    comps.push_back({{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  }
  return {{"components", comps}};
}

GaussianMixture mixture_from_json(const nlohmann::json& j) {
  std::vector<MixtureComponent> comps;
  for (const auto& c : j.at("components")) {
    comps.push_back({c.at("weight").get<double>(), c.at("mean").get<double>(),
                     c.at("variance").get<double>()});
  }
  return GaussianMixture(std::move(comps));
}

nlohmann::json to_json(const DelayBounds& b) {
  return {{"d_lb", b.d_lb},     {"d_ub", b.d_ub}, {"eps_lb", b.eps_lb},
          {"eps_ub", b.eps_ub}, {"mmse", b.mmse}, {"ci_half_width", b.ci_half_width},
          {"p_cl", b.p_cl}};
}

std::string format_mixture(const GaussianMixture& mix) {
  std::ostringstream os;
  os.precision(6);
  os << "k\tweight\tmean\tvariance\n";
  for (std::size_t k = 0; k < mix.size(); ++k) {
    const auto& c = mix.components()[k];
    os << k << '\t' << c.weight << '\t' << c.mean << '\t' << c.variance << '\n';
  }
  return os.str();
}

}  // namespace sfcdelay
