#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace sfcdelay {

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double variance = 1.0;
};

/// Univariate Gaussian mixture. Weights sum to one, variances are positive.
/// Construction validates; an invalid mixture cannot exist.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  static GaussianMixture single(double mean, double variance);

  const std::vector<MixtureComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

  double pdf(double d) const;
  double log_pdf(double d) const;
  double cdf(double d) const;

  /// Conditional mean; the MMSE point prediction.
  double mean() const;
  double variance() const;

  /// [min_k(m_k - 10 sigma_k), max_k(m_k + 10 sigma_k)]
  std::pair<double, double> support_bracket() const;

 private:
  std::vector<MixtureComponent> components_;
};

/// Outcome of converting one predicted mixture into bounds and a CI.
struct DelayBounds {
  double d_lb = 0.0;
  double d_ub = 0.0;
  double eps_lb = 0.0;
  double eps_ub = 0.0;
  double mmse = 0.0;
  double ci_half_width = 0.0;
  double p_cl = 0.0;
};

double pdf(const GaussianMixture& mix, double d);
double cdf(const GaussianMixture& mix, double d);
double mmse(const GaussianMixture& mix);

/// Smallest d with P(D > d) <= eps_ub.
double upper_bound(const GaussianMixture& mix, double eps_ub);
/// Largest d with P(D < d) <= eps_lb.
double lower_bound(const GaussianMixture& mix, double eps_lb);
/// Smallest x >= 0 with P(mmse - x < D < mmse + x) >= p_cl.
double confidence_interval(const GaussianMixture& mix, double p_cl);

DelayBounds delay_bounds(const GaussianMixture& mix, double eps_lb, double eps_ub,
                         double p_cl);

// Structured-text form: {"components": [{"weight", "mean", "variance"}, ...]}
nlohmann::json to_json(const GaussianMixture& mix);
GaussianMixture mixture_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DelayBounds& b);

std::string format_mixture(const GaussianMixture& mix);

}  // namespace sfcdelay
