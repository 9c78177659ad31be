#include <doctest.h>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "sfcdelay/mixture.hpp"

using sfcdelay::GaussianMixture;
using sfcdelay::MixtureComponent;

namespace {

GaussianMixture to_mixture(const std::vector<oracle::Component>& comps) {
  std::vector<MixtureComponent> out;
  for (const auto& c : comps) out.push_back({c.weight, c.mean, c.sd * c.sd});
  return GaussianMixture(out);
}

}  // namespace

TEST_CASE("pdf and cdf of simple mixtures") {
  const auto standard = GaussianMixture::single(0.0, 1.0);
  CHECK(sfcdelay::cdf(standard, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sfcdelay::pdf(standard, 0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
  CHECK(sfcdelay::pdf(standard, 0.0) == doctest::Approx(0.3989).epsilon(1e-4));

  const GaussianMixture twin({{0.5, -1.0, 1.0}, {0.5, 1.0, 1.0}});
  CHECK(twin.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(twin.cdf(-1e6) == 0.0);
  CHECK(twin.cdf(1e6) == 1.0);
}

TEST_CASE("invalid mixtures are rejected") {
  CHECK_THROWS_AS(GaussianMixture({}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{0.5, 0.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{1.0, 0.0, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{1.0, 0.0, -1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(GaussianMixture({{1.0, NAN, 1.0}}), std::invalid_argument);
}

TEST_CASE("upper and lower bounds") {
  CHECK(sfcdelay::upper_bound(GaussianMixture::single(10.0, 4.0), 0.5) ==
        doctest::Approx(10.0).epsilon(1e-9));
  CHECK(std::abs(sfcdelay::upper_bound(GaussianMixture::single(0.0, 1.0), 0.05) -
                 oracle::normal_quantile(0.95)) < 1e-8);
  CHECK(std::abs(sfcdelay::lower_bound(GaussianMixture::single(0.0, 1.0), 0.05) -
                 oracle::normal_quantile(0.05)) < 1e-8);

  const GaussianMixture mix({{0.3, 5.0, 4.0}, {0.7, 40.0, 100.0}});
  const double d_ub = sfcdelay::upper_bound(mix, 0.05);
  CHECK(mix.cdf(d_ub) >= 0.95);
  CHECK(mix.cdf(d_ub) <= 0.95 + 1e-6);

  CHECK_THROWS_AS(sfcdelay::upper_bound(mix, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sfcdelay::lower_bound(mix, 1.0), std::invalid_argument);
}

TEST_CASE("confidence interval half-width") {
  const auto standard = GaussianMixture::single(0.0, 1.0);
  CHECK(std::abs(sfcdelay::confidence_interval(standard, 0.95) - oracle::normal_quantile(0.975)) <
        1e-8);
  CHECK(sfcdelay::confidence_interval(standard, 1e-12) < 1e-8);

  // Asymmetric bimodal: returned width is minimal.
  const GaussianMixture mix({{0.8, 10.0, 1.0}, {0.2, 30.0, 9.0}});
  const double m = mix.mean();
  const double x = sfcdelay::confidence_interval(mix, 0.9);
  auto coverage = [&](double w) { return mix.cdf(m + w) - mix.cdf(m - w); };
  CHECK(coverage(x) >= 0.9);
  CHECK(coverage(x - 1e-6) < 0.9);
}

TEST_CASE("mmse is the mixture mean") {
  CHECK(sfcdelay::mmse(GaussianMixture::single(7.0, 2.0)) == 7.0);
  CHECK(sfcdelay::mmse(GaussianMixture({{0.5, 0.0, 1.0}, {0.5, 10.0, 1.0}})) == 5.0);
  const GaussianMixture three({{4.0 / 9, 10.0, 1.0}, {1.0 / 3, 20.0, 1.0}, {2.0 / 9, 30.0, 1.0}});
  CHECK(sfcdelay::mmse(three) == doctest::Approx(160.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("delay bounds bundle is ordered") {
  const GaussianMixture mix({{0.6, 20.0, 25.0}, {0.4, 35.0, 16.0}});
  const auto b = sfcdelay::delay_bounds(mix, 0.05, 0.05, 0.95);
  CHECK(b.d_lb <= b.mmse);
  CHECK(b.mmse <= b.d_ub);
  CHECK(b.ci_half_width >= 0.0);
}

TEST_CASE("randomized quantile duality and normalization") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto comps = oracle::random_mixture(rng);
    const auto mix = to_mixture(comps);
    for (double eps : {0.01, 0.05, 0.1, 0.5}) {
      CHECK(std::abs(mix.cdf(sfcdelay::upper_bound(mix, eps)) - (1.0 - eps)) <= 1e-6);
      CHECK(std::abs(mix.cdf(sfcdelay::lower_bound(mix, eps)) - eps) <= 1e-6);
    }
    if (trial < 40) {
      auto [lo, hi] = mix.support_bracket();
      const double mass = oracle::integrate([&](double d) { return mix.pdf(d); }, lo, hi, 1e-9);
      CHECK(std::abs(mass - 1.0) <= 1e-4);
    }
  }
}

TEST_CASE("Monte Carlo calibration of bounds and intervals") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    const auto comps = oracle::random_mixture(rng);
    const auto mix = to_mixture(comps);
    const auto draws = oracle::sample_mixture(comps, 1000000, rng);
    const double eps = 0.05, p_cl = 0.95;
    const double d_ub = sfcdelay::upper_bound(mix, eps);
    const double x = sfcdelay::confidence_interval(mix, p_cl);
    const double m = mix.mean();
    std::size_t above = 0, inside = 0;
    for (double d : draws) {
      above += d > d_ub;
      inside += std::abs(d - m) < x;
    }
    CHECK(static_cast<double>(above) / draws.size() <= eps + 0.005);
    CHECK(static_cast<double>(inside) / draws.size() >= p_cl - 0.005);
  }
}

TEST_CASE("mixture json round trip") {
  const GaussianMixture mix({{0.25, 1.5, 0.1}, {0.75, -3.0, 2.0}});
  const auto back = sfcdelay::mixture_from_json(sfcdelay::to_json(mix));
  REQUIRE(back.size() == 2);
  CHECK(back.components()[1].mean == -3.0);
  CHECK(back.components()[0].variance == 0.1);
  CHECK_THROWS(sfcdelay::mixture_from_json(nlohmann::json::parse(R"({"components": []})")));
}
