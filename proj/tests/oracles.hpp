#pragma once

// Test-only reference computations. Nothing here calls into the library's
// quantile, bisection or gradient code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

// Wichura's AS241 (PPND16) standard normal quantile, ~1e-16 relative accuracy.
inline double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) *
                    r +
                45921.953931549871457) *
                   r +
               13731.693765509461125) *
                  r +
              1971.5909503065514427) *
                 r +
             133.14166789178437745) *
                r +
            3.387132872796366608) /
           (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) *
                    r +
                21213.794301586595867) *
                   r +
               5394.1960214247511077) *
                  r +
              687.1870074920579083) *
                 r +
             42.313330701600911252) *
                r +
            1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) *
                   r +
               1.27045825245236838258) *
                  r +
              3.64784832476320460504) *
                 r +
             5.7694972214606914055) *
                r +
            4.6303378461565452959) *
               r +
           1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) *
                   r +
               0.14810397642748007459) *
                  r +
              0.68976733498510000455) *
                 r +
             1.6763848301838038494) *
                r +
            2.05319162663775882187) *
               r +
           1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) *
                   r +
               0.026532189526576123093) *
                  r +
              0.29656057182850489123) *
                 r +
             1.7848265399172913358) *
                r +
            5.4637849111641143699) *
               r +
           6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) *
                   r +
               7.868691311456132591e-4) *
                  r +
              0.0148753612908506148525) *
                 r +
             0.13692988092273580531) *
                r +
            0.59983220655588793769) *
               r +
           1.0);
  }
  return q < 0 ? -val : val;
}

/// Erlang-C probability that an arrival waits in M/M/c, a = lambda/mu.
inline double erlang_c(int c, double a) {
  // Erlang-B recursion, then convert.
  double b = 1.0;
  for (int k = 1; k <= c; ++k) b = a * b / (k + a * b);
  const double rho = a / c;
  return b / (1.0 - rho + rho * b);
}

inline double mmc_mean_wait(int c, double lambda, double mu) {
  return erlang_c(c, lambda / mu) / (c * mu - lambda);
}

inline double mmc_mean_queue(int c, double lambda, double mu) {
  return lambda * mmc_mean_wait(c, lambda, mu);
}

/// Adaptive Simpson quadrature.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int depth = 50) {
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
      return left + right + (left + right - whole) / 15.0;
    }
    return rec(lo, mid, flo, flm, fmid, left, d - 1) + rec(mid, hi, fmid, frm, fhi, right, d - 1);
  };
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return rec(a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), depth);
}

struct Component {
  double weight, mean, sd;
};

/// Draws from a Gaussian mixture by ancestral sampling.
inline std::vector<double> sample_mixture(const std::vector<Component>& comps, std::size_t n,
                                          std::mt19937_64& rng) {
  std::vector<double> w;
  for (const auto& c : comps) w.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& x : out) {
    const auto& c = comps[pick(rng)];
    x = c.mean + c.sd * z(rng);
  }
  return out;
}

/// Random mixture with 1-4 components, means in [-50,150], sd in [0.2,20].
inline std::vector<Component> random_mixture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int k = kd(rng);
  std::vector<Component> comps;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    comps.push_back({0.05 + u(rng), -50.0 + 200.0 * u(rng), 0.2 + 19.8 * u(rng)});
    total += comps.back().weight;
  }
  for (auto& c : comps) c.weight /= total;
  return comps;
}

/// Lindley recursion for a single-server FCFS queue: waiting times.
inline std::vector<double> lindley_waits(const std::vector<double>& arrivals,
                                         const std::vector<double>& services) {
  std::vector<double> w(arrivals.size(), 0.0);
  for (std::size_t j = 1; j < arrivals.size(); ++j) {
    w[j] = std::max(0.0, w[j - 1] + services[j - 1] - (arrivals[j] - arrivals[j - 1]));
  }
  return w;
}

}  // namespace oracle
