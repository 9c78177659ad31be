#include <cmath>

#include "sfcdelay/netsim.hpp"

namespace sfcdelay::netsim {

ArrivalProcess::ArrivalProcess(ArrivalModel model, Rng& rng) : model_(std::move(model)) {
  if (const auto* m = std::get_if<Mmpp>(&model_)) {
    on_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < m->stationary_on();
  }
}

double ArrivalProcess::next_gap(double now, Rng& rng) {
  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GammaRenewal>) {
          return std::gamma_distribution<double>(1.0 / m.scv, m.scv / m.rate)(rng);
        } else if constexpr (std::is_same_v<T, Nhpp>) {
          // Thinning against the envelope mean_rate * (1 + amplitude).
          const double envelope = m.mean_rate * (1.0 + m.amplitude);
          std::exponential_distribution<double> gap(envelope);
          std::uniform_real_distribution<double> u(0.0, 1.0);
          double t = now;
          for (;;) {
            t += gap(rng);
            if (u(rng) * envelope <= m.rate_at(t)) return t - now;
          }
        } else {
          std::uniform_real_distribution<double> u(0.0, 1.0);
          std::exponential_distribution<double> gap(m.on_rate());
          auto step = [&] {
            next_step_ += 1.0;
            on_ = on_ ? !(u(rng) < m.p_on_to_off) : (u(rng) < m.p_off_to_on);
          };
          while (next_step_ <= now) step();
          double t = now;
          for (;;) {
            if (on_) {
              const double candidate = t + gap(rng);
              if (candidate < next_step_) return candidate - now;
            }
            // Memoryless: restart the exponential clock at the step boundary.
            t = next_step_;
            step();
          }
        }
      },
      model_);
}

double sample_interarrival(ArrivalProcess& process, double now, Rng& rng) {
  return process.next_gap(now, rng);
}

}  // namespace sfcdelay::netsim
