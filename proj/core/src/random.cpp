#include "dpsc/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpsc {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix64(seed ^ index);
}

double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double normal(Rng& rng, double mean, double stddev) {
  return std::normal_distribution<double>(mean, stddev)(rng);
}

double gamma_shape_rate(Rng& rng, double shape, double rate) {
  double x = std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
  // Tiny shapes underflow to zero; keep the draw on the support.
  return std::max(x, std::numeric_limits<double>::min());
}

double beta(Rng& rng, double a, double b) {
  const double x = std::gamma_distribution<double>(a, 1.0)(rng);
  const double y = std::gamma_distribution<double>(b, 1.0)(rng);
  double v = x / (x + y);
  if (!(v > 0.0)) v = std::numeric_limits<double>::min();
  if (!(v < 1.0)) v = std::nextafter(1.0, 0.0);
  return v;
}

double log_sum_exp(std::span<const double> x) noexcept {
  if (x.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(x.begin(), x.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

std::size_t sample_log_weights(Rng& rng, std::span<const double> log_weights) {
  if (log_weights.empty()) throw std::invalid_argument("sample_log_weights: no options");
  const double m = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(m)) throw std::domain_error("sample_log_weights: no finite weight");
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - m);
  double u = uniform01(rng) * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    u -= std::exp(log_weights[i] - m);
    if (u < 0.0) return i;
  }
  // Rounding: fall back to the last option with positive mass.
  for (std::size_t i = log_weights.size(); i-- > 0;) {
    if (std::isfinite(log_weights[i])) return i;
  }
  return log_weights.size() - 1;
}

}  // namespace dpsc
