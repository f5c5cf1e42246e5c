#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace dpsc {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of chain `index` under run seed `seed`: splitmix64(seed ^ index).
std::uint64_t chain_seed(std::uint64_t seed, std::uint64_t index) noexcept;

double uniform01(Rng& rng);
double normal(Rng& rng, double mean, double stddev);
double gamma_shape_rate(Rng& rng, double shape, double rate);
// Strictly inside (0, 1).
double beta(Rng& rng, double a, double b);

// Index drawn proportionally to exp(log_weights); max-subtracted.
std::size_t sample_log_weights(Rng& rng, std::span<const double> log_weights);

// log(sum(exp(x))), -inf for an empty span.
double log_sum_exp(std::span<const double> x) noexcept;

}  // namespace dpsc
