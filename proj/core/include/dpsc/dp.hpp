#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpsc/partition.hpp"
#include "dpsc/random.hpp"

namespace dpsc {

// Gamma prior on a DP precision, in shape/scale form (mean shape*scale).
struct GammaPrior {
  double shape = 1.0;
  double scale = 1.0;

  double rate() const noexcept { return 1.0 / scale; }
  double mean() const noexcept { return shape * scale; }
  void validate() const;  // ConfigError unless shape, scale > 0
};

// One (items, distinct clusters) observation of a DP-distributed partition.
struct ObservationPair {
  std::size_t n_items = 1;
  std::size_t n_clusters = 1;
};

struct ClusterMoments {
  double mean = 0.0;
  double std = 0.0;
};

struct ClusterCountRow {
  std::size_t n = 0;
  double dp_mean = 0.0;
  double dp_std = 0.0;
  double empirical_mean = 0.0;
  double empirical_std = 0.0;
};

struct ClusterCountCurve {
  double alpha = 0.0;  // posterior-mean precision used for the dp_* columns
  std::vector<ClusterCountRow> rows;
};

// Unnormalized predictive weights: one per existing cluster (its size), then
// alpha for a new cluster.
std::vector<double> crp_predictive_weights(std::span<const std::size_t> cluster_sizes,
                                           double alpha);

// Sequential (Polya urn) draw of a partition of n items.
Partition crp_sample(double alpha, std::size_t n, Rng& rng);
// Same draw, returning only the cluster label of each item in seating order.
std::vector<std::size_t> crp_sample_labels(double alpha, std::size_t n, Rng& rng);

// Exact moments of the number of clusters among n CRP(alpha) draws.
ClusterMoments expected_clusters(double alpha, std::size_t n);

// log p(k | alpha, n) up to the alpha-free constant log(|S(n,k)| n!):
//   k log(alpha) + lgamma(alpha) - lgamma(alpha + n).
double antoniak_log_prior(std::size_t k, double alpha, std::size_t n);

// Log exchangeable partition probability of cluster sizes under CRP(alpha).
double crp_log_eppf(std::span<const std::size_t> cluster_sizes, double alpha);

// One auxiliary-variable update of alpha given a single (n, k) observation.
double sample_precision_single(double alpha_old, std::size_t n, std::size_t k,
                               const GammaPrior& prior, Rng& rng);

inline constexpr std::size_t kDefaultIndicatorSweeps = 200;

// One update of alpha shared by several (n_m, k_m) observations: beta
// auxiliaries x_m, a Gibbs chain over the binary indicator vector of the
// prod(alpha + n_m) expansion, then a gamma draw. Requires the mixture shape
// offset a - M - 1 + sum k_m to exceed -1 (ConfigError otherwise).
double sample_precision_multi(double alpha_old, std::span<const ObservationPair> pairs,
                              const GammaPrior& prior, std::size_t gibbs_iters, Rng& rng);

struct AppropriatenessOptions {
  std::size_t resamples = 1000;
  GammaPrior prior{};
  std::size_t alpha_burn_in = 200;
  std::size_t alpha_draws = 1000;
  std::size_t gibbs_iters = kDefaultIndicatorSweeps;
};

// DP vs empirical expected class counts for subsamples of each size in `ns`.
// Classes of different pools never coincide.
ClusterCountCurve appropriateness_curve(std::span<const Partition> labeled_pools,
                                        std::span<const std::size_t> ns,
                                        const AppropriatenessOptions& options, Rng& rng);

}  // namespace dpsc
