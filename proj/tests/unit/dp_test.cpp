#include "dpsc/dp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "dpsc/error.hpp"
#include "oracles.hpp"

namespace dpsc {
namespace {

TEST(CrpPredictiveWeights, SpecExamples) {
  EXPECT_EQ(crp_predictive_weights({}, 1.0), (std::vector<double>{1.0}));
  const std::vector<std::size_t> sizes{3, 1};
  EXPECT_EQ(crp_predictive_weights(sizes, 2.0), (std::vector<double>{3.0, 1.0, 2.0}));
  EXPECT_THROW(crp_predictive_weights(sizes, 0.0), DomainError);
  EXPECT_THROW(crp_predictive_weights(sizes, -1.0), DomainError);
}

TEST(CrpSample, Limits) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(crp_sample(1e-9, 10, rng).num_clusters(), 1u);
    EXPECT_EQ(crp_sample(1e9, 10, rng).num_clusters(), 10u);
  }
}

TEST(CrpSample, PartitionFrequenciesMatchSeatingProbabilities) {
  Rng rng(4);
  const int draws = 200000;
  std::map<oracle::Labels, int> counts;
  for (int i = 0; i < draws; ++i) {
    const auto l = crp_sample_labels(1.5, 4, rng);
    ++counts[oracle::canonical(l)];
  }
  for (const auto& p : oracle::set_partitions(4)) {
    const double expected = oracle::crp_probability(p, 1.5);
    EXPECT_NEAR(counts[p] / static_cast<double>(draws), expected, 0.005);
  }
}

TEST(CrpSample, MeanClusterCountMatchesExpected) {
  Rng rng(2);
  double sum = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) sum += static_cast<double>(crp_sample(1.0, 500, rng).num_clusters());
  EXPECT_NEAR(sum / draws / expected_clusters(1.0, 500).mean, 1.0, 0.02);
}

TEST(ExpectedClusters, SpecExamples) {
  const auto one = expected_clusters(3.7, 1);
  EXPECT_DOUBLE_EQ(one.mean, 1.0);
  EXPECT_DOUBLE_EQ(one.std, 0.0);
  EXPECT_NEAR(expected_clusters(1.0, 3).mean, 11.0 / 6.0, 1e-14);
  EXPECT_THROW(expected_clusters(1.0, 0), DomainError);
}

TEST(ExpectedClusters, MatchesEnumeratedDistribution) {
  for (double alpha : {0.3, 1.0, 4.0}) {
    double mean = 0.0;
    double second = 0.0;
    for (const auto& p : oracle::set_partitions(6)) {
      const double k = static_cast<double>(*std::max_element(p.begin(), p.end()) + 1);
      const double w = oracle::crp_probability(p, alpha);
      mean += w * k;
      second += w * k * k;
    }
    const auto m = expected_clusters(alpha, 6);
    EXPECT_NEAR(m.mean, mean, 1e-12);
    EXPECT_NEAR(m.std, std::sqrt(second - mean * mean), 1e-12);
  }
}

std::vector<double> cluster_count_distribution(double alpha, std::size_t n) {
  std::vector<double> by_k(n + 1, 0.0);
  for (const auto& p : oracle::set_partitions(n)) {
    by_k[*std::max_element(p.begin(), p.end()) + 1] += oracle::crp_probability(p, alpha);
  }
  return by_k;
}

TEST(AntoniakLogPrior, AlphaDependenceMatchesEnumeration) {
  const auto lo = cluster_count_distribution(0.5, 6);
  const auto hi = cluster_count_distribution(2.0, 6);
  for (std::size_t k = 1; k <= 6; ++k) {
    EXPECT_NEAR(antoniak_log_prior(k, 0.5, 6) - antoniak_log_prior(k, 2.0, 6),
                std::log(lo[k] / hi[k]), 1e-12);
  }
  EXPECT_NEAR(antoniak_log_prior(1, 0.3, 1) - antoniak_log_prior(1, 7.0, 1), 0.0, 1e-12);
  EXPECT_THROW(antoniak_log_prior(0, 1.0, 5), DomainError);
  EXPECT_THROW(antoniak_log_prior(6, 1.0, 5), DomainError);
  EXPECT_LT(antoniak_log_prior(5, 1e-12, 5) - antoniak_log_prior(1, 1e-12, 5), -100.0);
}

TEST(CrpLogEppf, MatchesSeatingProbability) {
  for (const auto& p : oracle::set_partitions(5)) {
    const auto part = Partition::from_labels(p);
    const auto sizes = part.cluster_sizes();
    EXPECT_NEAR(crp_log_eppf(sizes, 0.7), std::log(oracle::crp_probability(p, 0.7)), 1e-12);
  }
}

// Posterior mean of alpha under a gamma prior given (n, k) pairs, by
// quadrature of prior * prod alpha^k Gamma(alpha) / Gamma(alpha + n).
double quadrature_alpha_mean(const std::vector<ObservationPair>& pairs, double shape, double rate) {
  auto log_post = [&](double a) {
    double lp = (shape - 1.0) * std::log(a) - rate * a;
    for (const auto& p : pairs) {
      lp += static_cast<double>(p.n_clusters) * std::log(a) + std::lgamma(a) -
            std::lgamma(a + static_cast<double>(p.n_items));
    }
    return lp;
  };
  const double shift = log_post(1.0);
  auto w = [&](double a) { return a <= 0.0 ? 0.0 : std::exp(log_post(a) - shift); };
  return oracle::integrate_positive([&](double a) { return a * w(a); }) /
         oracle::integrate_positive(w);
}

TEST(SamplePrecisionSingle, ChainMeanMatchesQuadrature) {
  Rng rng(8);
  const GammaPrior prior{1.0, 1.0};
  double a = 1.0;
  double sum = 0.0;
  const int draws = 30000;
  for (int i = 0; i < 500; ++i) a = sample_precision_single(a, 50, 5, prior, rng);
  for (int i = 0; i < draws; ++i) {
    a = sample_precision_single(a, 50, 5, prior, rng);
    sum += a;
  }
  const double exact = quadrature_alpha_mean({{50, 5}}, 1.0, 1.0);
  EXPECT_NEAR(sum / draws / exact, 1.0, 0.05);
}

TEST(SamplePrecisionSingle, AllSingletonsPushAlphaUp) {
  Rng rng(9);
  const GammaPrior prior{1.0, 1.0};
  double a = 1.0;
  double sum = 0.0;
  for (int i = 0; i < 2000; ++i) {
    a = sample_precision_single(a, 200, 200, prior, rng);
    sum += a;
  }
  EXPECT_GT(sum / 2000.0, 20.0 * prior.mean());
  EXPECT_THROW(sample_precision_single(1.0, 5, 6, prior, rng), DomainError);
}

TEST(SamplePrecisionMulti, ChainMeanMatchesQuadrature) {
  Rng rng(10);
  const std::vector<ObservationPair> pairs{{10, 3}, {20, 5}, {15, 4}};
  const GammaPrior prior{5.0, 1.0};
  double a = prior.mean();
  double sum = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    a = sample_precision_multi(a, pairs, prior, 50, rng);
    sum += a;
  }
  EXPECT_NEAR(sum / draws / quadrature_alpha_mean(pairs, 5.0, 1.0), 1.0, 0.05);
}

TEST(SamplePrecisionMulti, SingleClusterGroupsPullAlphaDown) {
  Rng rng(11);
  const std::vector<ObservationPair> pairs(5, ObservationPair{30, 1});
  const GammaPrior prior{6.0, 1.0};
  double a = 0.1;
  double sum = 0.0;
  for (int i = 0; i < 3000; ++i) {
    a = sample_precision_multi(a, pairs, prior, 50, rng);
    sum += a;
  }
  EXPECT_LT(sum / 3000.0, prior.mean());
}

TEST(SamplePrecisionMulti, RejectsBadInput) {
  Rng rng(12);
  const std::vector<ObservationPair> bad{{10, 11}};
  EXPECT_THROW(sample_precision_multi(1.0, bad, GammaPrior{}, 10, rng), DomainError);
  EXPECT_THROW(sample_precision_multi(1.0, {}, GammaPrior{}, 10, rng), DomainError);
  const std::vector<ObservationPair> ok{{10, 2}};
  EXPECT_THROW(sample_precision_multi(1.0, ok, GammaPrior{0.0, 1.0}, 10, rng), ConfigError);
  EXPECT_THROW(sample_precision_multi(1.0, ok, GammaPrior{}, 0, rng), ConfigError);
}

TEST(AppropriatenessCurve, BoundaryRows) {
  Rng rng(13);
  const Partition pool = Partition::from_labels(std::vector<std::size_t>{0, 0, 1, 1, 1, 2, 3, 3});
  AppropriatenessOptions opts;
  opts.resamples = 50;
  opts.alpha_draws = 100;
  opts.alpha_burn_in = 20;
  const std::vector<Partition> pools{pool};
  const std::vector<std::size_t> ns{1, 8};
  const auto curve = appropriateness_curve(pools, ns, opts, rng);
  ASSERT_EQ(curve.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(curve.rows[0].dp_mean, 1.0);
  EXPECT_DOUBLE_EQ(curve.rows[0].dp_std, 0.0);
  EXPECT_DOUBLE_EQ(curve.rows[0].empirical_mean, 1.0);
  EXPECT_DOUBLE_EQ(curve.rows[0].empirical_std, 0.0);
  EXPECT_DOUBLE_EQ(curve.rows[1].empirical_mean, 4.0);
  EXPECT_DOUBLE_EQ(curve.rows[1].empirical_std, 0.0);
  const std::vector<std::size_t> too_many{9};
  EXPECT_THROW(appropriateness_curve(pools, too_many, opts, rng), DomainError);
}

TEST(AppropriatenessCurve, CrpPoolIsSelfConsistent) {
  Rng rng(14);
  std::vector<Partition> pools;
  pools.push_back(crp_sample(2.0, 600, rng));
  AppropriatenessOptions opts;
  opts.resamples = 200;
  std::vector<std::size_t> ns;
  for (std::size_t n = 10; n <= 600; n += 59) ns.push_back(n);
  const auto curve = appropriateness_curve(pools, ns, opts, rng);
  for (const auto& row : curve.rows) {
    EXPECT_LE(std::abs(row.dp_mean - row.empirical_mean), 2.0 * row.dp_std) << "N=" << row.n;
  }
}

}  // namespace
}  // namespace dpsc
