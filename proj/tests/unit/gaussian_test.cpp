#include "dpsc/gaussian.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dpsc/error.hpp"
#include "oracles.hpp"

namespace dpsc {
namespace {

TEST(DataLoglik, SpecExamples) {
  const Vector zero{0.0};
  const Vector one{1.0};
  const Vector four{4.0};
  EXPECT_NEAR(data_loglik(zero, zero, one), -0.91894, 1e-5);
  EXPECT_NEAR(data_loglik(one, zero, one), -1.41894, 1e-5);
  EXPECT_NEAR(data_loglik(one, zero, four), -2.22579, 1e-5);
  EXPECT_NEAR(data_loglik(one, zero, four), std::log(oracle::normal_pdf(1.0, 0.0, 0.25)), 1e-12);
  EXPECT_THROW(data_loglik(Vector{0.0, 1.0}, zero, one), DomainError);
}

TEST(DataLoglik, SumsOverDimensions) {
  const Vector r{0.3, -1.0};
  const Vector p{1.0, 0.5};
  const Vector t{2.0, 0.7};
  const double expected = std::log(oracle::normal_pdf(0.3, 1.0, 0.5)) +
                          std::log(oracle::normal_pdf(-1.0, 0.5, 1.0 / 0.7));
  EXPECT_NEAR(data_loglik(r, Publication{p}, ReferenceType{t}), expected, 1e-12);
}

TEST(MarginalNewPublication, SpecExamples) {
  const Vector zero{0.0};
  const Vector one{1.0};
  const PublicationBase base{{0.0}, 1.0};
  EXPECT_NEAR(marginal_loglik_new_publication(zero, one, base), -1.26551, 1e-5);
  EXPECT_NEAR(marginal_loglik_new_publication(zero, one, base),
              std::log(oracle::normal_pdf(0.0, 0.0, 2.0)), 1e-12);
  const PublicationBase tight{{0.4}, 1e-12};
  EXPECT_NEAR(marginal_loglik_new_publication(one, Vector{3.0}, tight),
              data_loglik(one, Vector{0.4}, Vector{3.0}), 1e-9);
  EXPECT_THROW(marginal_loglik_new_publication(Vector{0.0, 0.0}, one, base), DomainError);
}

TEST(MarginalNewType, MatchesQuadrature) {
  const TypeBase base{{1.5}, {0.8}};
  for (double r : {-2.0, 0.0, 0.3, 4.0}) {
    const double q = oracle::integrate_positive([&](double t) {
      return oracle::gamma_pdf(t, 1.5, 0.8) * oracle::normal_pdf(r, 0.5, 1.0 / t);
    });
    EXPECT_NEAR(marginal_loglik_new_type(Vector{r}, Vector{0.5}, base), std::log(q), 1e-9);
  }
  EXPECT_THROW(marginal_loglik_new_type(Vector{0.0, 0.0}, Vector{0.0}, base), DomainError);
}

TEST(PublicationPosterior, OneObservation) {
  const Vector r{1.0};
  const Vector t{1.0};
  const std::vector<PrecisionObservation> obs{{r, t}};
  const auto post = publication_posterior(obs, PublicationBase{{0.0}, 1.0});
  EXPECT_NEAR(post.mean[0], 0.5, 1e-15);
  EXPECT_NEAR(post.variance[0], 0.5, 1e-15);
}

TEST(PublicationPosterior, ManyIdenticalObservationsConcentrate) {
  const Vector r{2.0};
  const Vector t{1.0};
  const std::vector<PrecisionObservation> obs(100000, PrecisionObservation{r, t});
  const auto post = publication_posterior(obs, PublicationBase{{0.0}, 1.0});
  EXPECT_NEAR(post.mean[0], 2.0, 1e-4);
  EXPECT_LT(post.variance[0], 1e-4);
}

TEST(PublicationPosterior, EmptyFallsBackToPrior) {
  Rng rng(3);
  const PublicationBase base{{1.0, -1.0}, 4.0};
  double sum = 0.0;
  double sum_sq = 0.0;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const auto p = posterior_sample_publication({}, base, rng);
    sum += p.mean[1];
    sum_sq += p.mean[1] * p.mean[1];
  }
  const double mean = sum / draws;
  EXPECT_NEAR(mean, -1.0, 0.05);
  EXPECT_NEAR(sum_sq / draws - mean * mean, 4.0, 0.15);
}

TEST(PublicationStats, AgreesWithDirectPosterior) {
  const std::vector<Vector> rs{{0.2, 1.0}, {-0.4, 2.0}, {1.1, 0.0}};
  const std::vector<Vector> ts{{1.0, 2.0}, {0.5, 0.5}, {3.0, 1.0}};
  std::vector<PrecisionObservation> obs;
  PublicationStats stats(2);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    obs.push_back({rs[i], ts[i]});
    stats.add(rs[i], ts[i]);
  }
  const auto base = PublicationBase::isotropic(2, 2.0);
  const auto a = publication_posterior(obs, base);
  const auto b = stats.posterior(base);
  for (int f = 0; f < 2; ++f) {
    EXPECT_NEAR(a.mean[f], b.mean[f], 1e-14);
    EXPECT_NEAR(a.variance[f], b.variance[f], 1e-14);
  }
}

TEST(TypePosterior, ZeroResidualsSampleMean) {
  Rng rng(4);
  const Vector zero{0.0};
  const std::vector<Residual> res{{zero, zero}, {zero, zero}};
  const TypeBase base{{1.0}, {1.0}};
  const auto post = type_posterior(res, base);
  EXPECT_DOUBLE_EQ(post.shape[0], 2.0);
  EXPECT_DOUBLE_EQ(post.rate[0], 1.0);
  double sum = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) sum += posterior_sample_type(res, base, rng).precision[0];
  EXPECT_NEAR(sum / draws, 2.0, 0.04);
}

TEST(TypePosterior, EmptyFallsBackToPrior) {
  Rng rng(5);
  const TypeBase base{{3.0}, {0.5}};
  double sum = 0.0;
  for (int i = 0; i < 40000; ++i) sum += posterior_sample_type({}, base, rng).precision[0];
  EXPECT_NEAR(sum / 40000.0, 1.5, 0.03);
}

TEST(TypeStats, AgreesWithDirectPosterior) {
  const std::vector<Vector> rs{{0.2}, {-0.4}, {1.1}};
  const std::vector<Vector> ps{{0.0}, {0.5}, {1.0}};
  std::vector<Residual> res;
  TypeStats stats(1);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    res.push_back({rs[i], ps[i]});
    stats.add(rs[i], ps[i]);
  }
  const TypeBase base{{2.0}, {0.5}};
  const auto a = type_posterior(res, base);
  const auto b = stats.posterior(base);
  EXPECT_NEAR(a.shape[0], b.shape[0], 1e-14);
  EXPECT_NEAR(a.rate[0], b.rate[0], 1e-14);
  EXPECT_NEAR(a.shape[0], 3.5, 1e-14);
  EXPECT_NEAR(a.rate[0], 2.0 + 0.5 * (0.04 + 0.81 + 0.01), 1e-14);
}

// Clusters built so each has within-cluster variance exactly v_k.
Matrix two_point_clusters(const std::vector<double>& variances, std::vector<std::size_t>& assign,
                          std::vector<Vector>& means) {
  Matrix data(2 * variances.size(), 1);
  for (std::size_t k = 0; k < variances.size(); ++k) {
    const double s = std::sqrt(variances[k]);
    data(2 * k, 0) = 10.0 * k - s;
    data(2 * k + 1, 0) = 10.0 * k + s;
    assign.push_back(k);
    assign.push_back(k);
    means.push_back({10.0 * k});
  }
  return data;
}

TEST(AdaptTypeBase, MomentMatch) {
  std::vector<std::size_t> assign;
  std::vector<Vector> means;
  // Variances 1 and 3: mean 2, variance of variance 1.
  const Matrix data = two_point_clusters({1.0, 3.0}, assign, means);
  const TypeBase base = adapt_type_base(data, assign, means);
  EXPECT_NEAR(base.shape[0], 1.0, 1e-12);
  EXPECT_NEAR(base.scale[0], 1.0, 1e-12);
}

TEST(AdaptTypeBase, DegenerateClamps) {
  std::vector<std::size_t> assign;
  std::vector<Vector> means;
  const Matrix data = two_point_clusters({0.5, 0.5, 0.5}, assign, means);
  const TypeBase base = adapt_type_base(data, assign, means);
  EXPECT_DOUBLE_EQ(base.scale[0], kMinTypeScale);
  EXPECT_NEAR(base.shape[0], 0.25 / kMinTypeScale, 1e-6);

  std::vector<std::size_t> one_assign;
  std::vector<Vector> one_means;
  const Matrix single = two_point_clusters({2.0}, one_assign, one_means);
  const TypeBase fallback = adapt_type_base(single, one_assign, one_means);
  EXPECT_DOUBLE_EQ(fallback.shape[0], 1.0);
  EXPECT_DOUBLE_EQ(fallback.scale[0], 1.0);
}

TEST(WeightedSqDistance, SpecExamples) {
  EXPECT_DOUBLE_EQ(weighted_sq_distance(Vector{1.0, 2.0}, Vector{1.0, 2.0}, Vector{3.0, 4.0}), 0.0);
  EXPECT_DOUBLE_EQ(weighted_sq_distance(Vector{0.0}, Vector{2.0}, Vector{1.0}), 4.0);
  EXPECT_DOUBLE_EQ(weighted_sq_distance(Vector{0.0, 0.0}, Vector{1.0, 2.0}, Vector{2.0, 1.0}), 6.0);
  EXPECT_THROW(weighted_sq_distance(Vector{0.0}, Vector{1.0, 2.0}, Vector{1.0}), DomainError);
}

TEST(ConditionalTypeLogprior, SinglePublication) {
  const Vector t{1.3, 0.4};
  const Vector p{0.5, -0.2};
  const TypeBase tb{{2.0, 1.0}, {1.0, 3.0}};
  const auto pb = PublicationBase::isotropic(2, 1.5);
  const std::vector<SizedPublication> pubs{{p, 4, 0}};
  EXPECT_NEAR(conditional_type_logprior(t, pubs, tb, pb, {1.0}),
              tb.log_density(t) - pb.log_density(p), 1e-12);
}

TEST(ConditionalTypeLogprior, CoincidentMeansWithUnitLambda) {
  const Vector t{2.0};
  const Vector p{0.7};
  const TypeBase tb{{1.0}, {1.0}};
  const PublicationBase pb{{0.0}, 1.0};
  const std::vector<SizedPublication> pubs{{p, 3, 0}, {p, 2, 1}};
  // J = 2: exponents -2 and 0, one pair at distance zero with log(1) = 0.
  EXPECT_NEAR(conditional_type_logprior(t, pubs, tb, pb, {1.0}),
              tb.log_density(t) - 2.0 * pb.log_density(p), 1e-12);
}

TEST(ConditionalTypeLogprior, RejectsUnorderedInput) {
  const Vector t{1.0};
  const Vector p{0.0};
  const std::vector<SizedPublication> pubs{{p, 1, 0}, {p, 2, 1}};
  EXPECT_THROW(conditional_type_logprior(t, pubs, TypeBase::uniform(1), PublicationBase::isotropic(1), {1.0}),
               DomainError);
}

TEST(ConditionalTypePrior, MatchesDirectEvaluation) {
  const std::vector<Vector> means{{0.1, 1.0}, {-0.5, 0.3}, {2.0, -1.0}, {0.0, 0.0}};
  std::vector<SizedPublication> pubs;
  for (std::size_t j = 0; j < means.size(); ++j) pubs.push_back({means[j], 10 - j, j});
  const TypeBase tb{{2.0, 0.5}, {1.0, 2.0}};
  const auto pb = PublicationBase::isotropic(2, 2.0);
  const ConditionalPriorConfig cfg{0.6};
  const ConditionalTypePrior prior(pubs, pb, cfg);
  for (const Vector& t : {Vector{1.0, 1.0}, Vector{0.2, 3.0}}) {
    EXPECT_NEAR(prior.log_density(t, tb), conditional_type_logprior(t, pubs, tb, pb, cfg), 1e-10);
    double coupling = 0.0;
    for (std::size_t j = 0; j < means.size(); ++j)
      for (std::size_t k = 0; k < j; ++k) coupling -= 0.6 * weighted_sq_distance(means[j], means[k], t);
    EXPECT_NEAR(prior.log_coupling(t), coupling, 1e-10);
  }
}

}  // namespace
}  // namespace dpsc
