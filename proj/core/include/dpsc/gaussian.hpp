#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpsc/matrix.hpp"
#include "dpsc/random.hpp"

namespace dpsc {

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

// Cluster mean in feature space.
struct Publication {
  Vector mean;
};

// Per-dimension precision weights of a diagonal Gaussian; all entries > 0.
struct ReferenceType {
  Vector precision;
};

// Normal(prior_mean, variance * I) over publication means.
struct PublicationBase {
  Vector prior_mean;
  double variance = 1.0;

  static PublicationBase isotropic(std::size_t dim, double variance = 1.0);
  std::size_t dim() const noexcept { return prior_mean.size(); }
  double log_density(VectorView mean) const;
  Vector sample(Rng& rng) const;
};

// Independent Gamma(shape_f, scale_f) over each precision entry.
struct TypeBase {
  Vector shape;
  Vector scale;

  static TypeBase uniform(std::size_t dim, double shape = 1.0, double scale = 1.0);
  std::size_t dim() const noexcept { return shape.size(); }
  double log_density(VectorView precision) const;
  Vector sample(Rng& rng) const;
  bool valid() const noexcept;
};

struct ConditionalPriorConfig {
  double lambda = 1.0;
};

// log F(r | mean, precision) for a diagonal Gaussian.
double data_loglik(VectorView r, VectorView mean, VectorView precision);
double data_loglik(VectorView r, const Publication& p, const ReferenceType& t);

// log of the integral of F(r | p, t) over p ~ base.
double marginal_loglik_new_publication(VectorView r, VectorView precision,
                                       const PublicationBase& base);
// log of the integral of F(r | p, t) over t ~ base (Student-t form per dimension).
double marginal_loglik_new_type(VectorView r, VectorView mean, const TypeBase& base);

double weighted_sq_distance(VectorView x, VectorView y, VectorView precision);

// Per-dimension Normal posterior of a publication mean.
struct NormalPosterior {
  Vector mean;
  Vector variance;
};

// Per-dimension Gamma posterior of a type precision (shape/rate).
struct GammaPosterior {
  Vector shape;
  Vector rate;
};

// Sufficient statistics of observations r_n ~ Normal(p, 1/t_n) for one p.
class PublicationStats {
 public:
  explicit PublicationStats(std::size_t dim = 0) : precision_sum_(dim, 0.0), weighted_sum_(dim, 0.0) {}
  void add(VectorView r, VectorView precision);
  NormalPosterior posterior(const PublicationBase& base) const;

 private:
  Vector precision_sum_;
  Vector weighted_sum_;
};

// Sufficient statistics of residuals r_n - p_n under one shared precision.
class TypeStats {
 public:
  explicit TypeStats(std::size_t dim = 0) : sq_sum_(dim, 0.0) {}
  void add(VectorView r, VectorView mean);
  GammaPosterior posterior(const TypeBase& base) const;

 private:
  Vector sq_sum_;
  std::size_t count_ = 0;
};

struct PrecisionObservation {
  VectorView value;
  VectorView precision;
};

struct Residual {
  VectorView value;
  VectorView mean;
};

NormalPosterior publication_posterior(std::span<const PrecisionObservation> targets,
                                      const PublicationBase& base);
GammaPosterior type_posterior(std::span<const Residual> residuals, const TypeBase& base);

Vector sample(const NormalPosterior& posterior, Rng& rng);
Vector sample(const GammaPosterior& posterior, Rng& rng);

Publication posterior_sample_publication(std::span<const PrecisionObservation> targets,
                                         const PublicationBase& base, Rng& rng);
ReferenceType posterior_sample_type(std::span<const Residual> residuals, const TypeBase& base,
                                    Rng& rng);

// Moment-matched type base from within-cluster spread: per dimension,
// shape*scale is half the mean within-cluster variance and shape*scale^2 the
// variance of those variances, over clusters with at least two members.
// `assignment[i]` indexes `means`; entries with fewer than two members are ignored.
TypeBase adapt_type_base(const Matrix& data, std::span<const std::size_t> assignment,
                         std::span<const Vector> means);

inline constexpr double kMinVariance = 1e-8;
inline constexpr double kMinTypeScale = 1e-3;

// A publication in the size-ordered sequence the conditional type prior
// consumes: descending size, ties by ascending id.
struct SizedPublication {
  VectorView mean;
  std::size_t size = 0;
  std::size_t id = 0;
};

// log G0t(t) + sum_j [(2(j-1) - J) log G0p(p_j) + sum_{k<j} log(lambda exp(-lambda |p_j - p_k|_t^2))].
// DomainError if `publications` is not in the required order.
double conditional_type_logprior(VectorView precision, std::span<const SizedPublication> publications,
                                 const TypeBase& type_base, const PublicationBase& pub_base,
                                 const ConditionalPriorConfig& config);

// conditional_type_logprior with the precision-free parts precomputed, so each
// evaluation costs O(dim).
class ConditionalTypePrior {
 public:
  ConditionalTypePrior() = default;
  ConditionalTypePrior(std::span<const SizedPublication> publications,
                       const PublicationBase& pub_base, const ConditionalPriorConfig& config);

  // log of the conditional prior divided by G0t(t).
  double log_tilt(VectorView precision) const;
  double log_density(VectorView precision, const TypeBase& type_base) const {
    return type_base.log_density(precision) + log_tilt(precision);
  }
  double constant() const noexcept { return constant_; }
  // The precision-dependent part of log_tilt: -lambda * sum_f t_f D_f.
  double log_coupling(VectorView precision) const;

 private:
  double constant_ = 0.0;  // sum of G0p exponents plus n_pairs * log(lambda)
  double lambda_ = 1.0;
  Vector pair_sq_sum_;  // sum over unordered pairs of (p_jf - p_kf)^2
};

void check_size_order(std::span<const SizedPublication> publications);

}  // namespace dpsc
