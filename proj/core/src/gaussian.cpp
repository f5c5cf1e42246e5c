#include "dpsc/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dpsc/error.hpp"

namespace dpsc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

void require_dims(std::size_t a, std::size_t b, const char* where) {
  if (a != b) {
    throw DomainError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                      " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

PublicationBase PublicationBase::isotropic(std::size_t dim, double variance) {
  return {Vector(dim, 0.0), variance};
}

double PublicationBase::log_density(VectorView mean) const {
  require_dims(mean.size(), dim(), "PublicationBase::log_density");
  double lp = 0.0;
  for (std::size_t f = 0; f < mean.size(); ++f) {
    const double d = mean[f] - prior_mean[f];
    lp += -0.5 * (kLogTwoPi + std::log(variance)) - 0.5 * d * d / variance;
  }
  return lp;
}

Vector PublicationBase::sample(Rng& rng) const {
  Vector out(dim());
  const double sd = std::sqrt(variance);
  for (std::size_t f = 0; f < out.size(); ++f) out[f] = normal(rng, prior_mean[f], sd);
  return out;
}

TypeBase TypeBase::uniform(std::size_t dim, double shape, double scale) {
  return {Vector(dim, shape), Vector(dim, scale)};
}

double TypeBase::log_density(VectorView precision) const {
  require_dims(precision.size(), dim(), "TypeBase::log_density");
  double lp = 0.0;
  for (std::size_t f = 0; f < precision.size(); ++f) {
    const double a = shape[f];
    const double rate = 1.0 / scale[f];
    const double t = precision[f];
    lp += a * std::log(rate) - std::lgamma(a) + (a - 1.0) * std::log(t) - rate * t;
  }
  return lp;
}

Vector TypeBase::sample(Rng& rng) const {
  Vector out(dim());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = gamma_shape_rate(rng, shape[f], 1.0 / scale[f]);
  }
  return out;
}

bool TypeBase::valid() const noexcept {
  if (shape.size() != scale.size()) return false;
  for (std::size_t f = 0; f < shape.size(); ++f) {
    if (!(shape[f] > 0.0) || !(scale[f] > 0.0) || !std::isfinite(shape[f]) ||
        !std::isfinite(scale[f])) {
      return false;
    }
  }
  return true;
}

double data_loglik(VectorView r, VectorView mean, VectorView precision) {
  require_dims(r.size(), mean.size(), "data_loglik");
  require_dims(r.size(), precision.size(), "data_loglik");
  double lp = 0.0;
  for (std::size_t f = 0; f < r.size(); ++f) {
    const double d = r[f] - mean[f];
    lp += 0.5 * (std::log(precision[f]) - kLogTwoPi) - 0.5 * precision[f] * d * d;
  }
  return lp;
}

double data_loglik(VectorView r, const Publication& p, const ReferenceType& t) {
  return data_loglik(r, p.mean, t.precision);
}

double marginal_loglik_new_publication(VectorView r, VectorView precision,
                                       const PublicationBase& base) {
  require_dims(r.size(), precision.size(), "marginal_loglik_new_publication");
  require_dims(r.size(), base.dim(), "marginal_loglik_new_publication");
  double lp = 0.0;
  for (std::size_t f = 0; f < r.size(); ++f) {
    const double var = base.variance + 1.0 / precision[f];
    const double d = r[f] - base.prior_mean[f];
    lp += -0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
  }
  return lp;
}

double marginal_loglik_new_type(VectorView r, VectorView mean, const TypeBase& base) {
  require_dims(r.size(), mean.size(), "marginal_loglik_new_type");
  require_dims(r.size(), base.dim(), "marginal_loglik_new_type");
  double lp = 0.0;
  for (std::size_t f = 0; f < r.size(); ++f) {
    const double a = base.shape[f];
    const double rate = 1.0 / base.scale[f];
    const double d = r[f] - mean[f];
    lp += a * std::log(rate) + std::lgamma(a + 0.5) - std::lgamma(a) - 0.5 * kLogTwoPi -
          (a + 0.5) * std::log(rate + 0.5 * d * d);
  }
  return lp;
}

double weighted_sq_distance(VectorView x, VectorView y, VectorView precision) {
  require_dims(x.size(), y.size(), "weighted_sq_distance");
  require_dims(x.size(), precision.size(), "weighted_sq_distance");
  double s = 0.0;
  for (std::size_t f = 0; f < x.size(); ++f) {
    const double d = x[f] - y[f];
    s += precision[f] * d * d;
  }
  return s;
}

void PublicationStats::add(VectorView r, VectorView precision) {
  require_dims(r.size(), precision_sum_.size(), "PublicationStats::add");
  require_dims(precision.size(), precision_sum_.size(), "PublicationStats::add");
  for (std::size_t f = 0; f < r.size(); ++f) {
    precision_sum_[f] += precision[f];
    weighted_sum_[f] += precision[f] * r[f];
  }
}

NormalPosterior PublicationStats::posterior(const PublicationBase& base) const {
  require_dims(base.dim(), precision_sum_.size(), "PublicationStats::posterior");
  NormalPosterior post{Vector(base.dim()), Vector(base.dim())};
  for (std::size_t f = 0; f < base.dim(); ++f) {
    const double prec = 1.0 / base.variance + precision_sum_[f];
    post.variance[f] = 1.0 / prec;
    post.mean[f] = (base.prior_mean[f] / base.variance + weighted_sum_[f]) / prec;
  }
  return post;
}

void TypeStats::add(VectorView r, VectorView mean) {
  require_dims(r.size(), sq_sum_.size(), "TypeStats::add");
  require_dims(mean.size(), sq_sum_.size(), "TypeStats::add");
  for (std::size_t f = 0; f < r.size(); ++f) {
    const double d = r[f] - mean[f];
    sq_sum_[f] += d * d;
  }
  ++count_;
}

GammaPosterior TypeStats::posterior(const TypeBase& base) const {
  require_dims(base.dim(), sq_sum_.size(), "TypeStats::posterior");
  GammaPosterior post{Vector(base.dim()), Vector(base.dim())};
  for (std::size_t f = 0; f < base.dim(); ++f) {
    post.shape[f] = base.shape[f] + 0.5 * static_cast<double>(count_);
    post.rate[f] = 1.0 / base.scale[f] + 0.5 * sq_sum_[f];
  }
  return post;
}

NormalPosterior publication_posterior(std::span<const PrecisionObservation> targets,
                                      const PublicationBase& base) {
  PublicationStats stats(base.dim());
  for (const auto& obs : targets) stats.add(obs.value, obs.precision);
  return stats.posterior(base);
}

GammaPosterior type_posterior(std::span<const Residual> residuals, const TypeBase& base) {
  TypeStats stats(base.dim());
  for (const auto& res : residuals) stats.add(res.value, res.mean);
  return stats.posterior(base);
}

Vector sample(const NormalPosterior& posterior, Rng& rng) {
  Vector out(posterior.mean.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = normal(rng, posterior.mean[f], std::sqrt(posterior.variance[f]));
  }
  return out;
}

Vector sample(const GammaPosterior& posterior, Rng& rng) {
  Vector out(posterior.shape.size());
  for (std::size_t f = 0; f < out.size(); ++f) {
    out[f] = gamma_shape_rate(rng, posterior.shape[f], posterior.rate[f]);
  }
  return out;
}

Publication posterior_sample_publication(std::span<const PrecisionObservation> targets,
                                         const PublicationBase& base, Rng& rng) {
  return {sample(publication_posterior(targets, base), rng)};
}

ReferenceType posterior_sample_type(std::span<const Residual> residuals, const TypeBase& base,
                                    Rng& rng) {
  return {sample(type_posterior(residuals, base), rng)};
}

TypeBase adapt_type_base(const Matrix& data, std::span<const std::size_t> assignment,
                         std::span<const Vector> means) {
  const std::size_t dim = data.cols();
  if (assignment.size() != data.rows()) {
    throw DomainError("adapt_type_base: " + std::to_string(assignment.size()) +
                      " assignments for " + std::to_string(data.rows()) + " items");
  }
  std::vector<std::size_t> counts(means.size(), 0);
  std::vector<double> sq(means.size() * dim, 0.0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const std::size_t k = assignment[i];
    if (k >= means.size()) throw DomainError("adapt_type_base: assignment out of range");
    require_dims(means[k].size(), dim, "adapt_type_base");
    const auto r = data.row(i);
    for (std::size_t f = 0; f < dim; ++f) {
      const double d = r[f] - means[k][f];
      sq[k * dim + f] += d * d;
    }
    ++counts[k];
  }

  std::vector<std::size_t> usable;
  for (std::size_t k = 0; k < means.size(); ++k) {
    if (counts[k] >= 2) usable.push_back(k);
  }
  if (usable.size() < 2) return TypeBase::uniform(dim);

  TypeBase base{Vector(dim), Vector(dim)};
  const double m = static_cast<double>(usable.size());
  for (std::size_t f = 0; f < dim; ++f) {
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k : usable) {
      const double v = std::max(sq[k * dim + f] / static_cast<double>(counts[k]), kMinVariance);
      sum += v;
      sum_sq += v * v;
    }
    const double mean_v = sum / m;
    const double var_v = std::max(sum_sq / m - mean_v * mean_v, 0.0);
    if (var_v < kMinVariance) {
      base.scale[f] = kMinTypeScale;
      base.shape[f] = 0.5 * mean_v / kMinTypeScale;
    } else {
      base.scale[f] = 2.0 * var_v / mean_v;
      base.shape[f] = mean_v * mean_v / (4.0 * var_v);
    }
  }
  return base;
}

void check_size_order(std::span<const SizedPublication> publications) {
  for (std::size_t j = 1; j < publications.size(); ++j) {
    const auto& a = publications[j - 1];
    const auto& b = publications[j];
    const bool ordered = a.size > b.size || (a.size == b.size && a.id < b.id);
    if (!ordered) {
      throw DomainError("conditional type prior: publications must be ordered by descending "
                        "size then ascending id (position " + std::to_string(j) + ")");
    }
  }
}

double conditional_type_logprior(VectorView precision, std::span<const SizedPublication> publications,
                                 const TypeBase& type_base, const PublicationBase& pub_base,
                                 const ConditionalPriorConfig& config) {
  check_size_order(publications);
  const double log_lambda = std::log(config.lambda);
  const double big_j = static_cast<double>(publications.size());
  double lp = type_base.log_density(precision);
  for (std::size_t j = 0; j < publications.size(); ++j) {
    const double exponent = 2.0 * static_cast<double>(j) - big_j;
    lp += exponent * pub_base.log_density(publications[j].mean);
    for (std::size_t k = 0; k < j; ++k) {
      lp += log_lambda -
            config.lambda *
                weighted_sq_distance(publications[j].mean, publications[k].mean, precision);
    }
  }
  return lp;
}

ConditionalTypePrior::ConditionalTypePrior(std::span<const SizedPublication> publications,
                                           const PublicationBase& pub_base,
                                           const ConditionalPriorConfig& config)
    : lambda_(config.lambda), pair_sq_sum_(pub_base.dim(), 0.0) {
  check_size_order(publications);
  const std::size_t count = publications.size();
  const double big_j = static_cast<double>(count);
  const std::size_t dim = pub_base.dim();
  Vector sum(dim, 0.0);
  Vector sum_sq(dim, 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    const auto mean = publications[j].mean;
    require_dims(mean.size(), dim, "ConditionalTypePrior");
    constant_ += (2.0 * static_cast<double>(j) - big_j) * pub_base.log_density(mean);
    for (std::size_t f = 0; f < dim; ++f) {
      sum[f] += mean[f];
      sum_sq[f] += mean[f] * mean[f];
    }
  }
  // sum_{j<k} (x_j - x_k)^2 = J sum x^2 - (sum x)^2
  for (std::size_t f = 0; f < dim; ++f) {
    pair_sq_sum_[f] = std::max(big_j * sum_sq[f] - sum[f] * sum[f], 0.0);
  }
  const double pairs = 0.5 * big_j * (big_j - 1.0);
  constant_ += pairs * std::log(config.lambda);
}

double ConditionalTypePrior::log_tilt(VectorView precision) const {
  return constant_ + log_coupling(precision);
}

double ConditionalTypePrior::log_coupling(VectorView precision) const {
  require_dims(precision.size(), pair_sq_sum_.size(), "ConditionalTypePrior::log_coupling");
  double s = 0.0;
  for (std::size_t f = 0; f < precision.size(); ++f) s += precision[f] * pair_sq_sum_[f];
  return -lambda_ * s;
}

}  // namespace dpsc
