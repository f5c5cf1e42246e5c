#include "dpsc/dp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "dpsc/error.hpp"

namespace dpsc {

namespace {

void require_alpha(double alpha, const char* where) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw DomainError(std::string(where) + ": alpha must be positive and finite, got " +
                      std::to_string(alpha));
  }
}

}  // namespace

void GammaPrior::validate() const {
  if (!(shape > 0.0) || !(scale > 0.0) || !std::isfinite(shape) || !std::isfinite(scale)) {
    std::ostringstream os;
    os << "gamma prior needs positive shape and scale, got shape=" << shape
       << " scale=" << scale;
    throw ConfigError(os.str());
  }
}

std::vector<double> crp_predictive_weights(std::span<const std::size_t> cluster_sizes,
                                           double alpha) {
  require_alpha(alpha, "crp_predictive_weights");
  std::vector<double> w;
  w.reserve(cluster_sizes.size() + 1);
  for (std::size_t s : cluster_sizes) {
    if (s == 0) throw DomainError("crp_predictive_weights: empty cluster");
    w.push_back(static_cast<double>(s));
  }
  w.push_back(alpha);
  return w;
}

std::vector<std::size_t> crp_sample_labels(double alpha, std::size_t n, Rng& rng) {
  require_alpha(alpha, "crp_sample");
  std::vector<std::size_t> labels;
  labels.reserve(n);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < n; ++i) {
    // Total mass is i + alpha; walk the existing tables, else open a new one.
    double u = uniform01(rng) * (static_cast<double>(i) + alpha);
    std::size_t table = sizes.size();
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      u -= static_cast<double>(sizes[k]);
      if (u < 0.0) {
        table = k;
        break;
      }
    }
    if (table == sizes.size()) sizes.push_back(0);
    ++sizes[table];
    labels.push_back(table);
  }
  return labels;
}

Partition crp_sample(double alpha, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("crp_sample: n must be at least 1");
  const auto labels = crp_sample_labels(alpha, n, rng);
  return Partition::from_labels(labels);
}

ClusterMoments expected_clusters(double alpha, std::size_t n) {
  require_alpha(alpha, "expected_clusters");
  if (n == 0) throw DomainError("expected_clusters: n must be at least 1");
  double mean = 0.0;
  double var = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double denom = alpha + static_cast<double>(i - 1);
    const double p = alpha / denom;  // table i is new
    mean += p;
    var += p * (1.0 - p);
  }
  return {mean, std::sqrt(std::max(var, 0.0))};
}

double antoniak_log_prior(std::size_t k, double alpha, std::size_t n) {
  require_alpha(alpha, "antoniak_log_prior");
  if (k < 1 || k > n) {
    throw DomainError("antoniak_log_prior: need 1 <= k <= n, got k=" + std::to_string(k) +
                      " n=" + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  return static_cast<double>(k) * std::log(alpha) + std::lgamma(alpha) - std::lgamma(alpha + nd);
}

double crp_log_eppf(std::span<const std::size_t> cluster_sizes, double alpha) {
  require_alpha(alpha, "crp_log_eppf");
  std::size_t n = 0;
  double lp = 0.0;
  for (std::size_t s : cluster_sizes) {
    if (s == 0) throw DomainError("crp_log_eppf: empty cluster");
    n += s;
    lp += std::log(alpha) + std::lgamma(static_cast<double>(s));
  }
  return lp + std::lgamma(alpha) - std::lgamma(alpha + static_cast<double>(n));
}

double sample_precision_single(double alpha_old, std::size_t n, std::size_t k,
                               const GammaPrior& prior, Rng& rng) {
  require_alpha(alpha_old, "sample_precision_single");
  prior.validate();
  if (k < 1 || k > n) {
    throw DomainError("sample_precision_single: need 1 <= k <= n, got k=" + std::to_string(k) +
                      " n=" + std::to_string(n));
  }
  const double nd = static_cast<double>(n);
  const double kd = static_cast<double>(k);
  const double x = beta(rng, alpha_old + 1.0, nd);
  const double rate = prior.rate() - std::log(x);
  const double odds = (prior.shape + kd - 1.0) / (nd * rate);
  const double pi = odds / (1.0 + odds);
  const double shape = uniform01(rng) < pi ? prior.shape + kd : prior.shape + kd - 1.0;
  return gamma_shape_rate(rng, shape, rate);
}

double sample_precision_multi(double alpha_old, std::span<const ObservationPair> pairs,
                              const GammaPrior& prior, std::size_t gibbs_iters, Rng& rng) {
  require_alpha(alpha_old, "sample_precision_multi");
  prior.validate();
  if (pairs.empty()) throw DomainError("sample_precision_multi: no observation pairs");
  if (gibbs_iters == 0) throw ConfigError("sample_precision_multi: gibbs_iters must be >= 1");

  const std::size_t m_count = pairs.size();
  double k_total = 0.0;
  for (const auto& p : pairs) {
    if (p.n_clusters < 1 || p.n_clusters > p.n_items) {
      throw DomainError("sample_precision_multi: need 1 <= k <= n, got k=" +
                        std::to_string(p.n_clusters) + " n=" + std::to_string(p.n_items));
    }
    k_total += static_cast<double>(p.n_clusters);
  }
  // Mixture components are Gamma(a_hat + 1 + sum(i), b_hat).
  const double a_hat = prior.shape - static_cast<double>(m_count) - 1.0 + k_total;
  if (!(a_hat > -1.0)) {
    std::ostringstream os;
    os << "alpha posterior is improper: prior shape " << prior.shape << " with "
       << m_count << " observation pairs and " << k_total
       << " total clusters gives mixture shape offset " << a_hat
       << " <= -1; raise the prior shape above " << (static_cast<double>(m_count) - k_total);
    throw ConfigError(os.str());
  }

  double b_hat = prior.rate();
  for (const auto& p : pairs) {
    b_hat -= std::log(beta(rng, alpha_old + 1.0, static_cast<double>(p.n_items)));
  }

  // Weight of i is Gamma(a_hat + 1 + S) * prod (n_m b_hat)^(1 - i_m), so
  // p(i_m = 1 | rest) = (a_hat + 1 + S_-m) / (a_hat + 1 + S_-m + n_m b_hat).
  std::vector<char> ind(m_count, 1);
  std::size_t ones = m_count;
  const std::size_t keep_from = gibbs_iters / 2;
  std::vector<std::size_t> retained;
  retained.reserve(gibbs_iters - keep_from);
  for (std::size_t sweep = 0; sweep < gibbs_iters; ++sweep) {
    for (std::size_t m = 0; m < m_count; ++m) {
      const double others = static_cast<double>(ones - (ind[m] ? 1 : 0));
      const double num = a_hat + 1.0 + others;
      const double p1 = num / (num + static_cast<double>(pairs[m].n_items) * b_hat);
      const bool on = uniform01(rng) < p1;
      if (on != static_cast<bool>(ind[m])) {
        ones = on ? ones + 1 : ones - 1;
        ind[m] = on ? 1 : 0;
      }
    }
    if (sweep >= keep_from) retained.push_back(ones);
  }
  const std::size_t pick =
      std::uniform_int_distribution<std::size_t>(0, retained.size() - 1)(rng);
  const double shape = a_hat + 1.0 + static_cast<double>(retained[pick]);
  return gamma_shape_rate(rng, shape, b_hat);
}

ClusterCountCurve appropriateness_curve(std::span<const Partition> labeled_pools,
                                        std::span<const std::size_t> ns,
                                        const AppropriatenessOptions& options, Rng& rng) {
  if (labeled_pools.empty()) throw DomainError("appropriateness_curve: no labeled pools");
  if (options.resamples < 1) throw ConfigError("appropriateness_curve: resamples must be >= 1");
  if (options.alpha_draws < 1) throw ConfigError("appropriateness_curve: alpha_draws must be >= 1");
  options.prior.validate();

  std::vector<ObservationPair> pairs;
  std::vector<std::size_t> class_of;  // pooled item -> globally unique class
  std::size_t class_offset = 0;
  for (const auto& pool : labeled_pools) {
    if (pool.empty()) throw DomainError("appropriateness_curve: empty pool");
    pairs.push_back({pool.size(), pool.num_clusters()});
    for (std::size_t l : pool.labels()) class_of.push_back(class_offset + l);
    class_offset += pool.num_clusters();
  }
  for (std::size_t n : ns) {
    if (n < 1 || n > class_of.size()) {
      throw DomainError("appropriateness_curve: N=" + std::to_string(n) +
                        " outside [1, " + std::to_string(class_of.size()) + "]");
    }
  }

  double alpha = options.prior.mean();
  for (std::size_t i = 0; i < options.alpha_burn_in; ++i) {
    alpha = sample_precision_multi(alpha, pairs, options.prior, options.gibbs_iters, rng);
  }
  double alpha_sum = 0.0;
  for (std::size_t i = 0; i < options.alpha_draws; ++i) {
    alpha = sample_precision_multi(alpha, pairs, options.prior, options.gibbs_iters, rng);
    alpha_sum += alpha;
  }

  ClusterCountCurve curve;
  curve.alpha = alpha_sum / static_cast<double>(options.alpha_draws);

  std::vector<std::size_t> index(class_of.size());
  std::vector<char> seen(class_offset, 0);
  for (std::size_t n : ns) {
    const ClusterMoments dp = expected_clusters(curve.alpha, n);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < options.resamples; ++r) {
      std::iota(index.begin(), index.end(), 0);
      std::size_t distinct = 0;
      // Partial Fisher-Yates: the first n slots are a uniform subsample.
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = std::uniform_int_distribution<std::size_t>(i, index.size() - 1)(rng);
        std::swap(index[i], index[j]);
        const std::size_t cls = class_of[index[i]];
        if (!seen[cls]) {
          seen[cls] = 1;
          ++distinct;
        }
      }
      for (std::size_t i = 0; i < n; ++i) seen[class_of[index[i]]] = 0;
      const double d = static_cast<double>(distinct);
      sum += d;
      sum_sq += d * d;
    }
    const double count = static_cast<double>(options.resamples);
    const double mean = sum / count;
    const double var = std::max(sum_sq / count - mean * mean, 0.0);
    curve.rows.push_back({n, dp.mean, dp.std, mean, std::sqrt(var)});
  }
  return curve;
}

}  // namespace dpsc
