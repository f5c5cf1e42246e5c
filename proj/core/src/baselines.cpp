#include "dpsc/baselines.hpp"

#include <limits>
#include <numeric>

#include "dpsc/error.hpp"
#include "dpsc/random.hpp"
#include "dpsc/sampler.hpp"

namespace dpsc {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t f = 0; f < a.size(); ++f) {
    const double d = a[f] - b[f];
    s += d * d;
  }
  return s;
}

struct Run {
  std::vector<std::size_t> labels;
  Matrix centers;
  double wcss = 0.0;
  std::size_t iterations = 0;
  std::vector<double> trace;
};

Run lloyd(const Matrix& points, const KMeansConfig& config, Rng& rng) {
  const std::size_t n = points.rows();
  const std::size_t dim = points.cols();
  const std::size_t k = config.k;
  Run run;
  run.centers = Matrix(k, dim);

  // Farthest-first seeding from a random start.
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(points.row(pick).begin(), points.row(pick).end(), run.centers.row(c).begin());
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], sq_dist(points.row(i), run.centers.row(c)));
      if (nearest[i] > far_d) {
        far_d = nearest[i];
        far = i;
      }
    }
    pick = far;
  }

  run.labels.assign(n, 0);
  std::vector<std::size_t> counts(k);
  for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
    bool changed = iter == 0;
    double wcss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(points.row(i), run.centers.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (best != run.labels[i]) changed = true;
      run.labels[i] = best;
      wcss += best_d;
    }
    run.trace.push_back(wcss);
    run.iterations = iter + 1;
    if (!changed) break;

    Matrix sums(k, dim);
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = points.row(i);
      auto s = sums.row(run.labels[i]);
      for (std::size_t f = 0; f < dim; ++f) s[f] += r[f];
      ++counts[run.labels[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Reseed to the point worst served by its current center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = sq_dist(points.row(i), run.centers.row(run.labels[i]));
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        std::copy(points.row(far).begin(), points.row(far).end(), run.centers.row(c).begin());
        --counts[run.labels[far]];
        run.labels[far] = c;
        counts[c] = 1;
        continue;
      }
      auto center = run.centers.row(c);
      const auto s = sums.row(c);
      for (std::size_t f = 0; f < dim; ++f) center[f] = s[f] / static_cast<double>(counts[c]);
    }
  }
  // Final objective against the final centers.
  run.wcss = 0.0;
  for (std::size_t i = 0; i < n; ++i) run.wcss += sq_dist(points.row(i), run.centers.row(run.labels[i]));
  return run;
}

}  // namespace

Partition coarse(std::span<const std::string> items) {
  if (items.empty()) throw DomainError("coarse: no items");
  std::vector<std::string> names(items.size(), "0");
  return Partition(items, names);
}

Partition fine(std::span<const std::string> items) {
  if (items.empty()) throw DomainError("fine: no items");
  std::vector<std::string> names;
  names.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) names.push_back(std::to_string(i));
  return Partition(items, names);
}

KMeansResult kmeans_fit(const Matrix& points, const KMeansConfig& config) {
  if (config.k < 1) throw DomainError("kmeans: k must be >= 1");
  if (config.restarts < 1) throw DomainError("kmeans: restarts must be >= 1");
  if (config.k > points.rows()) {
    throw DomainError("kmeans: k=" + std::to_string(config.k) + " exceeds N=" +
                      std::to_string(points.rows()));
  }
  Rng rng(splitmix64(config.seed));
  Run best;
  bool have = false;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    Run run = lloyd(points, config, rng);
    if (!have || run.wcss < best.wcss) {
      best = std::move(run);
      have = true;
    }
  }
  return {std::move(best.labels), std::move(best.centers), best.wcss, best.iterations,
          std::move(best.trace)};
}

Partition kmeans(std::span<const std::string> items, const Matrix& points,
                 const KMeansConfig& config) {
  if (items.size() != points.rows()) {
    throw DomainError("kmeans: " + std::to_string(items.size()) + " ids for " +
                      std::to_string(points.rows()) + " points");
  }
  const KMeansResult fit = kmeans_fit(points, config);
  std::vector<std::string> names;
  names.reserve(fit.labels.size());
  for (std::size_t l : fit.labels) names.push_back(std::to_string(l));
  return Partition(items, names);
}

SamplerConfig cdp_preset() {
  SamplerConfig config;
  config.variant = Variant::m1;
  config.alpha_p = 1.0;
  config.resample_alphas = false;
  config.freeze_types = true;
  config.use_training_labels = false;
  return config;
}

}  // namespace dpsc
