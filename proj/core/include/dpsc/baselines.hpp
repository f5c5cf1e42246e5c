#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpsc/matrix.hpp"
#include "dpsc/partition.hpp"

namespace dpsc {

struct SamplerConfig;

// Every item in one cluster.
Partition coarse(std::span<const std::string> items);
// Every item in its own cluster.
Partition fine(std::span<const std::string> items);

struct KMeansConfig {
  std::size_t k = 2;
  std::size_t restarts = 10;
  std::size_t max_iters = 100;
  std::uint64_t seed = 0;
};

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centers;
  double wcss = 0.0;
  std::size_t iterations = 0;
  std::vector<double> wcss_trace;  // of the winning restart, one entry per Lloyd step
};

// Lloyd's algorithm from farthest-first seeding (random first center per
// restart); best restart by within-cluster sum of squares. Empty clusters are
// reseeded to the point farthest from its center.
KMeansResult kmeans_fit(const Matrix& points, const KMeansConfig& config);
Partition kmeans(std::span<const std::string> items, const Matrix& points,
                 const KMeansConfig& config);

// Unsupervised DP clustering: alpha_p fixed at 1, one frozen identity type,
// training labels ignored.
SamplerConfig cdp_preset();

}  // namespace dpsc
