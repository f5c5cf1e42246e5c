#pragma once

#include <cstddef>
#include <cstdint>

#include "dpsc/partition.hpp"

namespace dpsc {

// Unordered item pairs classified by co-membership in (gold, hypothesis):
// n11 together in both, n00 apart in both, n10 together only in gold,
// n01 together only in the hypothesis.
struct PairCounts {
  std::uint64_t n11 = 0;
  std::uint64_t n00 = 0;
  std::uint64_t n10 = 0;
  std::uint64_t n01 = 0;

  std::uint64_t total() const noexcept { return n11 + n00 + n10 + n01; }
  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

struct VariationOfInformation {
  double vi = 0.0;   // nats
  double nvi = 0.0;  // 1 - vi / log N
};

struct MetricReport {
  double rand_index = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double ced_gh = 0.0;  // edits turning the hypothesis into gold
  double ced_hg = 0.0;  // edits turning gold into the hypothesis
  double nes = 0.0;
  double vi = 0.0;
  double nvi = 0.0;
};

// All metrics require both partitions over the identical item set with N >= 2;
// otherwise DomainError (naming missing/extra ids on mismatch).
PairCounts pair_counts(const Partition& gold, const Partition& hyp);
double rand_index(const Partition& gold, const Partition& hyp);
PrecisionRecall precision_recall_f(const Partition& gold, const Partition& hyp);

// F as the harmonic mean 2PR/(P+R), 0 when P+R == 0.
double f_score(double precision, double recall) noexcept;

// Minimum number of moves (one element to any existing or new cluster) and
// merges (two clusters) that turn `hyp` into `gold`. Splits are not allowed.
std::size_t cluster_edit_distance(const Partition& gold, const Partition& hyp);
double normalized_edit_score(const Partition& gold, const Partition& hyp);

VariationOfInformation variation_of_information(const Partition& gold, const Partition& hyp);

MetricReport full_report(const Partition& gold, const Partition& hyp);

// Throws DomainError unless both cover the same ids and N >= 2.
void check_comparable(const Partition& gold, const Partition& hyp);

}  // namespace dpsc
