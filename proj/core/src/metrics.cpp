#include "dpsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "dpsc/error.hpp"

namespace dpsc {

namespace {

std::uint64_t choose2(std::uint64_t n) { return n * (n - (n > 0 ? 1 : 0)) / 2; }

std::string id_list(const std::vector<std::string>& ids) {
  constexpr std::size_t kShown = 5;
  std::string out;
  for (std::size_t i = 0; i < ids.size() && i < kShown; ++i) {
    if (i) out += ", ";
    out += "'" + ids[i] + "'";
  }
  if (ids.size() > kShown) out += ", ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

struct Contingency {
  std::size_t n = 0;
  std::vector<std::size_t> gold_sizes;
  std::vector<std::size_t> hyp_sizes;
  // (gold, hyp) -> overlap, only non-zero cells.
  struct Cell {
    std::size_t gold;
    std::size_t hyp;
    std::size_t count;
  };
  std::vector<Cell> cells;
};

Contingency contingency(const Partition& gold, const Partition& hyp) {
  check_comparable(gold, hyp);
  Contingency t;
  t.n = gold.size();
  t.gold_sizes = gold.cluster_sizes();
  t.hyp_sizes = hyp.cluster_sizes();
  const std::uint64_t width = hyp.num_clusters();
  std::unordered_map<std::uint64_t, std::size_t> overlap;
  const auto g = gold.labels();
  const auto h = hyp.labels();
  for (std::size_t i = 0; i < t.n; ++i) ++overlap[g[i] * width + h[i]];
  t.cells.reserve(overlap.size());
  for (const auto& [key, count] : overlap) {
    t.cells.push_back({static_cast<std::size_t>(key / width), static_cast<std::size_t>(key % width),
                       count});
  }
  std::sort(t.cells.begin(), t.cells.end(), [](const auto& a, const auto& b) {
    return a.gold != b.gold ? a.gold < b.gold : a.hyp < b.hyp;
  });
  return t;
}

// Edits from `from` to `to`, given the cells indexed as (to-class, from-cluster).
//
// Any optimal edit sequence keeps each `from` cluster as the core of one target
// class and moves the remaining elements out, then merges cores that share a
// class. Keeping cluster h at its best overlap costs |h| - best(h) moves; each
// class used by at least one core saves one merge. A core may only land on a
// non-plurality class at a loss of at least one move, which never beats the
// saved merge, so the optimum is
//   N - sum_h best(h) + |from| - (maximum matching over plurality edges).
std::size_t edit_distance(std::size_t n, std::size_t to_count, std::size_t from_count,
                          const std::vector<Contingency::Cell>& cells, bool gold_is_target) {
  std::vector<std::size_t> best(from_count, 0);
  for (const auto& c : cells) {
    const std::size_t from = gold_is_target ? c.hyp : c.gold;
    best[from] = std::max(best[from], c.count);
  }
  std::vector<std::vector<std::size_t>> plurality(from_count);
  for (const auto& c : cells) {
    const std::size_t from = gold_is_target ? c.hyp : c.gold;
    const std::size_t to = gold_is_target ? c.gold : c.hyp;
    if (c.count == best[from]) plurality[from].push_back(to);
  }

  // Kuhn's augmenting paths; plurality lists are short in practice.
  std::vector<std::size_t> owner(to_count, from_count);
  std::vector<std::size_t> seen(to_count, from_count);
  std::size_t matched = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  for (std::size_t root = 0; root < from_count; ++root) {
    // Iterative DFS over alternating paths.
    stack.clear();
    stack.emplace_back(root, 0);
    std::vector<std::size_t> via;  // via[depth] = target class used to reach depth+1
    bool found = false;
    while (!stack.empty() && !found) {
      auto& [u, next] = stack.back();
      if (next >= plurality[u].size()) {
        stack.pop_back();
        if (!via.empty()) via.pop_back();
        continue;
      }
      const std::size_t v = plurality[u][next++];
      if (seen[v] == root) continue;
      seen[v] = root;
      via.push_back(v);
      if (owner[v] == from_count) {
        found = true;
      } else {
        stack.emplace_back(owner[v], 0);
      }
    }
    if (found) {
      // stack[i].first reached via[i].
      for (std::size_t i = 0; i < via.size(); ++i) owner[via[i]] = stack[i].first;
      ++matched;
    }
  }

  std::size_t kept = 0;
  for (std::size_t b : best) kept += b;
  return n - kept + from_count - matched;
}

}  // namespace

void check_comparable(const Partition& gold, const Partition& hyp) {
  if (!gold.same_items(hyp)) {
    const auto& a = gold.items();
    const auto& b = hyp.items();
    std::vector<std::string> missing;
    std::vector<std::string> extra;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(missing));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(extra));
    std::string msg = "item sets differ";
    if (!missing.empty()) msg += "; missing from hypothesis: " + id_list(missing);
    if (!extra.empty()) msg += "; not in gold: " + id_list(extra);
    throw DomainError(msg);
  }
  if (gold.size() < 2) {
    throw DomainError("metrics need at least 2 items, got " + std::to_string(gold.size()));
  }
}

PairCounts pair_counts(const Partition& gold, const Partition& hyp) {
  const Contingency t = contingency(gold, hyp);
  std::uint64_t together_both = 0;
  for (const auto& c : t.cells) together_both += choose2(c.count);
  std::uint64_t together_gold = 0;
  for (std::size_t s : t.gold_sizes) together_gold += choose2(s);
  std::uint64_t together_hyp = 0;
  for (std::size_t s : t.hyp_sizes) together_hyp += choose2(s);

  PairCounts pc;
  pc.n11 = together_both;
  pc.n10 = together_gold - together_both;
  pc.n01 = together_hyp - together_both;
  pc.n00 = choose2(t.n) - pc.n11 - pc.n10 - pc.n01;
  return pc;
}

double rand_index(const Partition& gold, const Partition& hyp) {
  const PairCounts pc = pair_counts(gold, hyp);
  return static_cast<double>(pc.n11 + pc.n00) / static_cast<double>(pc.total());
}

double f_score(double precision, double recall) noexcept {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrecisionRecall precision_recall_f(const Partition& gold, const Partition& hyp) {
  const PairCounts pc = pair_counts(gold, hyp);
  PrecisionRecall pr;
  // No predicted (resp. gold) positive pairs: nothing can be wrong, score 1.
  pr.precision = pc.n11 + pc.n01 == 0
                     ? 1.0
                     : static_cast<double>(pc.n11) / static_cast<double>(pc.n11 + pc.n01);
  pr.recall = pc.n11 + pc.n10 == 0
                  ? 1.0
                  : static_cast<double>(pc.n11) / static_cast<double>(pc.n11 + pc.n10);
  pr.f_score = f_score(pr.precision, pr.recall);
  return pr;
}

std::size_t cluster_edit_distance(const Partition& gold, const Partition& hyp) {
  const Contingency t = contingency(gold, hyp);
  return edit_distance(t.n, t.gold_sizes.size(), t.hyp_sizes.size(), t.cells, true);
}

double normalized_edit_score(const Partition& gold, const Partition& hyp) {
  const Contingency t = contingency(gold, hyp);
  const std::size_t gh = edit_distance(t.n, t.gold_sizes.size(), t.hyp_sizes.size(), t.cells, true);
  const std::size_t hg = edit_distance(t.n, t.hyp_sizes.size(), t.gold_sizes.size(), t.cells, false);
  return 1.0 - static_cast<double>(gh + hg) / (2.0 * static_cast<double>(t.n));
}

VariationOfInformation variation_of_information(const Partition& gold, const Partition& hyp) {
  const Contingency t = contingency(gold, hyp);
  const double n = static_cast<double>(t.n);
  // VI = -sum_ij p_ij [log(p_ij/p_i) + log(p_ij/p_j)]; every term is >= 0 and
  // exactly 0 for identical partitions.
  double vi = 0.0;
  for (const auto& c : t.cells) {
    const double nij = static_cast<double>(c.count);
    vi -= (nij / n) * (std::log(nij / static_cast<double>(t.gold_sizes[c.gold])) +
                       std::log(nij / static_cast<double>(t.hyp_sizes[c.hyp])));
  }
  vi = std::max(vi, 0.0);
  return {vi, 1.0 - vi / std::log(n)};
}

MetricReport full_report(const Partition& gold, const Partition& hyp) {
  const Contingency t = contingency(gold, hyp);
  MetricReport r;
  const PairCounts pc = pair_counts(gold, hyp);
  r.rand_index = static_cast<double>(pc.n11 + pc.n00) / static_cast<double>(pc.total());
  const PrecisionRecall pr = precision_recall_f(gold, hyp);
  r.precision = pr.precision;
  r.recall = pr.recall;
  r.f_score = pr.f_score;
  r.ced_gh = static_cast<double>(
      edit_distance(t.n, t.gold_sizes.size(), t.hyp_sizes.size(), t.cells, true));
  r.ced_hg = static_cast<double>(
      edit_distance(t.n, t.hyp_sizes.size(), t.gold_sizes.size(), t.cells, false));
  r.nes = 1.0 - (r.ced_gh + r.ced_hg) / (2.0 * static_cast<double>(t.n));
  const VariationOfInformation v = variation_of_information(gold, hyp);
  r.vi = v.vi;
  r.nvi = v.nvi;
  return r;
}

}  // namespace dpsc
