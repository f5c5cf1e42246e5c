#include "dpsc/partition.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "dpsc/error.hpp"

namespace dpsc {

namespace {

const std::shared_ptr<const ItemIds>& empty_ids() {
  static const auto ids = std::make_shared<const ItemIds>();
  return ids;
}

}  // namespace

Partition::Partition(std::span<const std::string> item_ids,
                     std::span<const std::string> cluster_ids) {
  if (item_ids.size() != cluster_ids.size()) {
    throw DomainError("partition: " + std::to_string(item_ids.size()) + " items but " +
                      std::to_string(cluster_ids.size()) + " cluster ids");
  }
  std::vector<std::size_t> order(item_ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return item_ids[a] < item_ids[b]; });

  auto sorted = std::make_shared<ItemIds>();
  sorted->reserve(order.size());
  std::unordered_map<std::string, std::size_t> names;
  std::vector<std::size_t> raw;
  raw.reserve(order.size());
  for (std::size_t i : order) {
    if (!sorted->empty() && sorted->back() == item_ids[i]) {
      throw DomainError("partition: duplicate item id '" + item_ids[i] + "'");
    }
    sorted->push_back(item_ids[i]);
    auto [it, inserted] = names.try_emplace(cluster_ids[i], names.size());
    raw.push_back(it->second);
  }
  items_ = std::move(sorted);
  canonicalize(raw);
}

Partition::Partition(std::shared_ptr<const ItemIds> sorted_items,
                     std::span<const std::size_t> labels)
    : items_(std::move(sorted_items)) {
  if (!items_) items_ = empty_ids();
  if (items_->size() != labels.size()) {
    throw DomainError("partition: " + std::to_string(items_->size()) + " items but " +
                      std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 1; i < items_->size(); ++i) {
    if (!((*items_)[i - 1] < (*items_)[i])) {
      throw DomainError("partition: item ids must be sorted and unique near '" +
                        (*items_)[i] + "'");
    }
  }
  canonicalize(labels);
}

Partition Partition::from_labels(std::span<const std::size_t> labels) {
  return Partition(index_ids(labels.size()), labels);
}

Partition Partition::from_clusters(const std::vector<std::vector<std::string>>& clusters) {
  std::vector<std::string> items;
  std::vector<std::string> names;
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    if (clusters[k].empty()) throw DomainError("partition: empty cluster");
    for (const auto& id : clusters[k]) {
      items.push_back(id);
      names.push_back(std::to_string(k));
    }
  }
  return Partition(items, names);
}

std::shared_ptr<const ItemIds> Partition::index_ids(std::size_t n) {
  std::size_t width = 1;
  for (std::size_t v = n > 0 ? n - 1 : 0; v >= 10; v /= 10) ++width;
  auto ids = std::make_shared<ItemIds>();
  ids->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string s = std::to_string(i);
    ids->push_back(std::string(width - s.size(), '0') + s);
  }
  return ids;
}

const ItemIds& Partition::items() const { return items_ ? *items_ : *empty_ids(); }

void Partition::canonicalize(std::span<const std::size_t> raw) {
  // First occurrence in ascending-id order is exactly "smallest member id".
  std::unordered_map<std::size_t, std::size_t> relabel;
  labels_.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(raw[i], relabel.size());
    labels_[i] = it->second;
  }
  num_clusters_ = relabel.size();
}

std::vector<std::size_t> Partition::cluster_sizes() const {
  std::vector<std::size_t> sizes(num_clusters_, 0);
  for (std::size_t l : labels_) ++sizes[l];
  return sizes;
}

std::vector<std::vector<std::size_t>> Partition::clusters() const {
  std::vector<std::vector<std::size_t>> out(num_clusters_);
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(i);
  return out;
}

bool Partition::same_items(const Partition& other) const {
  return items_ == other.items_ || items() == other.items();
}

bool operator==(const Partition& a, const Partition& b) {
  return a.labels_ == b.labels_ && a.same_items(b);
}

std::ostream& operator<<(std::ostream& os, const Partition& p) {
  const auto groups = p.clusters();
  os << '{';
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (k) os << ',';
    os << '{';
    for (std::size_t j = 0; j < groups[k].size(); ++j) {
      if (j) os << ',';
      os << p.items()[groups[k][j]];
    }
    os << '}';
  }
  return os << '}';
}

Partition read_partition(std::istream& in) {
  std::vector<std::string> items;
  std::vector<std::string> clusters;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw ParseError("expected 'item_id<TAB>cluster_id'", lineno);
    }
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError("more than two tab-separated fields", lineno);
    }
    items.push_back(line.substr(0, tab));
    clusters.push_back(line.substr(tab + 1));
  }
  try {
    return Partition(items, clusters);
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  }
}

Partition read_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open partition file '" + path.string() + "'");
  try {
    return read_partition(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_partition(std::ostream& out, const Partition& p) {
  const auto& ids = p.items();
  for (std::size_t i = 0; i < p.size(); ++i) out << ids[i] << '\t' << p.labels()[i] << '\n';
}

void write_partition(const std::filesystem::path& path, const Partition& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write partition file '" + path.string() + "'");
  write_partition(out, p);
}

}  // namespace dpsc
