#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dpsc {

using ItemIds = std::vector<std::string>;

// A total assignment of item ids to clusters.
//
// Items are held in ascending id order and clusters are relabeled to the
// canonical form 0..K-1 ordered by smallest member id, so two partitions
// are equivalent exactly when they compare equal. The item list is shared
// between partitions built over the same ids.
class Partition {
 public:
  Partition() = default;

  // item_ids[i] belongs to cluster cluster_ids[i]; cluster ids are opaque.
  Partition(std::span<const std::string> item_ids, std::span<const std::string> cluster_ids);

  // Over an already sorted, duplicate-free item list; labels are opaque.
  Partition(std::shared_ptr<const ItemIds> sorted_items, std::span<const std::size_t> labels);

  // Items named by zero-padded index ("0".."n-1" padded to equal width).
  static Partition from_labels(std::span<const std::size_t> labels);
  static Partition from_clusters(const std::vector<std::vector<std::string>>& clusters);

  static std::shared_ptr<const ItemIds> index_ids(std::size_t n);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  std::size_t num_clusters() const noexcept { return num_clusters_; }

  const ItemIds& items() const;
  const std::shared_ptr<const ItemIds>& shared_items() const noexcept { return items_; }
  // Canonical label of the i-th item (in ascending id order).
  std::span<const std::size_t> labels() const noexcept { return labels_; }
  std::vector<std::size_t> cluster_sizes() const;
  // Member indices per canonical cluster.
  std::vector<std::vector<std::size_t>> clusters() const;

  bool same_items(const Partition& other) const;

  friend bool operator==(const Partition& a, const Partition& b);

 private:
  void canonicalize(std::span<const std::size_t> raw);

  std::shared_ptr<const ItemIds> items_;
  std::vector<std::size_t> labels_;
  std::size_t num_clusters_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Partition& p);

// item_id<TAB>cluster_id per line, no header.
Partition read_partition(std::istream& in);
Partition read_partition(const std::filesystem::path& path);
void write_partition(std::ostream& out, const Partition& p);
void write_partition(const std::filesystem::path& path, const Partition& p);

}  // namespace dpsc
