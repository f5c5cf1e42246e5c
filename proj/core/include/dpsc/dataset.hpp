#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dpsc/gaussian.hpp"
#include "dpsc/matrix.hpp"
#include "dpsc/partition.hpp"

namespace dpsc {

enum class Split { train, test };

struct Item {
  std::string id;
  Vector features;
  std::optional<std::string> label;
  Split split = Split::test;

  friend bool operator==(const Item&, const Item&) = default;
};

struct Dataset {
  std::size_t dim = 0;
  std::vector<Item> items;

  // ParseError-free structural check: shared dimension, unique ids,
  // labels on every training item. Throws DomainError.
  void validate() const;
  std::size_t count(Split split) const;
  Matrix features() const;
  // Gold partition of the items in `split`; DomainError if any is unlabeled.
  Partition gold(Split split) const;
  ItemIds ids(Split split) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

enum class DatasetFormat { csv, json };

// From the file extension (.json -> json, otherwise csv).
DatasetFormat format_for(const std::filesystem::path& path);

// CSV: header `id,split,label,f1..fF`; label may be empty on test rows.
Dataset read_dataset_csv(std::istream& in);
// JSON: {"dim": F, "items": [{"id", "split", "label" (string|null), "features": [...]}]}.
Dataset read_dataset_json(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path);

// Shortest round-trip decimal formatting, so write -> read is the identity.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_json(std::ostream& out, const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data, DatasetFormat format);

struct Standardization {
  Vector mean;
  Vector scale;  // per-dimension std of the training items, clamped >= kMinScale

  static constexpr double kMinScale = 1e-8;
  Vector apply(VectorView x) const;
};

struct Standardized {
  Dataset data;
  Standardization transform;
};

// Center and scale every item with statistics of the training items only.
Standardized standardize(const Dataset& data);

struct SynthConfig {
  std::size_t n_train_classes = 5;
  std::size_t n_test_classes = 5;
  std::size_t dim = 2;
  std::size_t min_class_size = 30;
  std::size_t max_class_size = 300;
  // Expected Euclidean distance between two class centers, in within-class std units.
  double separation = 5.0;
  std::uint64_t seed = 0;

  void validate() const;  // ConfigError
};

// Isotropic unit-variance Gaussian classes; training and test classes are
// disjoint label sets and item order is shuffled.
Dataset synth_gaussian(const SynthConfig& config);

// Center spread s such that E|c_i - c_j| = separation for c ~ Normal(0, s^2 I_dim).
double center_scale_for_separation(double separation, std::size_t dim);

// |mean(A) - mean(B)|^2 from pairwise squared distances only: `ab` is I x J
// (between A and B), `aa` is I x I and `bb` is J x J (upper triangles used).
double squared_mean_distance(const Matrix& ab, const Matrix& aa, const Matrix& bb);

}  // namespace dpsc
