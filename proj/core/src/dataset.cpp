#include "dpsc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "dpsc/error.hpp"
#include "dpsc/random.hpp"

namespace dpsc {

namespace {

std::string_view split_name(Split s) { return s == Split::train ? "train" : "test"; }

std::optional<Split> parse_split(std::string_view s) {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ParseError("bad number '" + std::string(s) + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite feature '" + std::string(s) + "'", line);
  return v;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// Line-aware structural checks shared by the readers.
class ItemChecker {
 public:
  void check(const Item& item, std::size_t dim, std::size_t line) {
    if (item.id.empty()) throw ParseError("empty item id", line);
    if (item.features.size() != dim) {
      throw ParseError("item '" + item.id + "' has " + std::to_string(item.features.size()) +
                           " features, expected " + std::to_string(dim),
                       line);
    }
    if (!ids_.insert(item.id).second) throw ParseError("duplicate item id '" + item.id + "'", line);
    if (item.split == Split::train && !item.label) {
      throw ParseError("training item '" + item.id + "' has no label", line);
    }
  }

 private:
  std::unordered_set<std::string> ids_;
};

}  // namespace

void Dataset::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& item : items) {
    if (item.features.size() != dim) {
      throw DomainError("item '" + item.id + "' has " + std::to_string(item.features.size()) +
                        " features, expected " + std::to_string(dim));
    }
    if (!seen.insert(item.id).second) throw DomainError("duplicate item id '" + item.id + "'");
    if (item.split == Split::train && !item.label) {
      throw DomainError("training item '" + item.id + "' has no label");
    }
  }
}

std::size_t Dataset::count(Split split) const {
  return static_cast<std::size_t>(
      std::count_if(items.begin(), items.end(), [&](const Item& i) { return i.split == split; }));
}

Matrix Dataset::features() const {
  Matrix m(items.size(), dim);
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::copy(items[i].features.begin(), items[i].features.end(), m.row(i).begin());
  }
  return m;
}

Partition Dataset::gold(Split split) const {
  std::vector<std::string> ids;
  std::vector<std::string> labels;
  for (const auto& item : items) {
    if (item.split != split) continue;
    if (!item.label) {
      throw DomainError("item '" + item.id + "' has no gold label");
    }
    ids.push_back(item.id);
    labels.push_back(*item.label);
  }
  return Partition(ids, labels);
}

ItemIds Dataset::ids(Split split) const {
  ItemIds out;
  for (const auto& item : items) {
    if (item.split == split) out.push_back(item.id);
  }
  return out;
}

DatasetFormat format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? DatasetFormat::json : DatasetFormat::csv;
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset data;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  ItemChecker checker;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (!have_header) {
      if (fields.size() < 3 || fields[0] != "id" || fields[1] != "split" || fields[2] != "label") {
        throw ParseError("header must start with 'id,split,label'", lineno);
      }
      data.dim = fields.size() - 3;
      have_header = true;
      continue;
    }
    if (fields.size() < 3) throw ParseError("expected at least 3 fields", lineno);
    Item item;
    item.id = std::string(fields[0]);
    const auto split = parse_split(fields[1]);
    if (!split) {
      throw ParseError("split must be 'train' or 'test', got '" + std::string(fields[1]) + "'",
                       lineno);
    }
    item.split = *split;
    if (!fields[2].empty()) item.label = std::string(fields[2]);
    for (std::size_t f = 3; f < fields.size(); ++f) {
      item.features.push_back(parse_double(fields[f], lineno));
    }
    checker.check(item, data.dim, lineno);
    data.items.push_back(std::move(item));
  }
  if (!have_header) throw ParseError("empty dataset file (no header)");
  return data;
}

Dataset read_dataset_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  Dataset data;
  ItemChecker checker;
  try {
    data.dim = doc.at("dim").get<std::size_t>();
    const auto& items = doc.at("items");
    for (std::size_t i = 0; i < items.size(); ++i) {
      const auto& obj = items[i];
      Item item;
      item.id = obj.at("id").get<std::string>();
      const auto split = parse_split(obj.at("split").get<std::string>());
      if (!split) throw ParseError("item " + std::to_string(i) + ": bad split");
      item.split = *split;
      if (obj.contains("label") && !obj.at("label").is_null()) {
        item.label = obj.at("label").get<std::string>();
        if (item.label->empty()) item.label.reset();
      }
      item.features = obj.at("features").get<std::vector<double>>();
      // Report the 1-based item index in place of a line number.
      checker.check(item, data.dim, i + 1);
      data.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed dataset JSON: ") + e.what());
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  try {
    return format == DatasetFormat::json ? read_dataset_json(in) : read_dataset_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, format_for(path));
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "id,split,label";
  for (std::size_t f = 1; f <= data.dim; ++f) out << ",f" << f;
  out << '\n';
  for (const auto& item : data.items) {
    out << item.id << ',' << split_name(item.split) << ',' << item.label.value_or("");
    for (double v : item.features) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_dataset_json(std::ostream& out, const Dataset& data) {
  nlohmann::json doc;
  doc["dim"] = data.dim;
  auto items = nlohmann::json::array();
  for (const auto& item : data.items) {
    nlohmann::json obj;
    obj["id"] = item.id;
    obj["split"] = split_name(item.split);
    obj["label"] = item.label ? nlohmann::json(*item.label) : nlohmann::json(nullptr);
    obj["features"] = item.features;
    items.push_back(std::move(obj));
  }
  doc["items"] = std::move(items);
  out << doc.dump(1) << '\n';
}

void save_dataset(const std::filesystem::path& path, const Dataset& data, DatasetFormat format) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset '" + path.string() + "'");
  if (format == DatasetFormat::json) {
    write_dataset_json(out, data);
  } else {
    write_dataset_csv(out, data);
  }
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

Vector Standardization::apply(VectorView x) const {
  Vector out(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) out[f] = (x[f] - mean[f]) / scale[f];
  return out;
}

Standardized standardize(const Dataset& data) {
  const std::size_t n_train = data.count(Split::train);
  if (n_train < 2) {
    throw DomainError("standardize needs at least 2 training items, got " +
                      std::to_string(n_train));
  }
  Standardization tr{Vector(data.dim, 0.0), Vector(data.dim, 0.0)};
  for (const auto& item : data.items) {
    if (item.split != Split::train) continue;
    for (std::size_t f = 0; f < data.dim; ++f) tr.mean[f] += item.features[f];
  }
  const double n = static_cast<double>(n_train);
  for (double& m : tr.mean) m /= n;
  for (const auto& item : data.items) {
    if (item.split != Split::train) continue;
    for (std::size_t f = 0; f < data.dim; ++f) {
      const double d = item.features[f] - tr.mean[f];
      tr.scale[f] += d * d;
    }
  }
  for (double& s : tr.scale) s = std::max(std::sqrt(s / n), Standardization::kMinScale);

  Standardized out{data, tr};
  for (auto& item : out.data.items) item.features = tr.apply(item.features);
  return out;
}

void SynthConfig::validate() const {
  std::vector<std::string> problems;
  if (n_train_classes < 1) problems.push_back("train classes must be >= 1");
  if (n_test_classes < 1) problems.push_back("test classes must be >= 1");
  if (dim < 1) problems.push_back("dim must be >= 1");
  if (min_class_size < 1) problems.push_back("min class size must be >= 1");
  if (min_class_size > max_class_size) problems.push_back("min class size exceeds max class size");
  if (!(separation >= 0.0) || !std::isfinite(separation)) {
    problems.push_back("separation must be finite and >= 0");
  }
  if (!problems.empty()) {
    std::string msg = "invalid synthetic config: ";
    for (std::size_t i = 0; i < problems.size(); ++i) msg += (i ? "; " : "") + problems[i];
    throw ConfigError(msg);
  }
}

double center_scale_for_separation(double separation, std::size_t dim) {
  // |c_i - c_j| = sqrt(2) s chi_dim, E chi_dim = sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
  const double d = static_cast<double>(dim);
  const double mean_chi_times_sqrt2 = 2.0 * std::exp(std::lgamma(0.5 * (d + 1.0)) - std::lgamma(0.5 * d));
  return separation / mean_chi_times_sqrt2;
}

Dataset synth_gaussian(const SynthConfig& config) {
  config.validate();
  Rng rng(splitmix64(config.seed));
  const double spread = center_scale_for_separation(config.separation, config.dim);
  std::uniform_int_distribution<std::size_t> class_size(config.min_class_size,
                                                        config.max_class_size);

  const std::size_t n_classes = config.n_train_classes + config.n_test_classes;
  const std::size_t label_width = std::to_string(n_classes > 0 ? n_classes - 1 : 0).size();
  auto pad = [](std::size_t v, std::size_t width) {
    std::string s = std::to_string(v);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
  };

  Dataset data;
  data.dim = config.dim;
  for (std::size_t c = 0; c < n_classes; ++c) {
    const bool train = c < config.n_train_classes;
    const std::size_t local = train ? c : c - config.n_train_classes;
    const std::string label = (train ? "train_" : "test_") + pad(local, label_width);
    Vector center(config.dim);
    for (double& v : center) v = normal(rng, 0.0, spread);
    const std::size_t size = class_size(rng);
    for (std::size_t i = 0; i < size; ++i) {
      Item item;
      item.split = train ? Split::train : Split::test;
      item.label = label;
      item.features.resize(config.dim);
      for (std::size_t f = 0; f < config.dim; ++f) item.features[f] = normal(rng, center[f], 1.0);
      data.items.push_back(std::move(item));
    }
  }

  for (std::size_t i = data.items.size(); i > 1; --i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    std::swap(data.items[i - 1], data.items[j]);
  }
  const std::size_t id_width = std::to_string(data.items.empty() ? 0 : data.items.size() - 1).size();
  for (std::size_t i = 0; i < data.items.size(); ++i) data.items[i].id = "r" + pad(i, id_width);
  return data;
}

double squared_mean_distance(const Matrix& ab, const Matrix& aa, const Matrix& bb) {
  const std::size_t ni = ab.rows();
  const std::size_t nj = ab.cols();
  if (ni == 0 || nj == 0) throw DomainError("squared_mean_distance: empty subset");
  if (aa.rows() != ni || aa.cols() != ni || bb.rows() != nj || bb.cols() != nj) {
    std::ostringstream os;
    os << "squared_mean_distance: size mismatch (ab " << ni << "x" << nj << ", aa " << aa.rows()
       << "x" << aa.cols() << ", bb " << bb.rows() << "x" << bb.cols() << ")";
    throw DomainError(os.str());
  }
  double cross = 0.0;
  for (double v : ab.values()) cross += v;
  double within_a = 0.0;
  for (std::size_t i = 0; i < ni; ++i) {
    for (std::size_t k = i + 1; k < ni; ++k) within_a += aa(i, k);
  }
  double within_b = 0.0;
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t k = j + 1; k < nj; ++k) within_b += bb(j, k);
  }
  const double di = static_cast<double>(ni);
  const double dj = static_cast<double>(nj);
  return cross / (di * dj) - within_a / (di * di) - within_b / (dj * dj);
}

}  // namespace dpsc
