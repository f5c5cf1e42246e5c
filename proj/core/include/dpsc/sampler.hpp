#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsc/dataset.hpp"
#include "dpsc/dp.hpp"
#include "dpsc/gaussian.hpp"
#include "dpsc/matrix.hpp"
#include "dpsc/partition.hpp"
#include "dpsc/random.hpp"

namespace dpsc {

// M1: fixed conjugate bases. M2: type base re-fit to within-cluster spread
// every sweep. M3: type prior conditioned on the publication means, sampled
// with auxiliary candidates.
enum class Variant { m1, m2, m3 };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);  // ConfigError

struct SamplerConfig {
  std::size_t iterations = 1000;
  std::optional<std::size_t> burn_in;  // default iterations / 2
  std::size_t aux_samples = 8;
  std::size_t candidate_count = 32;
  bool share_train_test = false;
  bool resample_alphas = true;
  GammaPrior alpha_prior_p{};
  GammaPrior alpha_prior_t{};
  double alpha_p = 1.0;
  double alpha_t = 1.0;
  Variant variant = Variant::m1;
  std::size_t n_chains = 1;
  std::uint64_t seed = 0;

  bool use_training_labels = true;
  // A single identity type that is never resampled.
  bool freeze_types = false;
  double publication_variance = 1.0;
  double type_shape = 1.0;
  double type_scale = 1.0;
  ConditionalPriorConfig conditional{};
  // M3 only: false replaces the conditional type prior by the plain type base.
  bool condition_types = true;
  std::size_t alpha_gibbs_iters = kDefaultIndicatorSweeps;

  std::size_t effective_burn_in() const noexcept { return burn_in.value_or(iterations / 2); }
  // Every violated constraint, in field order.
  std::vector<std::string> problems() const;
  void validate() const;  // ConfigError listing all problems
};

// Items in ascending id order with everything a chain reads.
struct ChainProblem {
  Matrix data;
  std::shared_ptr<const ItemIds> ids;
  std::vector<bool> is_test;
  // Gold class index per training item (unused for test items).
  std::vector<std::size_t> gold;
  std::size_t n_train_classes = 0;
  std::shared_ptr<const ItemIds> test_ids;
  std::vector<std::size_t> test_rows;  // row of the i-th test id

  std::size_t size() const noexcept { return data.rows(); }
  std::size_t dim() const noexcept { return data.cols(); }
  // With use_training_labels = false every item is clustered as a test item;
  // recorded partitions still cover only the test split.
  static ChainProblem from_dataset(const Dataset& data, bool use_training_labels = true);
};

enum class ParameterKind { publication, type };

// Auxiliary parameters proposed for a "new" outcome. When the item's current
// value is held by it alone it is kept as the last entry.
struct CandidateSet {
  std::vector<Vector> params;
  bool includes_old = false;
  std::size_t m_tilde = 0;
};

// Unnormalized log weights of one indicator update with the item removed:
// first one entry per existing slot (slot ids in `existing`), then one per
// "new" option.
struct ConditionalWeights {
  std::vector<double> log_weights;
  std::vector<std::size_t> existing;
  std::size_t n_new = 0;
};

struct SampleRecord {
  std::size_t chain = 0;
  std::size_t iteration = 0;  // 1-based sweep number
  Partition test_partition;
  double joint_log_score = 0.0;
  std::size_t n_publications = 0;
  std::size_t n_types = 0;
};

class Chain {
 public:
  // init_state: training items in their gold classes, every other clustered
  // item alone, one shared type, parameters from one posterior pass.
  Chain(std::shared_ptr<const ChainProblem> problem, const SamplerConfig& config,
        std::uint64_t seed);

  void sample_c(std::size_t n);
  void sample_d(std::size_t n);
  void gibbs_sweep();
  CandidateSet algorithm8_candidates(std::size_t n, ParameterKind kind);
  ConditionalWeights c_weights(std::size_t n) const;
  ConditionalWeights d_weights(std::size_t n) const;
  double joint_log_score() const;

  // Replace the latent state: c and d index into the given parameter lists.
  void set_state(std::span<const std::size_t> c, std::span<const Vector> publications,
                 std::span<const std::size_t> d, std::span<const Vector> types);

  std::size_t iteration() const noexcept { return iteration_; }
  double alpha_p() const noexcept { return alpha_p_; }
  double alpha_t() const noexcept { return alpha_t_; }
  std::size_t n_publications() const noexcept { return active_pubs_; }
  std::size_t n_types() const noexcept { return active_types_; }
  // Publication / type slot of each item.
  std::span<const std::size_t> c() const noexcept { return c_; }
  std::span<const std::size_t> d() const noexcept { return d_; }
  const Vector& publication(std::size_t slot) const { return pubs_.at(slot).value; }
  const Vector& type(std::size_t slot) const { return types_.at(slot).value; }
  const TypeBase& type_base() const noexcept { return type_base_; }
  bool clustered(std::size_t n) const { return clustered_.at(n); }
  Partition test_partition() const;
  Partition full_partition() const;
  // Throws std::logic_error describing the first broken invariant.
  void check_invariants() const;

 private:
  struct Slot {
    Vector value;
    std::size_t count = 0;
    bool train = false;
    bool active = false;
  };

  std::size_t open_slot(std::vector<Slot>& slots, std::vector<std::size_t>& free, Vector value,
                        bool train);
  void detach_c(std::size_t n);
  void attach_c(std::size_t n, std::size_t slot);
  void detach_d(std::size_t n);
  void attach_d(std::size_t n, std::size_t slot);
  bool c_candidate(std::size_t n, const Slot& s) const;

  ConditionalWeights c_options(std::size_t n, const std::vector<Vector>& candidates) const;
  ConditionalWeights d_options(std::size_t n, const std::vector<Vector>& candidates) const;
  std::vector<Vector> draw_candidates(std::size_t n, ParameterKind kind, bool* includes_old);

  void refresh_publications();
  void refresh_types();
  void resample_alphas();
  void rebuild_conditional();
  bool coupled() const noexcept;
  double type_log_tilt(VectorView t) const;
  Vector type_sum() const;
  // -lambda * sum over other active means of |p - p_o|^2 weighted by type_sum.
  double publication_coupling(VectorView p, const Vector& type_sum, std::size_t skip) const;
  std::vector<SizedPublication> sized_publications() const;

  std::shared_ptr<const ChainProblem> problem_;
  SamplerConfig config_;
  Rng rng_;
  PublicationBase pub_base_;
  TypeBase type_base_;
  ConditionalTypePrior conditional_;
  bool conditional_dirty_ = true;

  std::vector<std::size_t> c_;
  std::vector<std::size_t> d_;
  std::vector<bool> clustered_;  // c_ is resampled for this item
  std::vector<Slot> pubs_;
  std::vector<Slot> types_;
  std::vector<std::size_t> free_pubs_;
  std::vector<std::size_t> free_types_;
  std::size_t active_pubs_ = 0;
  std::size_t active_types_ = 0;
  double alpha_p_ = 1.0;
  double alpha_t_ = 1.0;
  std::size_t iteration_ = 0;
};

struct ChainRun {
  std::vector<SampleRecord> records;  // post-burn-in sweeps
  std::vector<double> score_trace;    // every sweep
};

ChainRun run_chain(std::shared_ptr<const ChainProblem> problem, const SamplerConfig& config,
                   std::size_t chain_index);
// Chains 0..n_chains-1 on up to max_threads threads (0 = hardware concurrency).
// Results are independent of the thread count.
std::vector<ChainRun> run_chains(std::shared_ptr<const ChainProblem> problem,
                                 const SamplerConfig& config, std::size_t max_threads);

// Test partition of the highest-scoring record; ties go to the earliest
// (chain, iteration). DomainError when there are no records.
Partition extract_prediction(std::span<const ChainRun> runs);
Partition extract_prediction(std::span<const SampleRecord> records);

}  // namespace dpsc
