#include "dpsc/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dpsc/error.hpp"

namespace dpsc {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::logic_error("chain invariant: " + what);
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::m1: return "m1";
    case Variant::m2: return "m2";
    case Variant::m3: return "m3";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (s == "m1") return Variant::m1;
  if (s == "m2") return Variant::m2;
  if (s == "m3") return Variant::m3;
  throw ConfigError("unknown variant '" + name + "' (expected m1, m2 or m3)");
}

std::vector<std::string> SamplerConfig::problems() const {
  std::vector<std::string> out;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      std::ostringstream os;
      os << name << " must be a positive finite number, got " << v;
      out.push_back(os.str());
    }
  };
  if (iterations < 1) out.push_back("iterations must be >= 1");
  if (effective_burn_in() >= iterations) {
    out.push_back("burn_in (" + std::to_string(effective_burn_in()) +
                  ") must be less than iterations (" + std::to_string(iterations) + ")");
  }
  if (aux_samples < 1) out.push_back("aux_samples must be >= 1");
  if (candidate_count < 1) out.push_back("candidate_count must be >= 1");
  positive(alpha_prior_p.shape, "alpha_prior_p.shape");
  positive(alpha_prior_p.scale, "alpha_prior_p.scale");
  positive(alpha_prior_t.shape, "alpha_prior_t.shape");
  positive(alpha_prior_t.scale, "alpha_prior_t.scale");
  positive(alpha_p, "alpha_p");
  positive(alpha_t, "alpha_t");
  if (n_chains < 1) out.push_back("n_chains must be >= 1");
  positive(publication_variance, "publication_variance");
  positive(type_shape, "type_shape");
  positive(type_scale, "type_scale");
  positive(conditional.lambda, "lambda");
  if (alpha_gibbs_iters < 1) out.push_back("alpha_gibbs_iters must be >= 1");
  return out;
}

void SamplerConfig::validate() const {
  const auto list = problems();
  if (list.empty()) return;
  std::string msg = "invalid sampler configuration:";
  for (const auto& p : list) msg += "\n  " + p;
  throw ConfigError(msg);
}

ChainProblem ChainProblem::from_dataset(const Dataset& data, bool use_training_labels) {
  data.validate();
  std::vector<std::size_t> order(data.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.items[a].id < data.items[b].id; });

  ChainProblem p;
  p.data = Matrix(order.size(), data.dim);
  auto ids = std::make_shared<ItemIds>();
  auto test_ids = std::make_shared<ItemIds>();
  std::map<std::string, std::size_t> classes;
  if (use_training_labels) {
    for (const auto& item : data.items) {
      if (item.split == Split::train) classes.emplace(*item.label, 0);
    }
    std::size_t next = 0;
    for (auto& [label, index] : classes) index = next++;
  }
  p.n_train_classes = classes.size();
  p.gold.assign(order.size(), 0);
  for (std::size_t row = 0; row < order.size(); ++row) {
    const Item& item = data.items[order[row]];
    std::copy(item.features.begin(), item.features.end(), p.data.row(row).begin());
    ids->push_back(item.id);
    const bool test = item.split == Split::test;
    p.is_test.push_back(test);
    if (test) {
      test_ids->push_back(item.id);
      p.test_rows.push_back(row);
    } else if (use_training_labels) {
      p.gold[row] = classes.at(*item.label);
    }
  }
  p.ids = std::move(ids);
  p.test_ids = std::move(test_ids);
  return p;
}

Chain::Chain(std::shared_ptr<const ChainProblem> problem, const SamplerConfig& config,
             std::uint64_t seed)
    : problem_(std::move(problem)), config_(config), rng_(seed) {
  config_.validate();
  if (!problem_ || problem_->size() == 0) throw ConfigError("chain: no items to cluster");
  const ChainProblem& pr = *problem_;
  const std::size_t n_items = pr.size();
  const std::size_t dim = pr.dim();
  const bool supervised = config_.use_training_labels;
  bool has_train = false;
  for (std::size_t n = 0; n < n_items; ++n) has_train = has_train || !pr.is_test[n];
  if (supervised && has_train && pr.n_train_classes == 0) {
    throw ConfigError("chain: training labels requested but the problem carries none");
  }

  pub_base_ = PublicationBase::isotropic(dim, config_.publication_variance);
  type_base_ = TypeBase::uniform(dim, config_.type_shape, config_.type_scale);
  alpha_p_ = config_.alpha_p;
  alpha_t_ = config_.alpha_t;

  c_.assign(n_items, 0);
  d_.assign(n_items, 0);
  clustered_.assign(n_items, false);
  const bool m3 = config_.variant == Variant::m3;

  std::vector<std::size_t> class_slot;
  for (std::size_t g = 0; g < (supervised ? pr.n_train_classes : 0); ++g) {
    class_slot.push_back(open_slot(pubs_, free_pubs_, Vector(dim, 0.0), true));
  }
  Vector type_init(dim, 1.0);
  if (!config_.freeze_types) {
    type_init = m3 ? type_base_.sample(rng_) : Vector(dim, config_.type_shape * config_.type_scale);
  }
  const std::size_t type_slot = open_slot(types_, free_types_, type_init, false);
  for (std::size_t n = 0; n < n_items; ++n) {
    clustered_[n] = pr.is_test[n] || !supervised;
    const std::size_t slot = clustered_[n]
                                 ? open_slot(pubs_, free_pubs_, Vector(dim, 0.0), false)
                                 : class_slot[pr.gold[n]];
    attach_c(n, slot);
    attach_d(n, type_slot);
  }
  if (m3) {
    for (auto& s : pubs_) s.value = pub_base_.sample(rng_);
  }
  refresh_publications();
  refresh_types();
}

std::size_t Chain::open_slot(std::vector<Slot>& slots, std::vector<std::size_t>& free,
                             Vector value, bool train) {
  std::size_t id;
  if (!free.empty()) {
    id = free.back();
    free.pop_back();
  } else {
    id = slots.size();
    slots.emplace_back();
  }
  Slot& s = slots[id];
  s.value = std::move(value);
  s.count = 0;
  s.train = train;
  s.active = true;
  if (&slots == &pubs_) {
    ++active_pubs_;
  } else {
    ++active_types_;
  }
  return id;
}

void Chain::attach_c(std::size_t n, std::size_t slot) {
  c_[n] = slot;
  ++pubs_[slot].count;
}

void Chain::detach_c(std::size_t n) {
  Slot& s = pubs_[c_[n]];
  if (--s.count == 0) {
    s.active = false;
    free_pubs_.push_back(c_[n]);
    --active_pubs_;
  }
}

void Chain::attach_d(std::size_t n, std::size_t slot) {
  d_[n] = slot;
  ++types_[slot].count;
}

void Chain::detach_d(std::size_t n) {
  Slot& s = types_[d_[n]];
  if (--s.count == 0) {
    s.active = false;
    free_types_.push_back(d_[n]);
    --active_types_;
  }
}

bool Chain::c_candidate(std::size_t, const Slot& s) const {
  if (!s.active) return false;
  if (!config_.use_training_labels || config_.share_train_test) return true;
  return !s.train;
}

std::vector<Vector> Chain::draw_candidates(std::size_t n, ParameterKind kind, bool* includes_old) {
  const bool pub = kind == ParameterKind::publication;
  std::vector<Vector> out;
  out.reserve(config_.aux_samples + 1);
  for (std::size_t m = 0; m < config_.aux_samples; ++m) {
    out.push_back(pub ? pub_base_.sample(rng_) : type_base_.sample(rng_));
  }
  const Slot& own = pub ? pubs_[c_[n]] : types_[d_[n]];
  *includes_old = own.count == 1;
  if (*includes_old) out.push_back(own.value);
  return out;
}

CandidateSet Chain::algorithm8_candidates(std::size_t n, ParameterKind kind) {
  CandidateSet set;
  set.params = draw_candidates(n, kind, &set.includes_old);
  set.m_tilde = set.params.size();
  return set;
}

ConditionalWeights Chain::c_options(std::size_t n, const std::vector<Vector>& candidates) const {
  const auto r = problem_->data.row(n);
  const Vector& t = types_[d_[n]].value;
  ConditionalWeights w;
  for (std::size_t s = 0; s < pubs_.size(); ++s) {
    if (!c_candidate(n, pubs_[s])) continue;
    w.existing.push_back(s);
    w.log_weights.push_back(std::log(static_cast<double>(pubs_[s].count)) +
                            data_loglik(r, pubs_[s].value, t));
  }
  if (config_.variant == Variant::m3) {
    const double log_share = std::log(alpha_p_ / static_cast<double>(candidates.size()));
    const Vector tsum = coupled() ? type_sum() : Vector{};
    for (const Vector& p : candidates) {
      double lw = log_share + data_loglik(r, p, t);
      if (coupled()) lw += publication_coupling(p, tsum, pubs_.size());
      w.log_weights.push_back(lw);
    }
    w.n_new = candidates.size();
  } else {
    w.log_weights.push_back(std::log(alpha_p_) + marginal_loglik_new_publication(r, t, pub_base_));
    w.n_new = 1;
  }
  return w;
}

ConditionalWeights Chain::d_options(std::size_t n, const std::vector<Vector>& candidates) const {
  const auto r = problem_->data.row(n);
  const Vector& p = pubs_[c_[n]].value;
  ConditionalWeights w;
  for (std::size_t s = 0; s < types_.size(); ++s) {
    if (!types_[s].active) continue;
    w.existing.push_back(s);
    w.log_weights.push_back(std::log(static_cast<double>(types_[s].count)) +
                            data_loglik(r, p, types_[s].value));
  }
  if (config_.variant == Variant::m3) {
    const double log_share = std::log(alpha_t_ / static_cast<double>(candidates.size()));
    for (const Vector& t : candidates) {
      w.log_weights.push_back(log_share + data_loglik(r, p, t) + type_log_tilt(t));
    }
    w.n_new = candidates.size();
  } else {
    w.log_weights.push_back(std::log(alpha_t_) + marginal_loglik_new_type(r, p, type_base_));
    w.n_new = 1;
  }
  return w;
}

ConditionalWeights Chain::c_weights(std::size_t n) const {
  if (!clustered_.at(n)) throw std::logic_error("c_weights: item " + std::to_string(n) + " has a fixed class");
  Chain tmp(*this);
  std::vector<Vector> candidates;
  bool includes_old = false;
  if (config_.variant == Variant::m3) {
    candidates = tmp.draw_candidates(n, ParameterKind::publication, &includes_old);
  }
  tmp.detach_c(n);
  return tmp.c_options(n, candidates);
}

ConditionalWeights Chain::d_weights(std::size_t n) const {
  Chain tmp(*this);
  std::vector<Vector> candidates;
  bool includes_old = false;
  if (config_.variant == Variant::m3) {
    tmp.rebuild_conditional();
    candidates = tmp.draw_candidates(n, ParameterKind::type, &includes_old);
  }
  tmp.detach_d(n);
  return tmp.d_options(n, candidates);
}

void Chain::sample_c(std::size_t n) {
  if (!clustered_.at(n)) {
    throw std::logic_error("sample_c: item " + std::to_string(n) + " has a fixed class");
  }
  const bool m3 = config_.variant == Variant::m3;
  const std::size_t before = c_[n];
  std::vector<Vector> candidates;
  bool includes_old = false;
  if (m3) candidates = draw_candidates(n, ParameterKind::publication, &includes_old);
  detach_c(n);
  const ConditionalWeights w = c_options(n, candidates);
  const std::size_t pick = sample_log_weights(rng_, w.log_weights);
  std::size_t slot;
  if (pick < w.existing.size()) {
    slot = w.existing[pick];
  } else {
    Vector value;
    if (m3) {
      value = std::move(candidates[pick - w.existing.size()]);
    } else {
      const PrecisionObservation obs{problem_->data.row(n), types_[d_[n]].value};
      value = posterior_sample_publication({&obs, 1}, pub_base_, rng_).mean;
    }
    slot = open_slot(pubs_, free_pubs_, std::move(value), false);
  }
  attach_c(n, slot);
  if (slot != before || pick >= w.existing.size()) conditional_dirty_ = true;
}

void Chain::sample_d(std::size_t n) {
  if (config_.freeze_types) return;
  const bool m3 = config_.variant == Variant::m3;
  std::vector<Vector> candidates;
  bool includes_old = false;
  if (m3) {
    rebuild_conditional();
    candidates = draw_candidates(n, ParameterKind::type, &includes_old);
  }
  detach_d(n);
  const ConditionalWeights w = d_options(n, candidates);
  const std::size_t pick = sample_log_weights(rng_, w.log_weights);
  std::size_t slot;
  if (pick < w.existing.size()) {
    slot = w.existing[pick];
  } else {
    Vector value;
    if (m3) {
      value = std::move(candidates[pick - w.existing.size()]);
    } else {
      const Residual res{problem_->data.row(n), pubs_[c_[n]].value};
      value = posterior_sample_type({&res, 1}, type_base_, rng_).precision;
    }
    slot = open_slot(types_, free_types_, std::move(value), false);
  }
  attach_d(n, slot);
}

std::vector<SizedPublication> Chain::sized_publications() const {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> first(pubs_.size(), kNone);
  for (std::size_t n = 0; n < c_.size(); ++n) {
    if (first[c_[n]] == kNone) first[c_[n]] = n;
  }
  std::vector<SizedPublication> out;
  for (std::size_t s = 0; s < pubs_.size(); ++s) {
    if (pubs_[s].active) out.push_back({pubs_[s].value, pubs_[s].count, first[s]});
  }
  std::sort(out.begin(), out.end(), [](const SizedPublication& a, const SizedPublication& b) {
    return a.size != b.size ? a.size > b.size : a.id < b.id;
  });
  return out;
}

void Chain::rebuild_conditional() {
  if (!conditional_dirty_) return;
  const auto sized = sized_publications();
  conditional_ = ConditionalTypePrior(sized, pub_base_, config_.conditional);
  conditional_dirty_ = false;
}

bool Chain::coupled() const noexcept {
  return config_.variant == Variant::m3 && config_.condition_types && !config_.freeze_types;
}

double Chain::type_log_tilt(VectorView t) const {
  return coupled() ? conditional_.log_coupling(t) : 0.0;
}

Vector Chain::type_sum() const {
  Vector sum(problem_->dim(), 0.0);
  for (const auto& t : types_) {
    if (!t.active) continue;
    for (std::size_t f = 0; f < sum.size(); ++f) sum[f] += t.value[f];
  }
  return sum;
}

double Chain::publication_coupling(VectorView p, const Vector& type_sum, std::size_t skip) const {
  double s = 0.0;
  for (std::size_t o = 0; o < pubs_.size(); ++o) {
    if (o != skip && pubs_[o].active) s += weighted_sq_distance(p, pubs_[o].value, type_sum);
  }
  return -config_.conditional.lambda * s;
}

void Chain::refresh_publications() {
  const ChainProblem& pr = *problem_;
  std::vector<std::vector<std::size_t>> members(pubs_.size());
  for (std::size_t n = 0; n < c_.size(); ++n) members[c_[n]].push_back(n);

  if (config_.variant != Variant::m3) {
    for (std::size_t s = 0; s < pubs_.size(); ++s) {
      if (!pubs_[s].active) continue;
      PublicationStats stats(pr.dim());
      for (std::size_t n : members[s]) stats.add(pr.data.row(n), types_[d_[n]].value);
      pubs_[s].value = sample(stats.posterior(pub_base_), rng_);
    }
    conditional_dirty_ = true;
    return;
  }

  // Conditional importance resampling: the current value competes with
  // candidate_count draws from the base, weighted by everything else in the
  // joint density that depends on this mean.
  const Vector tsum = coupled() ? type_sum() : Vector{};
  std::vector<Vector> candidates;
  std::vector<double> weights;
  for (std::size_t s = 0; s < pubs_.size(); ++s) {
    if (!pubs_[s].active) continue;
    candidates.assign(1, pubs_[s].value);
    for (std::size_t k = 0; k < config_.candidate_count; ++k) {
      candidates.push_back(pub_base_.sample(rng_));
    }
    weights.assign(candidates.size(), 0.0);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const Vector& p = candidates[k];
      double w = 0.0;
      for (std::size_t n : members[s]) w += data_loglik(pr.data.row(n), p, types_[d_[n]].value);
      if (coupled()) w += publication_coupling(p, tsum, s);
      weights[k] = w;
    }
    pubs_[s].value = std::move(candidates[sample_log_weights(rng_, weights)]);
  }
  conditional_dirty_ = true;
}

void Chain::refresh_types() {
  if (config_.freeze_types) return;
  const ChainProblem& pr = *problem_;
  std::vector<std::vector<std::size_t>> members(types_.size());
  for (std::size_t n = 0; n < d_.size(); ++n) members[d_[n]].push_back(n);

  if (config_.variant == Variant::m2) {
    std::vector<Vector> means(pubs_.size());
    for (std::size_t s = 0; s < pubs_.size(); ++s) means[s] = pubs_[s].value;
    type_base_ = adapt_type_base(pr.data, c_, means);
  }
  if (config_.variant != Variant::m3) {
    for (std::size_t s = 0; s < types_.size(); ++s) {
      if (!types_[s].active) continue;
      TypeStats stats(pr.dim());
      for (std::size_t n : members[s]) stats.add(pr.data.row(n), pubs_[c_[n]].value);
      types_[s].value = sample(stats.posterior(type_base_), rng_);
    }
    return;
  }

  rebuild_conditional();
  std::vector<Vector> candidates;
  std::vector<double> weights;
  for (std::size_t s = 0; s < types_.size(); ++s) {
    if (!types_[s].active) continue;
    candidates.assign(1, types_[s].value);
    for (std::size_t k = 0; k < config_.candidate_count; ++k) {
      candidates.push_back(type_base_.sample(rng_));
    }
    weights.assign(candidates.size(), 0.0);
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      double w = type_log_tilt(candidates[k]);
      for (std::size_t n : members[s]) w += data_loglik(pr.data.row(n), pubs_[c_[n]].value, candidates[k]);
      weights[k] = w;
    }
    types_[s].value = std::move(candidates[sample_log_weights(rng_, weights)]);
  }
}

void Chain::resample_alphas() {
  const ChainProblem& pr = *problem_;
  std::vector<ObservationPair> pairs;
  if (config_.use_training_labels && !config_.share_train_test) {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    for (std::size_t n = 0; n < pr.size(); ++n) (clustered_[n] ? n_test : n_train)++;
    std::size_t k_train = 0;
    std::size_t k_test = 0;
    for (const auto& s : pubs_) {
      if (s.active) (s.train ? k_train : k_test)++;
    }
    if (n_train > 0) pairs.push_back({n_train, k_train});
    if (n_test > 0) pairs.push_back({n_test, k_test});
  } else {
    pairs.push_back({pr.size(), active_pubs_});
  }
  if (pairs.size() == 1) {
    alpha_p_ = sample_precision_single(alpha_p_, pairs[0].n_items, pairs[0].n_clusters,
                                       config_.alpha_prior_p, rng_);
  } else {
    alpha_p_ = sample_precision_multi(alpha_p_, pairs, config_.alpha_prior_p,
                                      config_.alpha_gibbs_iters, rng_);
  }
  if (!config_.freeze_types) {
    alpha_t_ = sample_precision_single(alpha_t_, pr.size(), active_types_, config_.alpha_prior_t,
                                       rng_);
  }
}

void Chain::gibbs_sweep() {
  refresh_publications();
  refresh_types();
  for (std::size_t n = 0; n < problem_->size(); ++n) {
    if (clustered_[n]) sample_c(n);
    sample_d(n);
  }
  if (config_.resample_alphas) resample_alphas();
  ++iteration_;
}

double Chain::joint_log_score() const {
  const ChainProblem& pr = *problem_;
  double score = 0.0;

  std::vector<std::size_t> train_sizes;
  std::vector<std::size_t> test_sizes;
  const bool split = config_.use_training_labels && !config_.share_train_test;
  for (const auto& s : pubs_) {
    if (!s.active) continue;
    (split && s.train ? train_sizes : test_sizes).push_back(s.count);
    score += pub_base_.log_density(s.value);
  }
  score += crp_log_eppf(train_sizes, alpha_p_) + crp_log_eppf(test_sizes, alpha_p_);

  std::vector<std::size_t> type_sizes;
  for (const auto& t : types_) {
    if (t.active) type_sizes.push_back(t.count);
  }
  score += crp_log_eppf(type_sizes, alpha_t_);
  if (!config_.freeze_types) {
    ConditionalTypePrior prior;
    if (coupled()) prior = ConditionalTypePrior(sized_publications(), pub_base_, config_.conditional);
    for (const auto& t : types_) {
      if (!t.active) continue;
      score += type_base_.log_density(t.value);
      if (coupled()) score += prior.log_coupling(t.value);
    }
  }
  for (std::size_t n = 0; n < pr.size(); ++n) {
    score += data_loglik(pr.data.row(n), pubs_[c_[n]].value, types_[d_[n]].value);
  }
  return score;
}

void Chain::set_state(std::span<const std::size_t> c, std::span<const Vector> publications,
                      std::span<const std::size_t> d, std::span<const Vector> types) {
  const ChainProblem& pr = *problem_;
  if (c.size() != pr.size() || d.size() != pr.size()) {
    throw DomainError("set_state: expected " + std::to_string(pr.size()) + " assignments");
  }
  for (std::size_t n = 0; n < pr.size(); ++n) {
    if (c[n] >= publications.size() || d[n] >= types.size()) {
      throw DomainError("set_state: assignment out of range for item " + std::to_string(n));
    }
  }
  pubs_.assign(publications.size(), Slot{});
  types_.assign(types.size(), Slot{});
  for (std::size_t s = 0; s < publications.size(); ++s) pubs_[s].value = publications[s];
  for (std::size_t s = 0; s < types.size(); ++s) types_[s].value = types[s];
  for (std::size_t n = 0; n < pr.size(); ++n) {
    attach_c(n, c[n]);
    attach_d(n, d[n]);
    if (!clustered_[n]) pubs_[c[n]].train = true;
  }
  free_pubs_.clear();
  free_types_.clear();
  active_pubs_ = 0;
  active_types_ = 0;
  for (std::size_t s = pubs_.size(); s-- > 0;) {
    pubs_[s].active = pubs_[s].count > 0;
    pubs_[s].active ? ++active_pubs_ : (free_pubs_.push_back(s), 0);
  }
  for (std::size_t s = types_.size(); s-- > 0;) {
    types_[s].active = types_[s].count > 0;
    types_[s].active ? ++active_types_ : (free_types_.push_back(s), 0);
  }
  conditional_dirty_ = true;
}

Partition Chain::test_partition() const {
  const ChainProblem& pr = *problem_;
  std::vector<std::size_t> labels;
  labels.reserve(pr.test_rows.size());
  for (std::size_t row : pr.test_rows) labels.push_back(c_[row]);
  return Partition(pr.test_ids, labels);
}

Partition Chain::full_partition() const { return Partition(problem_->ids, c_); }

void Chain::check_invariants() const {
  const ChainProblem& pr = *problem_;
  std::vector<std::size_t> pc(pubs_.size(), 0);
  std::vector<std::size_t> tc(types_.size(), 0);
  for (std::size_t n = 0; n < pr.size(); ++n) {
    require(c_[n] < pubs_.size() && pubs_[c_[n]].active, "item " + std::to_string(n) + " has an inactive publication");
    require(d_[n] < types_.size() && types_[d_[n]].active, "item " + std::to_string(n) + " has an inactive type");
    ++pc[c_[n]];
    ++tc[d_[n]];
  }
  std::size_t ap = 0;
  std::size_t at = 0;
  for (std::size_t s = 0; s < pubs_.size(); ++s) {
    require(pc[s] == pubs_[s].count, "publication count mismatch at slot " + std::to_string(s));
    require(pubs_[s].active == (pc[s] > 0), "empty active publication at slot " + std::to_string(s));
    ap += pubs_[s].active;
  }
  for (std::size_t s = 0; s < types_.size(); ++s) {
    require(tc[s] == types_[s].count, "type count mismatch at slot " + std::to_string(s));
    require(types_[s].active == (tc[s] > 0), "empty active type at slot " + std::to_string(s));
    if (types_[s].active) {
      for (double v : types_[s].value) require(v > 0.0 && std::isfinite(v), "non-positive precision");
    }
    at += types_[s].active;
  }
  require(ap == active_pubs_ && at == active_types_, "active counters out of sync");
  require(alpha_p_ > 0.0 && alpha_t_ > 0.0, "precisions must be positive");
  if (config_.freeze_types) require(active_types_ == 1, "frozen types but several active");

  // Fixed items: one slot per gold class, shared by nobody else unless sharing is on.
  std::map<std::size_t, std::size_t> class_of_slot;
  std::map<std::size_t, std::size_t> slot_of_class;
  for (std::size_t n = 0; n < pr.size(); ++n) {
    if (clustered_[n]) continue;
    const auto [it, fresh] = slot_of_class.emplace(pr.gold[n], c_[n]);
    require(it->second == c_[n], "training class split across publications");
    const auto [jt, fresh2] = class_of_slot.emplace(c_[n], pr.gold[n]);
    require(jt->second == pr.gold[n], "training classes merged");
    require(pubs_[c_[n]].train, "training publication not flagged");
  }
  if (config_.use_training_labels && !config_.share_train_test) {
    for (std::size_t n = 0; n < pr.size(); ++n) {
      if (clustered_[n]) require(!pubs_[c_[n]].train, "test item in a training publication");
    }
  }
}

ChainRun run_chain(std::shared_ptr<const ChainProblem> problem, const SamplerConfig& config,
                   std::size_t chain_index) {
  Chain chain(std::move(problem), config, chain_seed(config.seed, chain_index));
  const std::size_t burn_in = config.effective_burn_in();
  ChainRun run;
  run.score_trace.reserve(config.iterations);
  run.records.reserve(config.iterations - burn_in);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    chain.gibbs_sweep();
    const double score = chain.joint_log_score();
    if (!std::isfinite(score)) {
      throw std::runtime_error("chain " + std::to_string(chain_index) +
                               ": non-finite joint score at sweep " + std::to_string(it + 1));
    }
    run.score_trace.push_back(score);
    if (it >= burn_in) {
      run.records.push_back({chain_index, it + 1, chain.test_partition(), score,
                             chain.n_publications(), chain.n_types()});
    }
  }
  return run;
}

std::vector<ChainRun> run_chains(std::shared_ptr<const ChainProblem> problem,
                                 const SamplerConfig& config, std::size_t max_threads) {
  config.validate();
  const std::size_t n = config.n_chains;
  std::size_t threads = max_threads == 0 ? std::thread::hardware_concurrency() : max_threads;
  threads = std::clamp<std::size_t>(threads, 1, n);
  std::vector<ChainRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        runs[i] = run_chain(problem, config, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return runs;
}

Partition extract_prediction(std::span<const SampleRecord> records) {
  if (records.empty()) throw DomainError("extract_prediction: no sample records");
  const SampleRecord* best = &records[0];
  for (const auto& r : records) {
    const bool better = r.joint_log_score > best->joint_log_score ||
                        (r.joint_log_score == best->joint_log_score &&
                         std::pair(r.chain, r.iteration) < std::pair(best->chain, best->iteration));
    if (better) best = &r;
  }
  return best->test_partition;
}

Partition extract_prediction(std::span<const ChainRun> runs) {
  std::vector<SampleRecord> all;
  for (const auto& run : runs) all.insert(all.end(), run.records.begin(), run.records.end());
  return extract_prediction(all);
}

}  // namespace dpsc
