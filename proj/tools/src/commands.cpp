#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpsc/baselines.hpp"
#include "dpsc/dataset.hpp"
#include "dpsc/dp.hpp"
#include "dpsc/error.hpp"
#include "dpsc/metrics.hpp"
#include "dpsc/partition.hpp"
#include "dpsc/sampler.hpp"

namespace dpsc::cli {

namespace fs = std::filesystem;

namespace {

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void fail_if(const std::vector<std::string>& problems) {
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  " + p;
  throw ValidationFailure(msg);
}

// DPSC_THREADS caps the number of chains run at once; unset means hardware concurrency.
std::size_t thread_cap(std::vector<std::string>& problems) {
  const char* env = std::getenv("DPSC_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1) {
    problems.push_back(std::string("DPSC_THREADS must be a positive integer, got '") + env + "'");
    return 0;
  }
  return static_cast<std::size_t>(v);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

struct SynthArgs {
  SynthConfig config;
  std::string out;
  std::string format;
};

int cmd_synth(const SynthArgs& args, std::ostream& out) {
  args.config.validate();
  const Dataset data = synth_gaussian(args.config);
  const DatasetFormat format = args.format.empty() ? format_for(args.out)
                               : args.format == "json" ? DatasetFormat::json
                                                       : DatasetFormat::csv;
  save_dataset(args.out, data, format);

  std::map<std::string, std::pair<std::string, std::size_t>> sizes;
  for (const auto& item : data.items) {
    auto& entry = sizes[*item.label];
    entry.first = item.split == Split::train ? "train" : "test";
    ++entry.second;
  }
  out << "wrote " << data.items.size() << " items (dim " << data.dim << ") to " << args.out << "\n";
  out << "class\tsplit\tsize\n";
  for (const auto& [label, entry] : sizes) out << label << "\t" << entry.first << "\t" << entry.second << "\n";
  return kOk;
}

struct RunArgs {
  std::string data;
  std::string out_dir;
  std::string variant = "m1";
  std::size_t chains = 1;
  std::size_t iters = 1000;
  std::optional<std::size_t> burn_in;
  std::uint64_t seed = 0;
  bool share_train_test = false;
  bool resample_alpha = true;
  std::size_t aux_samples = 8;
  std::size_t candidates = 32;
  double lambda = 1.0;
  bool no_condition_types = false;
  std::string baselines;
  std::optional<std::size_t> kmeans_k;
  std::size_t kmeans_restarts = 10;
};

void write_chain_log(const fs::path& path, const std::vector<ChainRun>& runs) {
  auto out = open_out(path);
  out << "chain,iteration,joint_log_score\n";
  for (std::size_t c = 0; c < runs.size(); ++c) {
    for (std::size_t i = 0; i < runs[c].score_trace.size(); ++i) {
      out << c << "," << i + 1 << "," << general(runs[c].score_trace[i]) << "\n";
    }
  }
}

int cmd_run(const RunArgs& args, std::ostream& out) {
  std::vector<std::string> problems;
  SamplerConfig config;
  try {
    config.variant = parse_variant(args.variant);
  } catch (const ConfigError& e) {
    problems.push_back(e.what());
  }
  config.n_chains = args.chains;
  config.iterations = args.iters;
  config.burn_in = args.burn_in;
  config.seed = args.seed;
  config.share_train_test = args.share_train_test;
  config.resample_alphas = args.resample_alpha;
  config.aux_samples = args.aux_samples;
  config.candidate_count = args.candidates;
  config.conditional.lambda = args.lambda;
  config.condition_types = !args.no_condition_types;
  for (auto& p : config.problems()) problems.push_back(std::move(p));

  const auto baselines = split_list(args.baselines);
  for (const auto& b : baselines) {
    if (b != "coarse" && b != "fine" && b != "kmeans" && b != "cdp") {
      problems.push_back("unknown baseline '" + b + "' (expected coarse, fine, kmeans or cdp)");
    }
  }
  if (args.kmeans_restarts < 1) problems.push_back("kmeans restarts must be >= 1");
  const std::size_t threads = thread_cap(problems);
  fail_if(problems);

  const Dataset raw = load_dataset(args.data);
  const Dataset data = standardize(raw).data;
  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  auto problem = std::make_shared<const ChainProblem>(ChainProblem::from_dataset(data));
  const auto runs = run_chains(problem, config, threads);
  const Partition prediction = extract_prediction(runs);
  write_partition(dir / "prediction.tsv", prediction);
  write_chain_log(dir / "chains.csv", runs);
  out << "prediction: " << prediction.num_clusters() << " clusters over " << prediction.size()
      << " test items -> prediction.tsv" << "\n";

  std::optional<Partition> gold;
  const bool labeled = std::all_of(data.items.begin(), data.items.end(), [](const Item& it) {
    return it.split == Split::train || it.label.has_value();
  });
  if (labeled && data.count(Split::test) > 0) {
    gold = data.gold(Split::test);
    write_partition(dir / "gold.tsv", *gold);
  }

  const ItemIds test_ids = data.ids(Split::test);
  for (const auto& name : baselines) {
    Partition p;
    if (name == "coarse") {
      p = coarse(test_ids);
    } else if (name == "fine") {
      p = fine(test_ids);
    } else if (name == "kmeans") {
      KMeansConfig km;
      km.restarts = args.kmeans_restarts;
      km.seed = args.seed;
      if (args.kmeans_k) {
        km.k = *args.kmeans_k;
      } else if (gold) {
        km.k = gold->num_clusters();
      } else {
        throw ValidationFailure("kmeans baseline needs --kmeans-k when test items are unlabeled");
      }
      Matrix points(test_ids.size(), data.dim);
      std::size_t row = 0;
      for (const auto& item : data.items) {
        if (item.split != Split::test) continue;
        std::copy(item.features.begin(), item.features.end(), points.row(row++).begin());
      }
      p = kmeans(test_ids, points, km);
    } else {
      SamplerConfig cdp = cdp_preset();
      cdp.n_chains = config.n_chains;
      cdp.iterations = config.iterations;
      cdp.burn_in = config.burn_in;
      cdp.seed = config.seed;
      auto unsupervised = std::make_shared<const ChainProblem>(ChainProblem::from_dataset(data, false));
      p = extract_prediction(run_chains(unsupervised, cdp, threads));
    }
    const fs::path path = dir / ("baseline_" + name + ".tsv");
    write_partition(path, p);
    out << "baseline " << name << ": " << p.num_clusters() << " clusters -> " << path.filename().string() << "\n";
  }
  return kOk;
}

struct ScoreArgs {
  std::string gold;
  std::vector<std::string> hyps;
  std::string format = "csv";
  std::string out;
};

int cmd_score(const ScoreArgs& args, std::ostream& out) {
  const Partition gold = read_partition(fs::path(args.gold));
  std::vector<std::pair<std::string, MetricReport>> rows;
  for (const auto& h : args.hyps) rows.emplace_back(h, full_report(gold, read_partition(fs::path(h))));

  std::ostringstream text;
  if (args.format == "json") {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& [name, m] : rows) {
      doc.push_back({{"hypothesis", name}, {"RI", m.rand_index}, {"P", m.precision},
                     {"R", m.recall}, {"F", m.f_score}, {"CED", m.ced_gh}, {"NES", m.nes},
                     {"VI", m.vi}, {"NVI", m.nvi}, {"CED_HG", m.ced_hg}});
    }
    text << doc.dump(2) << "\n";
  } else {
    text << "hypothesis,RI,P,R,F,CED,NES,VI,NVI,CED_HG\n";
    for (const auto& [name, m] : rows) {
      text << name << "," << fixed(m.rand_index) << "," << fixed(m.precision) << ","
           << fixed(m.recall) << "," << fixed(m.f_score) << "," << fixed(m.ced_gh, 0) << ","
           << fixed(m.nes) << "," << fixed(m.vi) << "," << fixed(m.nvi) << ","
           << fixed(m.ced_hg, 0) << "\n";
    }
  }
  if (args.out.empty()) {
    out << text.str();
  } else {
    open_out(args.out) << text.str();
  }
  return kOk;
}

struct DpfitArgs {
  std::vector<std::string> pools;
  std::string data;
  std::string grid;
  std::size_t resamples = 1000;
  std::size_t burn_in = 200;
  std::size_t draws = 1000;
  double prior_shape = 1.0;
  double prior_scale = 1.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_dpfit(const DpfitArgs& args, std::ostream& out) {
  std::vector<Partition> pools;
  for (const auto& p : args.pools) pools.push_back(read_partition(fs::path(p)));
  if (!args.data.empty()) pools.push_back(load_dataset(args.data).gold(Split::train));
  if (pools.empty()) throw ValidationFailure("dpfit needs at least one labeled pool (--pool or --data)");

  std::size_t total = 0;
  for (const auto& p : pools) total += p.size();
  std::vector<std::size_t> ns;
  if (args.grid.empty()) {
    const std::size_t step = std::max<std::size_t>(1, total / 10);
    for (std::size_t n = step; n <= total; n += step) ns.push_back(n);
  } else {
    for (const auto& s : split_list(args.grid)) {
      std::size_t pos = 0;
      unsigned long long v = 0;
      try {
        v = std::stoull(s, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != s.size()) throw ValidationFailure("--grid entries must be integers, got '" + s + "'");
      ns.push_back(static_cast<std::size_t>(v));
    }
  }

  AppropriatenessOptions options;
  options.resamples = args.resamples;
  options.alpha_burn_in = args.burn_in;
  options.alpha_draws = args.draws;
  options.prior = {args.prior_shape, args.prior_scale};
  Rng rng(splitmix64(args.seed));
  const ClusterCountCurve curve = appropriateness_curve(pools, ns, options, rng);

  std::ostringstream text;
  text << "N,dp_mean,dp_lo,dp_hi,emp_mean,emp_lo,emp_hi\n";
  for (const auto& r : curve.rows) {
    text << r.n << "," << fixed(r.dp_mean) << "," << fixed(r.dp_mean - 2.0 * r.dp_std) << ","
         << fixed(r.dp_mean + 2.0 * r.dp_std) << "," << fixed(r.empirical_mean) << ","
         << fixed(r.empirical_mean - 2.0 * r.empirical_std) << ","
         << fixed(r.empirical_mean + 2.0 * r.empirical_std) << "\n";
  }
  if (args.out.empty()) {
    out << text.str();
  } else {
    open_out(args.out) << text.str();
    out << "alpha " << fixed(curve.alpha) << "; " << curve.rows.size() << " rows -> " << args.out << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Supervised clustering with Dirichlet process mixtures", "dpsc"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic Gaussian dataset");
  s->add_option("--train-classes", synth.config.n_train_classes, "Training classes");
  s->add_option("--test-classes", synth.config.n_test_classes, "Test classes");
  s->add_option("--dim", synth.config.dim, "Feature dimension");
  s->add_option("--min-size", synth.config.min_class_size, "Smallest class size");
  s->add_option("--max-size", synth.config.max_class_size, "Largest class size");
  s->add_option("--separation", synth.config.separation, "Expected center distance in noise std units");
  s->add_option("--seed", synth.config.seed, "Random seed");
  s->add_option("--out", synth.out, "Output dataset path (.csv or .json)")->required();
  s->add_option("--format", synth.format, "Override the format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run sampler chains and write the predicted test partition");
  r->add_option("--data", run.data, "Dataset path")->required();
  r->add_option("--out-dir", run.out_dir, "Output directory")->required();
  r->add_option("--variant", run.variant, "Model variant: m1, m2 or m3");
  r->add_option("--chains", run.chains, "Number of chains");
  r->add_option("--iters", run.iters, "Sweeps per chain");
  r->add_option("--burn-in", run.burn_in, "Discarded sweeps per chain (default iters/2)");
  r->add_option("--seed", run.seed, "Run seed");
  r->add_flag("--share-train-test", run.share_train_test, "Let test items join training classes");
  r->add_flag("--resample-alpha,!--no-resample-alpha", run.resample_alpha,
              "Resample the DP precisions each sweep (default on)");
  r->add_option("--aux-samples", run.aux_samples, "Auxiliary candidates per new-cluster proposal (m3)");
  r->add_option("--candidates", run.candidates, "Independence-sampler candidates per refresh (m3)");
  r->add_option("--lambda", run.lambda, "Rate of the mean-distance density (m3)");
  r->add_flag("--no-condition-types", run.no_condition_types, "Use the plain type base in m3");
  r->add_option("--baseline", run.baselines, "Comma list of coarse, fine, kmeans, cdp");
  r->add_option("--kmeans-k", run.kmeans_k, "k for the kmeans baseline (default: gold test classes)");
  r->add_option("--kmeans-restarts", run.kmeans_restarts, "Restarts for the kmeans baseline");

  ScoreArgs score;
  auto* sc = app.add_subcommand("score", "Score hypothesis partitions against a gold partition");
  sc->add_option("--gold", score.gold, "Gold partition TSV")->required();
  sc->add_option("--hyp,hyp", score.hyps, "Hypothesis partition TSV (repeatable)")->required();
  sc->add_option("--format", score.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  sc->add_option("--out", score.out, "Report path (default stdout)");

  DpfitArgs dpfit;
  auto* dp = app.add_subcommand("dpfit", "DP vs empirical expected class counts");
  dp->add_option("--pool", dpfit.pools, "Labeled partition TSV (repeatable)");
  dp->add_option("--data", dpfit.data, "Dataset whose training split is used as a pool");
  dp->add_option("--grid", dpfit.grid, "Comma list of subsample sizes");
  dp->add_option("--resamples", dpfit.resamples, "Subsamples per size");
  dp->add_option("--alpha-burn-in", dpfit.burn_in, "Discarded precision draws");
  dp->add_option("--alpha-draws", dpfit.draws, "Averaged precision draws");
  dp->add_option("--prior-shape", dpfit.prior_shape, "Gamma prior shape on the precision");
  dp->add_option("--prior-scale", dpfit.prior_scale, "Gamma prior scale on the precision");
  dp->add_option("--seed", dpfit.seed, "Random seed");
  dp->add_option("--out", dpfit.out, "Curve CSV path (default stdout)");

  auto report = [&](int code, const std::string& msg) {
    err << "ERROR:" << code << ": " << msg << "\n";
    return code;
  };
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (s->parsed()) return cmd_synth(synth, out);
    if (r->parsed()) return cmd_run(run, out);
    if (sc->parsed()) return cmd_score(score, out);
    return cmd_dpfit(dpfit, out);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return report(kValidationError, e.what());
  } catch (const ValidationFailure& e) {
    return report(kValidationError, e.what());
  } catch (const ConfigError& e) {
    return report(kValidationError, e.what());
  } catch (const dpsc::ParseError& e) {
    return report(kValidationError, e.what());
  } catch (const DomainError& e) {
    return report(kValidationError, e.what());
  } catch (const std::exception& e) {
    return report(kRuntimeError, e.what());
  }
}

}  // namespace dpsc::cli
