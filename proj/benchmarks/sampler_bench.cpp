#include <benchmark/benchmark.h>

#include "dpsc/dataset.hpp"
#include "dpsc/sampler.hpp"

namespace {

std::shared_ptr<const dpsc::ChainProblem> problem(std::size_t dim) {
  dpsc::SynthConfig c;
  c.n_train_classes = 4;
  c.n_test_classes = 3;
  c.dim = dim;
  c.min_class_size = 50;
  c.max_class_size = 50;
  c.seed = 1;
  const auto data = dpsc::standardize(dpsc::synth_gaussian(c)).data;
  return std::make_shared<const dpsc::ChainProblem>(dpsc::ChainProblem::from_dataset(data));
}

void BM_GibbsSweep(benchmark::State& state) {
  const auto variant = static_cast<dpsc::Variant>(state.range(0));
  const auto pr = problem(static_cast<std::size_t>(state.range(1)));
  dpsc::SamplerConfig cfg;
  cfg.variant = variant;
  dpsc::Chain chain(pr, cfg, 7);
  for (int i = 0; i < 20; ++i) chain.gibbs_sweep();
  for (auto _ : state) chain.gibbs_sweep();
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pr->size()));
  state.SetLabel(dpsc::to_string(variant));
}
BENCHMARK(BM_GibbsSweep)->ArgsProduct({{0, 1, 2}, {2, 16}})->Unit(benchmark::kMillisecond);

}  // namespace
