#include "quantcert/interval.hpp"
#include "quantcert/merge.hpp"
#include "quantcert/quantization.hpp"
#include "quantcert/solver.hpp"

#include <benchmark/benchmark.h>

using namespace quantcert;

namespace {

const Network& wide_net() {
  static const Network net =
      random_network({1, 50, 50, 50, 1}, Activation::relu, 7);
  return net;
}

const MergedNetwork& wide_merged() {
  static const MergedNetwork m =
      merge(wide_net(), quantize_network(wide_net(), SchemePolicy::truncate(4)));
  return m;
}

void BM_eval(benchmark::State& state) {
  const Network& net = wide_net();
  Vector u = Vector::Constant(1, 0.37);
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval(net, u));
  }
}
BENCHMARK(BM_eval)->Unit(benchmark::kMicrosecond);

void BM_eval_batch(benchmark::State& state) {
  const Network& net = wide_net();
  const Index cols = static_cast<Index>(state.range(0));
  Matrix inputs(1, cols);
  for (Index c = 0; c < cols; ++c) {
    inputs(0, c) = static_cast<double>(c) / static_cast<double>(cols);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_batch(net, inputs));
  }
  state.SetItemsProcessed(state.iterations() * cols);
}
BENCHMARK(BM_eval_batch)->Arg(16)->Arg(128)->Arg(1024)->Unit(benchmark::kMicrosecond);

void BM_interval_eval(benchmark::State& state) {
  const IntervalEvaluator evaluator(wide_merged().net);
  const Box box = uniform_box(1, 0.25, 0.26);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluator.eval(box));
  }
}
BENCHMARK(BM_interval_eval)->Unit(benchmark::kMicrosecond);

void BM_merged_box_evaluator(benchmark::State& state) {
  const MergedBoxEvaluator evaluator(wide_merged());
  const Index cols = static_cast<Index>(state.range(0));
  Matrix lo(1, cols), hi(1, cols);
  for (Index c = 0; c < cols; ++c) {
    lo(0, c) = static_cast<double>(c) / static_cast<double>(cols);
    hi(0, c) = lo(0, c) + 0.01;
  }
  Matrix out_lo, out_hi;
  for (auto _ : state) {
    evaluator.eval(lo, hi, out_lo, out_hi);
    benchmark::DoNotOptimize(out_hi);
  }
  state.SetItemsProcessed(state.iterations() * cols);
}
BENCHMARK(BM_merged_box_evaluator)->Arg(1)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_moore_skelboe_small(benchmark::State& state) {
  const Network net = random_network({1, 8, 8, 1}, Activation::relu, 3);
  const MergedNetwork m =
      merge(net, quantize_network(net, SchemePolicy::truncate(4)));
  const Box box = uniform_box(1, 0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(moore_skelboe(m, box, Norm::linf, 1e-3));
  }
}
BENCHMARK(BM_moore_skelboe_small)->Unit(benchmark::kMillisecond);

void BM_exact_reach_1d(benchmark::State& state) {
  const MergedNetwork& m = wide_merged();
  const Interval segment = make_interval(0.0, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_reach_1d(m, segment, Norm::linf));
  }
}
BENCHMARK(BM_exact_reach_1d)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
