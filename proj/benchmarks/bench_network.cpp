#include <benchmark/benchmark.h>

#include "naqs/state.hpp"

using namespace naqs;

namespace {

ProbabilityNetwork make_net(int n, int width) {
    RandomStream rng(1);
    return ProbabilityNetwork(build_ordering(OrderingKind::Linear, Lattice::chain_open(n)), 3, width,
                              rng);
}

void BM_SampleBatch(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int batch = static_cast<int>(state.range(1));
    ProbabilityNetwork net = make_net(n, 8);
    RandomStream rng(2);
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.sample_batch(batch, rng));
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_SampleBatch)->Args({12, 1024})->Args({12, 8192})->Args({64, 1024});

void BM_LogProbBatch(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int batch = static_cast<int>(state.range(1));
    ProbabilityNetwork net = make_net(n, 8);
    RandomStream rng(3);
    const SpinMatrix samples = net.sample_batch(batch, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(net.log_prob_batch(samples));
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_LogProbBatch)->Args({12, 1024})->Args({12, 8192})->Args({64, 1024});

void BM_GradAccumulate(benchmark::State& state) {
    const int batch = static_cast<int>(state.range(0));
    ProbabilityNetwork net = make_net(12, 8);
    RandomStream rng(4);
    const SpinMatrix samples = net.sample_batch(batch, rng);
    const Eigen::VectorXd weights = Eigen::VectorXd::Constant(batch, 1.0 / batch);
    NetworkGradient grad = net.net().zero_gradient();
    for (auto _ : state) {
        grad.set_zero();
        net.accumulate_weighted_grad(samples, weights, grad);
        benchmark::DoNotOptimize(grad);
    }
    state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_GradAccumulate)->Arg(256)->Arg(2048);

} // namespace

BENCHMARK_MAIN();
