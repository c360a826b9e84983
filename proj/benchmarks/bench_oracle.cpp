#include <benchmark/benchmark.h>

#include "naqs/oracle.hpp"

using namespace naqs;

namespace {

void BM_GroundState(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Lattice lattice = Lattice::chain_open(n);
    const Hamiltonian h(lattice, build_ordering(OrderingKind::Linear, lattice));
    for (auto _ : state) {
        benchmark::DoNotOptimize(exact_ground_state(h));
    }
}
BENCHMARK(BM_GroundState)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_ReducedSpectrum(benchmark::State& state) {
    const int n = 12;
    const Lattice lattice = Lattice::chain_open(n);
    const SiteOrdering ordering = build_ordering(OrderingKind::Linear, lattice);
    const GroundStateResult gs = exact_ground_state(Hamiltonian(lattice, ordering));
    const Bipartition part = prefix_bipartition(ordering, lattice, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(reduced_spectrum(gs.state, part));
    }
}
BENCHMARK(BM_ReducedSpectrum)->Unit(benchmark::kMillisecond);

void BM_BruteForceReplica(benchmark::State& state) {
    const int n = 12;
    const Lattice lattice = Lattice::chain_open(n);
    const SiteOrdering ordering = build_ordering(OrderingKind::Linear, lattice);
    const GroundStateResult gs = exact_ground_state(Hamiltonian(lattice, ordering));
    const Bipartition part = prefix_bipartition(ordering, lattice, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(brute_force_replica(gs.state, part, 6));
    }
}
BENCHMARK(BM_BruteForceReplica)->Unit(benchmark::kMillisecond);

} // namespace
