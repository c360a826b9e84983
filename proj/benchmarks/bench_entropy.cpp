#include <benchmark/benchmark.h>

#include "naqs/entropy.hpp"
#include "naqs/oracle.hpp"

using namespace naqs;

namespace {

void BM_DsTraceGhz(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    Lattice lattice = Lattice::chain_open(8);
    SiteOrdering ordering = build_ordering(OrderingKind::Linear, lattice);
    DenseState dense = analytic_state(AnalyticStateKind::Ghz, 8);
    ExactState table(dense);
    const Bipartition part = prefix_bipartition(ordering, lattice, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(ds_trace(table, part, order, 20000, 5));
    }
    state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_DsTraceGhz)->Arg(2)->Arg(6)->Arg(18);

void BM_CsTraceGhz(benchmark::State& state) {
    const int order = static_cast<int>(state.range(0));
    Lattice lattice = Lattice::chain_open(8);
    SiteOrdering ordering = build_ordering(OrderingKind::Linear, lattice);
    DenseState dense = analytic_state(AnalyticStateKind::Ghz, 8);
    ExactState table(dense);
    ExactReverse reverse(dense);
    const Bipartition part = prefix_bipartition(ordering, lattice, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(cs_trace(table, reverse, part, order, 20000, 5));
    }
    state.SetItemsProcessed(state.iterations() * 20000);
}
BENCHMARK(BM_CsTraceGhz)->Arg(2)->Arg(6)->Arg(18);

} // namespace
