#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "naqs/state.hpp"

namespace naqs {

struct EstimatorOptions {
    int workers = 1;             // per-worker RNG streams, ordered merge
    int bootstrap_resamples = 200;
    int chunk = 2048;            // batches evaluated together
    bool keep_values = false;    // retain per-batch Re(f) in the estimate
};

// Monte Carlo estimate of Tr[rho_A^n] over M batches.
struct TraceEstimate {
    std::string method;          // "ds" or "cs"
    int order = 0;
    long batches = 0;
    int cut = 0;                 // prefix cut, or |A| for mask bipartitions
    int boundary = 0;
    double mean = 0.0;           // Re of the batch average
    double stderr_boot = 0.0;    // bootstrap standard error of the mean
    double imag_mean = 0.0;
    double imag_stderr = 0.0;
    double sample_variance = 0.0; // of Re(f)
    std::vector<double> values;   // per-batch Re(f); filled if keep_values
};

// One replica batch: the n (sigma_a, sigma_b) pairs and the estimator value.
struct ReplicaBatch {
    int order = 0;
    std::vector<SpinConfiguration> configs; // the n sampled pairs, joined
    std::complex<double> f;
};

// Direct sampling: n iid configurations per batch, cyclically recombined.
// Works for prefix and mask bipartitions.
TraceEstimate ds_trace(const QuantumState& state, const Bipartition& part, int n, long batches,
                       std::uint64_t seed, const EstimatorOptions& opts = {});

// Shares each batch of max(orders) iid samples across all requested orders
// and all requested bipartitions (samples are recombined per cut, never
// redrawn), matching how direct sampling reuses samples across partitions.
// Result layout: estimates[part_index][order_index].
std::vector<std::vector<TraceEstimate>> ds_trace_sweep(const QuantumState& state,
                                                       const std::vector<Bipartition>& parts,
                                                       const std::vector<int>& orders, long batches,
                                                       std::uint64_t seed,
                                                       const EstimatorOptions& opts = {});

// Conditional sampling with the infidelity-corrected weight (p_R explicit in
// the denominator) and the mixture-closed final draw. Requires a prefix
// bipartition and conditional structure on `state`.
TraceEstimate cs_trace(const QuantumState& state, const ReverseModel& reverse, const Bipartition& part,
                       int n, long batches, std::uint64_t seed, const EstimatorOptions& opts = {});

// Shares the sampled chain across orders: one chain of length max(orders)
// per batch, with an independent mixture-closing draw per order.
std::vector<TraceEstimate> cs_trace_sweep(const QuantumState& state, const ReverseModel& reverse,
                                          const Bipartition& part, const std::vector<int>& orders,
                                          long batches, std::uint64_t seed,
                                          const EstimatorOptions& opts = {});

// Single batches with their configurations, for inspection and tests. These
// run the same evaluation path as the estimators above.
ReplicaBatch ds_replica_batch(const QuantumState& state, const Bipartition& part, int n,
                              RandomStream& rng);
ReplicaBatch cs_replica_batch(const QuantumState& state, const ReverseModel& reverse,
                              const Bipartition& part, int n, RandomStream& rng);

// Standard deviation of resampled means over bootstrap draws with
// replacement.
double bootstrap_stderr(std::span<const double> values, int resamples, RandomStream& rng);

struct RenyiValue {
    double entropy = 0.0;
    double stderr_prop = 0.0; // stderr / (|1-n| * mean)
};

// S_n = ln(mean) / (1 - n); throws NonPositiveTrace when mean <= 0.
RenyiValue renyi_from_trace(const TraceEstimate& estimate);

} // namespace naqs
