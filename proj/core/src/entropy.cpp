#include "naqs/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "naqs/lattice.hpp"

namespace naqs {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

std::vector<int> sorted_orders(std::vector<int> orders) {
    if (orders.empty()) throw std::invalid_argument("need at least one Renyi order");
    for (int n : orders)
        if (n < 2) throw std::invalid_argument("replica estimators require order n >= 2");
    std::sort(orders.begin(), orders.end());
    orders.erase(std::unique(orders.begin(), orders.end()), orders.end());
    return orders;
}

// Joins A-rows of `a_source` with B-rows of `b_source` into one column.
void join_column(const Bipartition& part, const Eigen::Ref<const Eigen::VectorXd>& a_source,
                 const Eigen::Ref<const Eigen::VectorXd>& b_source, Eigen::Ref<Eigen::VectorXd> out) {
    for (int i = 0; i < out.size(); ++i)
        out(i) = part.position_in_a(i) ? a_source(i) : b_source(i);
}

// Per-(slot, batch) estimator values; slot meaning depends on the estimator.
struct ValueBuffers {
    std::vector<Eigen::VectorXd> re;
    std::vector<Eigen::VectorXd> im;
};

// Direct sampling: evaluates one chunk of batches for every (part, order)
// slot, reusing the same n_max iid samples per batch. Slot index is
// part_index * n_orders + order_index.
void ds_eval_chunk(const QuantumState& state, const std::vector<Bipartition>& parts,
                   const std::vector<int>& orders, int chunk, long first_batch, RandomStream& rng,
                   ValueBuffers& buffers, std::vector<SpinConfiguration>* capture) {
    const int n_max = orders.back();
    const int n_orders = static_cast<int>(orders.size());
    const int n = state.num_sites();

    const SpinMatrix samples = state.sample_batch(n_max * chunk, rng);
    const Eigen::VectorXd lp = state.log_prob_batch(samples);
    const Eigen::VectorXd ph = state.phase_batch(samples);
    for (Eigen::Index c = 0; c < lp.size(); ++c)
        if (std::isinf(lp(c)))
            throw DegenerateSample("sampled configuration has zero probability");

    if (capture)
        for (int k = 0; k < n_max; ++k) capture->push_back(unpack_column(samples, k));

    Eigen::VectorXd cum_half_orig(n_max + 1), cum_ph_orig(n_max + 1);
    Eigen::VectorXd cum_half_mix(n_max), cum_ph_mix(n_max);

    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        const Bipartition& part = parts[pi];

        // consecutive recombinations (sigma_a^{k+1}, sigma_b^k), k = 0..n_max-2
        Eigen::VectorXd lp_mix, ph_mix;
        if (n_max > 1) {
            SpinMatrix mixed(n, static_cast<Eigen::Index>(n_max - 1) * chunk);
            for (int b = 0; b < chunk; ++b)
                for (int k = 0; k + 1 < n_max; ++k)
                    join_column(part, samples.col(b * n_max + k + 1), samples.col(b * n_max + k),
                                mixed.col(static_cast<Eigen::Index>(b) * (n_max - 1) + k));
            lp_mix = state.log_prob_batch(mixed);
            ph_mix = state.phase_batch(mixed);
        }

        // wrap-around recombination (sigma_a^1, sigma_b^n) per order
        SpinMatrix wraps(n, static_cast<Eigen::Index>(n_orders) * chunk);
        for (int b = 0; b < chunk; ++b)
            for (int oi = 0; oi < n_orders; ++oi)
                join_column(part, samples.col(b * n_max),
                            samples.col(b * n_max + orders[static_cast<std::size_t>(oi)] - 1),
                            wraps.col(static_cast<Eigen::Index>(b) * n_orders + oi));
        const Eigen::VectorXd lp_wrap = state.log_prob_batch(wraps);
        const Eigen::VectorXd ph_wrap = state.phase_batch(wraps);

        for (int b = 0; b < chunk; ++b) {
            cum_half_orig(0) = 0.0;
            cum_ph_orig(0) = 0.0;
            for (int k = 0; k < n_max; ++k) {
                cum_half_orig(k + 1) = cum_half_orig(k) + 0.5 * lp(b * n_max + k);
                cum_ph_orig(k + 1) = cum_ph_orig(k) + ph(b * n_max + k);
            }
            cum_half_mix(0) = 0.0;
            cum_ph_mix(0) = 0.0;
            for (int k = 0; k + 1 < n_max; ++k) {
                cum_half_mix(k + 1) =
                    cum_half_mix(k) + 0.5 * lp_mix(static_cast<Eigen::Index>(b) * (n_max - 1) + k);
                cum_ph_mix(k + 1) =
                    cum_ph_mix(k) + ph_mix(static_cast<Eigen::Index>(b) * (n_max - 1) + k);
            }
            for (int oi = 0; oi < n_orders; ++oi) {
                const int order = orders[static_cast<std::size_t>(oi)];
                const Eigen::Index wcol = static_cast<Eigen::Index>(b) * n_orders + oi;
                const double log_f =
                    cum_half_mix(order - 1) + 0.5 * lp_wrap(wcol) - cum_half_orig(order);
                // f_DS = prod psi*(mixed) / psi*(orig): phases enter conjugated
                const double phi = -(cum_ph_mix(order - 1) + ph_wrap(wcol) - cum_ph_orig(order));
                const double mag = std::exp(log_f);
                const std::size_t slot =
                    pi * static_cast<std::size_t>(n_orders) + static_cast<std::size_t>(oi);
                buffers.re[slot](first_batch + b) = mag * std::cos(phi);
                buffers.im[slot](first_batch + b) = mag * std::sin(phi);
            }
        }
    }
}

// Conditional sampling: evaluates one chunk of batches for all orders,
// sharing the sampled chain and closing each order with its own mixture
// draw. Slot index is the order index.
void cs_eval_chunk(const QuantumState& state, const ReverseModel& reverse, const Bipartition& part,
                   const std::vector<int>& orders, int chunk, long first_batch, RandomStream& rng,
                   ValueBuffers& buffers, std::vector<SpinConfiguration>* capture) {
    const int n_max = orders.back();
    const int n = state.num_sites();
    const int cut = part.cut();

    // chain[k-1] holds (sigma_a^k, sigma_b^k); the k = n_max entry only has a
    // valid prefix (sigma_a^{n_max}) since its interior suffix never enters
    // the estimator.
    std::vector<SpinMatrix> chain;
    chain.reserve(static_cast<std::size_t>(n_max));
    Eigen::MatrixXd lp(n_max + 1, chunk), lpa(n_max + 1, chunk), phd(n_max + 1, chunk);
    Eigen::MatrixXd lp_mix(n_max, chunk), ph_mix(n_max, chunk), lp_rev(n_max, chunk);

    SpinMatrix first_pair = SpinMatrix::Constant(n, chunk, -1.0);
    state.sample_prefix_batch(first_pair, cut, rng);
    state.sample_suffix_batch(first_pair, cut, rng);
    chain.push_back(std::move(first_pair));

    for (int k = 1; k <= n_max; ++k) {
        lpa.row(k) = state.log_prob_prefix_batch(chain.back(), cut).transpose();
        if (k == n_max) break;
        lp.row(k) = state.log_prob_batch(chain.back()).transpose();
        phd.row(k) = state.phase_batch(chain.back()).transpose();

        // draw sigma_a^{k+1} ~ p_R(. | sigma_b^k); right after this step the
        // matrix is exactly the recombination (sigma_a^{k+1}, sigma_b^k)
        SpinMatrix next = chain.back();
        reverse.sample_prefix_given_suffix_batch(next, cut, rng);
        lp_mix.row(k) = state.log_prob_batch(next).transpose();
        ph_mix.row(k) = state.phase_batch(next).transpose();
        lp_rev.row(k) = reverse.log_prefix_conditional_batch(next, cut).transpose();

        if (k + 1 < n_max) state.sample_suffix_batch(next, cut, rng); // sigma_b^{k+1}
        chain.push_back(std::move(next));
    }

    for (Eigen::Index c = 0; c < chunk; ++c) {
        if (std::isinf(lp(1, c))) throw DegenerateSample("chain start has zero probability");
        for (int k = 1; k < n_max; ++k) {
            if (std::isinf(lp_rev(k, c)))
                throw WeightSingularity("reverse conditional vanished on a drawn sample");
            if (std::isinf(lp(k, c) - lpa(k, c)))
                throw DegenerateSample("forward conditional vanished on a drawn sample");
        }
    }

    // per-order mixture closing and estimator assembly
    for (std::size_t oi = 0; oi < orders.size(); ++oi) {
        const int order = orders[oi];
        SpinMatrix closing(n, chunk);
        for (int c = 0; c < chunk; ++c) {
            const bool from_first = rng.bernoulli(0.5);
            closing.col(c) =
                (from_first ? chain.front() : chain[static_cast<std::size_t>(order - 1)]).col(c);
        }
        state.sample_suffix_batch(closing, cut, rng); // the final sigma_b^n

        // diag = (sigma_a^n, sigma_b^n); wrap = (sigma_a^1, sigma_b^n)
        SpinMatrix diag(n, chunk), wrap(n, chunk);
        for (int c = 0; c < chunk; ++c) {
            join_column(part, chain[static_cast<std::size_t>(order - 1)].col(c), closing.col(c),
                        diag.col(c));
            join_column(part, chain.front().col(c), closing.col(c), wrap.col(c));
        }
        const Eigen::VectorXd lp_diag = state.log_prob_batch(diag);
        const Eigen::VectorXd ph_diag = state.phase_batch(diag);
        const Eigen::VectorXd lp_wrap = state.log_prob_batch(wrap);
        const Eigen::VectorXd ph_wrap = state.phase_batch(wrap);

        if (capture) {
            for (int k = 0; k + 1 < order; ++k)
                capture->push_back(unpack_column(chain[static_cast<std::size_t>(k)], 0));
            capture->push_back(unpack_column(diag, 0));
        }

        for (int c = 0; c < chunk; ++c) {
            // A in log space, grouped so that -inf only pushes f to zero:
            //   0.5 ln p(a1,bn) - 0.5 ln p(a1,b1)
            // + sum_{i<n} [0.5 ln p(mix_i) - ln p_R(a^{i+1}|b^i)]
            // + sum_{2<=i<n} 0.5 [ln p(a^i) - ln p(b^i|a^i)]
            // + 0.5 ln p(a^n) + 0.5 ln p(bn|a^n) - ln mix
            double log_a = 0.5 * lp_wrap(c) - 0.5 * lp(1, c);
            double phi = -ph_wrap(c) + ph_diag(c);
            for (int i = 1; i < order; ++i) {
                log_a += 0.5 * lp_mix(i, c) - lp_rev(i, c);
                phi += phd(i, c) - ph_mix(i, c);
            }
            for (int i = 2; i < order; ++i) log_a += 0.5 * (2.0 * lpa(i, c) - lp(i, c));

            const double ln_cond_diag = lp_diag(c) - lpa(order, c);
            const double ln_cond_wrap = lp_wrap(c) - lpa(1, c);
            const double ln_mix = log_add_exp(ln_cond_diag, ln_cond_wrap) - kLn2;
            log_a += 0.5 * lpa(order, c) + 0.5 * ln_cond_diag - ln_mix;

            const double mag = std::exp(log_a);
            buffers.re[oi](first_batch + c) = mag * std::cos(phi);
            buffers.im[oi](first_batch + c) = mag * std::sin(phi);
        }
    }
}

struct SummaryInput {
    std::string method;
    int order;
    int cut;
    int boundary;
};

TraceEstimate summarize(const SummaryInput& info, Eigen::VectorXd re, Eigen::VectorXd im,
                        const EstimatorOptions& opts, std::uint64_t seed, std::uint64_t slot) {
    TraceEstimate est;
    est.method = info.method;
    est.order = info.order;
    est.cut = info.cut;
    est.boundary = info.boundary;
    est.batches = re.size();
    est.mean = re.mean();
    est.imag_mean = im.mean();
    const double m = static_cast<double>(re.size());
    // shifted two-pass variance: exactly zero for bitwise-constant values
    const Eigen::ArrayXd shifted = re.array() - re(0);
    est.sample_variance =
        m > 1 ? std::max(0.0, (shifted.square().sum() - shifted.sum() * shifted.sum() / m) / (m - 1.0))
              : 0.0;

    if (re.size() >= 2) {
        RandomStream boot_re(mix_seed(seed, 0xb0070000ull + slot));
        est.stderr_boot = bootstrap_stderr(
            std::span<const double>(re.data(), static_cast<std::size_t>(re.size())),
            opts.bootstrap_resamples, boot_re);
        RandomStream boot_im(mix_seed(seed, 0xb0170000ull + slot));
        est.imag_stderr = bootstrap_stderr(
            std::span<const double>(im.data(), static_cast<std::size_t>(im.size())),
            opts.bootstrap_resamples, boot_im);
    }
    if (opts.keep_values) est.values.assign(re.data(), re.data() + re.size());
    return est;
}

// Splits `batches` across workers; each worker owns an independent stream
// derived from (seed, worker) and writes a contiguous slice, so results are
// identical for a fixed (seed, workers) pair.
template <typename ChunkFn>
ValueBuffers run_batches(int slots, long batches, std::uint64_t seed, const EstimatorOptions& opts,
                         ChunkFn&& eval_chunk) {
    if (batches < 1) throw std::invalid_argument("batch count must be >= 1");
    const int workers = std::max(1, opts.workers);
    ValueBuffers buffers;
    buffers.re.assign(static_cast<std::size_t>(slots), Eigen::VectorXd(batches));
    buffers.im.assign(static_cast<std::size_t>(slots), Eigen::VectorXd(batches));

    auto work = [&](int w, long first, long count) {
        RandomStream rng(seed, static_cast<std::uint64_t>(w));
        long done = 0;
        while (done < count) {
            const int chunk = static_cast<int>(std::min<long>(opts.chunk, count - done));
            eval_chunk(chunk, first + done, rng, buffers);
            done += chunk;
        }
    };

    std::vector<std::pair<long, long>> ranges;
    const long per = batches / workers;
    const long extra = batches % workers;
    long start = 0;
    for (int w = 0; w < workers; ++w) {
        const long count = per + (w < extra ? 1 : 0);
        ranges.emplace_back(start, count);
        start += count;
    }

    std::exception_ptr error;
    std::mutex error_mutex;
    auto guarded = [&](int w) {
        try {
            if (ranges[static_cast<std::size_t>(w)].second > 0)
                work(w, ranges[static_cast<std::size_t>(w)].first, ranges[static_cast<std::size_t>(w)].second);
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(guarded, w);
    guarded(0);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return buffers;
}

} // namespace

std::vector<std::vector<TraceEstimate>> ds_trace_sweep(const QuantumState& state,
                                                       const std::vector<Bipartition>& parts,
                                                       const std::vector<int>& orders_in, long batches,
                                                       std::uint64_t seed, const EstimatorOptions& opts) {
    if (parts.empty()) throw std::invalid_argument("need at least one bipartition");
    const std::vector<int> orders = sorted_orders(orders_in);
    const int slots = static_cast<int>(parts.size() * orders.size());

    ValueBuffers buffers =
        run_batches(slots, batches, seed, opts, [&](int chunk, long first, RandomStream& rng, ValueBuffers& out) {
            ds_eval_chunk(state, parts, orders, chunk, first, rng, out, nullptr);
        });

    std::vector<std::vector<TraceEstimate>> out(parts.size());
    for (std::size_t pi = 0; pi < parts.size(); ++pi) {
        for (std::size_t oi = 0; oi < orders.size(); ++oi) {
            const std::size_t slot = pi * orders.size() + oi;
            SummaryInput info{"ds", orders[oi],
                              parts[pi].mode() == BipartitionMode::Prefix ? parts[pi].cut()
                                                                          : parts[pi].size_a(),
                              parts[pi].boundary_size()};
            out[pi].push_back(summarize(info, std::move(buffers.re[slot]), std::move(buffers.im[slot]),
                                        opts, seed, slot));
        }
    }
    return out;
}

TraceEstimate ds_trace(const QuantumState& state, const Bipartition& part, int n, long batches,
                       std::uint64_t seed, const EstimatorOptions& opts) {
    auto all = ds_trace_sweep(state, {part}, {n}, batches, seed, opts);
    return std::move(all[0][0]);
}

std::vector<TraceEstimate> cs_trace_sweep(const QuantumState& state, const ReverseModel& reverse,
                                          const Bipartition& part, const std::vector<int>& orders_in,
                                          long batches, std::uint64_t seed, const EstimatorOptions& opts) {
    if (part.mode() != BipartitionMode::Prefix)
        throw UnsupportedConfiguration("conditional sampling requires a prefix bipartition");
    if (!state.has_conditionals())
        throw UnsupportedConfiguration(
            "conditional sampling is unavailable for this state (translational wrapper enabled)");
    if (reverse.num_sites() != state.num_sites())
        throw std::invalid_argument("state/reverse size mismatch");
    const std::vector<int> orders = sorted_orders(orders_in);

    ValueBuffers buffers = run_batches(static_cast<int>(orders.size()), batches, seed, opts,
                                       [&](int chunk, long first, RandomStream& rng, ValueBuffers& out) {
                                           cs_eval_chunk(state, reverse, part, orders, chunk, first,
                                                         rng, out, nullptr);
                                       });

    std::vector<TraceEstimate> out;
    for (std::size_t oi = 0; oi < orders.size(); ++oi) {
        SummaryInput info{"cs", orders[oi], part.cut(), part.boundary_size()};
        out.push_back(
            summarize(info, std::move(buffers.re[oi]), std::move(buffers.im[oi]), opts, seed, oi));
    }
    return out;
}

TraceEstimate cs_trace(const QuantumState& state, const ReverseModel& reverse, const Bipartition& part,
                       int n, long batches, std::uint64_t seed, const EstimatorOptions& opts) {
    auto all = cs_trace_sweep(state, reverse, part, {n}, batches, seed, opts);
    return std::move(all[0]);
}

ReplicaBatch ds_replica_batch(const QuantumState& state, const Bipartition& part, int n,
                              RandomStream& rng) {
    if (n < 2) throw std::invalid_argument("replica estimators require order n >= 2");
    ValueBuffers buffers;
    buffers.re.assign(1, Eigen::VectorXd(1));
    buffers.im.assign(1, Eigen::VectorXd(1));
    ReplicaBatch batch;
    batch.order = n;
    ds_eval_chunk(state, {part}, {n}, 1, 0, rng, buffers, &batch.configs);
    batch.f = {buffers.re[0](0), buffers.im[0](0)};
    return batch;
}

ReplicaBatch cs_replica_batch(const QuantumState& state, const ReverseModel& reverse,
                              const Bipartition& part, int n, RandomStream& rng) {
    if (n < 2) throw std::invalid_argument("replica estimators require order n >= 2");
    if (part.mode() != BipartitionMode::Prefix)
        throw UnsupportedConfiguration("conditional sampling requires a prefix bipartition");
    if (!state.has_conditionals())
        throw UnsupportedConfiguration(
            "conditional sampling is unavailable for this state (translational wrapper enabled)");
    ValueBuffers buffers;
    buffers.re.assign(1, Eigen::VectorXd(1));
    buffers.im.assign(1, Eigen::VectorXd(1));
    ReplicaBatch batch;
    batch.order = n;
    cs_eval_chunk(state, reverse, part, {n}, 1, 0, rng, buffers, &batch.configs);
    batch.f = {buffers.re[0](0), buffers.im[0](0)};
    return batch;
}

double bootstrap_stderr(std::span<const double> values, int resamples, RandomStream& rng) {
    if (values.size() < 2) throw std::invalid_argument("bootstrap needs at least 2 values");
    if (resamples < 2) throw std::invalid_argument("bootstrap needs at least 2 resamples");
    const std::size_t m = values.size();
    Eigen::VectorXd means(resamples);
    for (int r = 0; r < resamples; ++r) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += values[rng.uniform_int(m)];
        means(r) = sum / static_cast<double>(m);
    }
    // center on the first resample so constant inputs give exactly zero
    const Eigen::ArrayXd shifted = means.array() - means(0);
    const double r_count = static_cast<double>(resamples);
    const double var = shifted.square().sum() / r_count -
                       (shifted.sum() / r_count) * (shifted.sum() / r_count);
    return std::sqrt(std::max(0.0, var));
}

RenyiValue renyi_from_trace(const TraceEstimate& estimate) {
    if (!(estimate.mean > 0.0))
        throw NonPositiveTrace("trace estimate is non-positive; more batches needed");
    RenyiValue value;
    const double denom = 1.0 - static_cast<double>(estimate.order);
    value.entropy = std::log(estimate.mean) / denom;
    value.stderr_prop = estimate.stderr_boot / (std::abs(denom) * estimate.mean);
    return value;
}

} // namespace naqs
