#include "naqs/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace naqs {

void apply_hamiltonian(const Hamiltonian& h, const Eigen::VectorXd& in, Eigen::VectorXd& out) {
    const std::int64_t dim = in.size();
    out.setZero(dim);
    for (const auto& [p, q] : h.position_bonds) {
        const std::uint64_t bp = 1ull << p, bq = 1ull << q;
        const std::uint64_t flip = bp | bq;
        for (std::int64_t x = 0; x < dim; ++x) {
            const bool up_p = x & bp, up_q = x & bq;
            if (up_p == up_q) {
                out[x] += 0.25 * in[x];
            } else {
                out[x] -= 0.25 * in[x];
                out[static_cast<std::int64_t>(x ^ flip)] += 0.5 * in[x];
            }
        }
    }
}

namespace {

void check_dense_size(int n) {
    if (n > kMaxDenseSites) throw SizeLimit("dense-state operations are limited to 20 sites");
}

} // namespace

GroundStateResult exact_ground_state(const Hamiltonian& h, std::uint64_t seed) {
    const int n = h.num_sites();
    check_dense_size(n);
    const std::int64_t dim = 1ll << n;
    const int max_iter = static_cast<int>(std::min<std::int64_t>(dim, 320));

    RandomStream rng(seed);
    std::vector<Eigen::VectorXd> basis;
    basis.reserve(static_cast<std::size_t>(max_iter));
    Eigen::VectorXd v(dim);
    for (std::int64_t i = 0; i < dim; ++i) v[i] = rng.normal();
    v.normalize();
    basis.push_back(v);

    std::vector<double> alpha, beta;
    Eigen::VectorXd w(dim);
    double last_theta = 1e300;
    int used = 0;
    Eigen::VectorXd ritz_in_krylov;

    for (int k = 0; k < max_iter; ++k) {
        apply_hamiltonian(h, basis.back(), w);
        const double a = basis.back().dot(w);
        alpha.push_back(a);
        w -= a * basis.back();
        if (basis.size() > 1) w -= beta.back() * basis[basis.size() - 2];
        // full reorthogonalization, twice for stability
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : basis) w -= u.dot(w) * u;

        // current lowest Ritz value
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            tri(i, i) = alpha[static_cast<std::size_t>(i)];
            if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = beta[static_cast<std::size_t>(i)];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const double theta = es.eigenvalues()(0);
        ritz_in_krylov = es.eigenvectors().col(0);
        used = m;

        const double b = w.norm();
        const double residual = (m > 0) ? std::abs(b * ritz_in_krylov(m - 1)) : 1.0;
        if ((std::abs(theta - last_theta) < 1e-14 * std::max(1.0, std::abs(theta)) &&
             residual < 1e-10) ||
            b < 1e-13 || k + 1 == max_iter) {
            last_theta = theta;
            break;
        }
        last_theta = theta;
        beta.push_back(b);
        basis.push_back(w / b);
    }

    Eigen::VectorXd ground = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < used; ++i) ground += ritz_in_krylov(i) * basis[static_cast<std::size_t>(i)];
    ground.normalize();

    GroundStateResult result;
    result.state.num_sites = n;
    result.state.amplitudes = ground.cast<std::complex<double>>();
    result.energy = last_theta;
    result.iterations = used;
    return result;
}

double dense_ground_energy(const Hamiltonian& h) {
    const int n = h.num_sites();
    if (n > 10) throw SizeLimit("dense eigensolver limited to 10 sites");
    const std::int64_t dim = 1ll << n;
    Eigen::MatrixXd hmat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(dim), column(dim);
    for (std::int64_t j = 0; j < dim; ++j) {
        unit[j] = 1.0;
        apply_hamiltonian(h, unit, column);
        hmat.col(j) = column;
        unit[j] = 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hmat, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

double power_iteration_energy(const Hamiltonian& h, double tolerance, int max_iterations,
                              std::uint64_t seed) {
    const int n = h.num_sites();
    check_dense_size(n);
    const std::int64_t dim = 1ll << n;
    // shift c so that c*I - H is positive with the ground state dominant
    const double shift = 0.25 * h.num_bonds() + 1.0;

    RandomStream rng(seed);
    Eigen::VectorXd v(dim), w(dim);
    for (std::int64_t i = 0; i < dim; ++i) v[i] = rng.normal();
    v.normalize();

    double energy = 0.0, previous = 1e300;
    for (int it = 0; it < max_iterations; ++it) {
        apply_hamiltonian(h, v, w);
        w = shift * v - w;
        w.normalize();
        apply_hamiltonian(h, w, v); // v temporarily holds H*w
        energy = w.dot(v);
        v = w;
        if (std::abs(energy - previous) < tolerance) return energy;
        previous = energy;
    }
    return energy;
}

double ReducedSpectrum::trace_power(double n) const {
    double sum = 0.0;
    for (double lam : eigenvalues)
        if (lam > 0.0) sum += std::pow(lam, n);
    return sum;
}

namespace {

// Packs the amplitudes into an (A-basis) x (B-basis) matrix. A-positions map
// to the row index bits in ascending position order, likewise for B columns.
Eigen::MatrixXcd amplitude_matrix(const DenseState& state, const Bipartition& part) {
    const int n = state.num_sites;
    std::vector<int> a_positions, b_positions;
    for (int i = 0; i < n; ++i) (part.position_in_a(i) ? a_positions : b_positions).push_back(i);
    const int ka = static_cast<int>(a_positions.size());
    const int kb = static_cast<int>(b_positions.size());
    if (std::min(ka, kb) > 14) throw SizeLimit("bipartition side exceeds 14 positions");

    Eigen::MatrixXcd m(1ll << ka, 1ll << kb);
    const std::int64_t dim = state.dimension();
    for (std::int64_t x = 0; x < dim; ++x) {
        std::int64_t a = 0, b = 0;
        for (int i = 0; i < ka; ++i)
            if (x >> a_positions[static_cast<std::size_t>(i)] & 1) a |= 1ll << i;
        for (int i = 0; i < kb; ++i)
            if (x >> b_positions[static_cast<std::size_t>(i)] & 1) b |= 1ll << i;
        m(a, b) = state.amplitudes[x];
    }
    return m;
}

} // namespace

ReducedSpectrum reduced_spectrum(const DenseState& state, const Bipartition& part) {
    const Eigen::MatrixXcd m = amplitude_matrix(state, part);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd;
    Eigen::BDCSVD<Eigen::MatrixXcd> bdc;
    Eigen::VectorXd singular;
    if (std::min(m.rows(), m.cols()) <= 64) {
        svd.compute(m);
        singular = svd.singularValues();
    } else {
        bdc.compute(m);
        singular = bdc.singularValues();
    }

    ReducedSpectrum spec;
    spec.eigenvalues.resize(static_cast<std::size_t>(singular.size()));
    for (Eigen::Index i = 0; i < singular.size(); ++i)
        spec.eigenvalues[static_cast<std::size_t>(i)] = singular(i) * singular(i);
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end(), std::greater<>());
    spec.lambda_max = spec.eigenvalues.empty() ? 0.0 : spec.eigenvalues.front();
    spec.rank = 0;
    spec.degeneracy = 0;
    for (double lam : spec.eigenvalues) {
        if (lam > 1e-12) ++spec.rank;
        if (spec.lambda_max > 0.0 && lam >= spec.lambda_max * (1.0 - 1e-9)) ++spec.degeneracy;
    }
    return spec;
}

double exact_renyi(const ReducedSpectrum& spec, double n) {
    if (n <= 0.0 || n == 1.0) throw std::invalid_argument("Renyi order must be positive and != 1");
    return std::log(spec.trace_power(n)) / (1.0 - n);
}

double exact_vn(const ReducedSpectrum& spec) {
    double s = 0.0;
    for (double lam : spec.eigenvalues)
        if (lam > 0.0) s -= lam * std::log(lam);
    return s;
}

double brute_force_replica(const DenseState& state, const Bipartition& part, int n) {
    if (n < 1) throw std::invalid_argument("replica order must be >= 1");
    Eigen::MatrixXcd m = amplitude_matrix(state, part);
    if (m.rows() > m.cols()) m = m.transpose().eval(); // contract on the smaller side
    const Eigen::MatrixXcd gram = m * m.adjoint();
    Eigen::MatrixXcd power = gram;
    for (int k = 1; k < n; ++k) power = power * gram;
    return power.trace().real();
}

double replica_sum_literal(const DenseState& state, const Bipartition& part, int n) {
    const int sites = state.num_sites;
    if (static_cast<std::int64_t>(n) * sites > 24)
        throw SizeLimit("literal replica sum limited to 2^(n*N) <= 2^24 terms");
    const Eigen::MatrixXcd m = amplitude_matrix(state, part);
    const std::int64_t dim_a = m.rows(), dim_b = m.cols();

    std::vector<std::int64_t> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    std::complex<double> total = 0.0;
    const int bits_a = static_cast<int>(std::round(std::log2(static_cast<double>(dim_a))));
    const int bits_b = static_cast<int>(std::round(std::log2(static_cast<double>(dim_b))));
    const std::int64_t combos_a = 1ll << (n * bits_a);
    const std::int64_t combos_b = 1ll << (n * bits_b);
    for (std::int64_t ia = 0; ia < combos_a; ++ia) {
        for (int k = 0; k < n; ++k) a[static_cast<std::size_t>(k)] = (ia >> (k * bits_a)) & (dim_a - 1);
        for (std::int64_t ib = 0; ib < combos_b; ++ib) {
            for (int k = 0; k < n; ++k)
                b[static_cast<std::size_t>(k)] = (ib >> (k * bits_b)) & (dim_b - 1);
            std::complex<double> omega = 1.0;
            for (int k = 0; k < n; ++k) {
                const std::size_t kk = static_cast<std::size_t>(k);
                const std::size_t next = static_cast<std::size_t>((k + 1) % n);
                omega *= m(a[kk], b[kk]) * std::conj(m(a[next], b[kk]));
            }
            total += omega;
        }
    }
    return total.real();
}

DenseState analytic_state(AnalyticStateKind kind, int num_sites) {
    check_dense_size(num_sites);
    const std::int64_t dim = 1ll << num_sites;
    DenseState state;
    state.num_sites = num_sites;
    state.amplitudes = Eigen::VectorXcd::Zero(dim);
    switch (kind) {
        case AnalyticStateKind::Ghz: {
            const double a = 1.0 / std::sqrt(2.0);
            state.amplitudes[0] = a;
            state.amplitudes[dim - 1] = a;
            break;
        }
        case AnalyticStateKind::UniformProduct: {
            const double a = std::pow(2.0, -0.5 * num_sites);
            state.amplitudes.setConstant(a);
            break;
        }
        case AnalyticStateKind::DimerSinglet: {
            if (num_sites % 2 != 0) throw std::invalid_argument("dimer-singlet state needs even N");
            const double a = std::pow(2.0, -0.25 * num_sites); // (1/sqrt(2)) per dimer
            for (std::int64_t x = 0; x < dim; ++x) {
                double amp = a;
                bool support = true;
                for (int pair = 0; pair < num_sites / 2 && support; ++pair) {
                    const bool up_lo = (x >> (2 * pair)) & 1;
                    const bool up_hi = (x >> (2 * pair + 1)) & 1;
                    if (up_lo == up_hi)
                        support = false; // parallel spins: outside singlet support
                    else if (!up_lo)
                        amp = -amp; // down-up carries the minus sign
                }
                if (support) state.amplitudes[x] = amp;
            }
            break;
        }
    }
    return state;
}

DenseState dense_from_state(const QuantumState& state) {
    const int n = state.num_sites();
    check_dense_size(n);
    const std::int64_t dim = 1ll << n;
    DenseState out;
    out.num_sites = n;
    out.amplitudes.resize(dim);
    constexpr std::int64_t chunk = 4096;
    for (std::int64_t start = 0; start < dim; start += chunk) {
        const std::int64_t count = std::min(chunk, dim - start);
        SpinMatrix batch(n, count);
        for (std::int64_t c = 0; c < count; ++c)
            for (int j = 0; j < n; ++j)
                batch(j, c) = ((static_cast<std::uint64_t>(start + c) >> j) & 1u) ? 1.0 : -1.0;
        const Eigen::VectorXd lp = state.log_prob_batch(batch);
        const Eigen::VectorXd ph = state.phase_batch(batch);
        for (std::int64_t c = 0; c < count; ++c) {
            const double mag = std::exp(0.5 * lp(c));
            out.amplitudes[start + c] =
                mag * std::complex<double>(std::cos(ph(c)), std::sin(ph(c)));
        }
    }
    return out;
}

ExactState::ExactState(DenseState state) : state_(std::move(state)) {
    const int n = state_.num_sites;
    check_dense_size(n);
    const std::int64_t dim = state_.dimension();
    if (dim != (1ll << n)) throw std::invalid_argument("amplitude vector must have 2^N entries");
    const double norm = state_.norm();
    if (std::abs(norm - 1.0) > 1e-12) state_.amplitudes /= norm;

    marginals_.resize(static_cast<std::size_t>(n) + 1);
    auto& full = marginals_[static_cast<std::size_t>(n)];
    full.resize(static_cast<std::size_t>(dim));
    phases_.resize(static_cast<std::size_t>(dim));
    for (std::int64_t x = 0; x < dim; ++x) {
        full[static_cast<std::size_t>(x)] = std::norm(state_.amplitudes[x]);
        phases_[static_cast<std::size_t>(x)] =
            full[static_cast<std::size_t>(x)] > 0.0 ? std::arg(state_.amplitudes[x]) : 0.0;
    }
    for (int k = n - 1; k >= 0; --k) {
        auto& level = marginals_[static_cast<std::size_t>(k)];
        const auto& next = marginals_[static_cast<std::size_t>(k) + 1];
        level.resize(1ull << k);
        const std::uint64_t bit = 1ull << k;
        for (std::uint64_t b = 0; b < level.size(); ++b)
            level[b] = next[b] + next[b | bit];
    }
}

double ExactState::theta(int position, std::uint64_t prefix_bits) const {
    const double denom = marginals_[static_cast<std::size_t>(position)][prefix_bits];
    if (denom <= 0.0) return 0.0; // unreachable prefix
    return marginals_[static_cast<std::size_t>(position) + 1][prefix_bits | (1ull << position)] / denom;
}

namespace {

std::uint64_t column_bits(const SpinMatrix& batch, int column, int upto) {
    std::uint64_t bits = 0;
    for (int i = 0; i < upto; ++i)
        if (batch(i, column) > 0.0) bits |= 1ull << i;
    return bits;
}

} // namespace

Eigen::VectorXd ExactState::log_prob_batch(const SpinMatrix& batch) const {
    Eigen::VectorXd out(batch.cols());
    const int n = num_sites();
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        const double p = marginals_[static_cast<std::size_t>(n)][column_bits(batch, static_cast<int>(b), n)];
        out(b) = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
    return out;
}

Eigen::VectorXd ExactState::phase_batch(const SpinMatrix& batch) const {
    Eigen::VectorXd out(batch.cols());
    const int n = num_sites();
    for (Eigen::Index b = 0; b < batch.cols(); ++b)
        out(b) = phases_[column_bits(batch, static_cast<int>(b), n)];
    return out;
}

Eigen::VectorXd ExactState::log_prob_prefix_batch(const SpinMatrix& batch, int cut) const {
    Eigen::VectorXd out(batch.cols());
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        const double p = marginals_[static_cast<std::size_t>(cut)][column_bits(batch, static_cast<int>(b), cut)];
        out(b) = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }
    return out;
}

void ExactState::sample_prefix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const {
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        std::uint64_t bits = 0;
        for (int i = 0; i < cut; ++i) {
            const bool up = rng.uniform() < theta(i, bits);
            batch(i, b) = up ? 1.0 : -1.0;
            if (up) bits |= 1ull << i;
        }
    }
}

void ExactState::sample_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const {
    const int n = num_sites();
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        std::uint64_t bits = column_bits(batch, static_cast<int>(b), cut);
        for (int i = cut; i < n; ++i) {
            const bool up = rng.uniform() < theta(i, bits);
            batch(i, b) = up ? 1.0 : -1.0;
            if (up) bits |= 1ull << i;
        }
    }
}

SpinMatrix ExactState::sample_batch(int count, RandomStream& rng) const {
    SpinMatrix batch = SpinMatrix::Constant(num_sites(), count, -1.0);
    sample_suffix_batch(batch, 0, rng);
    return batch;
}

namespace {

DenseState bit_reversed(const DenseState& state) {
    const int n = state.num_sites;
    DenseState out;
    out.num_sites = n;
    out.amplitudes.resize(state.dimension());
    for (std::int64_t x = 0; x < state.dimension(); ++x) {
        std::int64_t rev = 0;
        for (int j = 0; j < n; ++j)
            if ((x >> j) & 1) rev |= 1ll << (n - 1 - j);
        out.amplitudes[rev] = state.amplitudes[x];
    }
    return out;
}

} // namespace

ExactReverse::ExactReverse(const DenseState& state) : table_(bit_reversed(state)) {}

Eigen::VectorXd ExactReverse::log_prob_batch(const SpinMatrix& batch) const {
    return table_.log_prob_batch(batch.colwise().reverse());
}

Eigen::VectorXd ExactReverse::log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const {
    const SpinMatrix rev = batch.colwise().reverse();
    return table_.log_prob_batch(rev) - table_.log_prob_prefix_batch(rev, num_sites() - cut);
}

void ExactReverse::sample_prefix_given_suffix_batch(SpinMatrix& batch, int cut,
                                                    RandomStream& rng) const {
    SpinMatrix rev = batch.colwise().reverse();
    table_.sample_suffix_batch(rev, num_sites() - cut, rng);
    batch = rev.colwise().reverse();
}

} // namespace naqs
