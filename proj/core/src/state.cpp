#include "naqs/state.hpp"

#include <cmath>

namespace naqs {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
} // namespace

double log_add_exp(double a, double b) {
    if (std::isinf(a) && a < 0) return b;
    if (std::isinf(b) && b < 0) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

Eigen::VectorXd log_add_exp(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    Eigen::VectorXd out(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out(i) = log_add_exp(a(i), b(i));
    return out;
}

double QuantumState::log_prob(const SpinConfiguration& sigma) const {
    return log_prob_batch(pack_configuration(sigma))(0);
}

double QuantumState::phase(const SpinConfiguration& sigma) const {
    return phase_batch(pack_configuration(sigma))(0);
}

double QuantumState::log_prob_prefix(const SpinConfiguration& sigma, int cut) const {
    return log_prob_prefix_batch(pack_configuration(sigma), cut)(0);
}

SpinConfiguration QuantumState::sample(RandomStream& rng) const {
    return unpack_column(sample_batch(1, rng), 0);
}

SpinConfiguration QuantumState::sample_suffix(const SpinConfiguration& prefix, int cut,
                                              RandomStream& rng) const {
    if (prefix.size() != num_sites() && prefix.size() != cut)
        throw std::invalid_argument("prefix must cover positions 0..cut-1 of the ordering");
    SpinMatrix batch = SpinMatrix::Constant(num_sites(), 1, -1.0);
    for (int i = 0; i < cut; ++i) batch(i, 0) = static_cast<double>(prefix[i]);
    sample_suffix_batch(batch, cut, rng);
    return unpack_column(batch, 0);
}

std::complex<double> QuantumState::log_amplitude(const SpinConfiguration& sigma) const {
    return {0.5 * log_prob(sigma), phase(sigma)};
}

std::complex<double> QuantumState::amplitude(const SpinConfiguration& sigma) const {
    const std::complex<double> la = log_amplitude(sigma);
    return std::exp(la.real()) * std::complex<double>(std::cos(la.imag()), std::sin(la.imag()));
}

double ReverseModel::log_prob(const SpinConfiguration& sigma) const {
    return log_prob_batch(pack_configuration(sigma))(0);
}

double ReverseModel::log_prefix_conditional(const SpinConfiguration& sigma, int cut) const {
    return log_prefix_conditional_batch(pack_configuration(sigma), cut)(0);
}

std::string to_string(PhaseModelKind kind) {
    return kind == PhaseModelKind::PhaseNetwork ? "phase-network" : "marshall-rule";
}

PhaseModelKind phase_model_from_string(const std::string& s) {
    if (s == "phase-network") return PhaseModelKind::PhaseNetwork;
    if (s == "marshall-rule" || s == "marshall") return PhaseModelKind::MarshallRule;
    throw std::invalid_argument("unknown phase model: " + s);
}

double marshall_phase(const SpinConfiguration& sigma, const Lattice& lattice,
                      const SiteOrdering& ordering) {
    int downs = 0;
    for (int pos = 0; pos < sigma.size(); ++pos)
        if (sigma[pos] == -1 && lattice.on_sublattice_a(ordering.site_at(pos))) ++downs;
    return (downs % 2) ? kPi : 0.0;
}

namespace {

Eigen::VectorXd marshall_positions(const Lattice& lattice, const SiteOrdering& ordering) {
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(lattice.num_sites());
    for (int pos = 0; pos < lattice.num_sites(); ++pos)
        if (lattice.on_sublattice_a(ordering.site_at(pos))) mask(pos) = 1.0;
    return mask;
}

} // namespace

Naqs::Naqs(Lattice lattice, ProbabilityNetwork prob, PhaseNetwork phase, bool z2, bool translational)
    : lattice_(std::move(lattice)), prob_(std::move(prob)), phase_net_(std::move(phase)),
      phase_model_(PhaseModelKind::PhaseNetwork), z2_(z2), translational_(translational),
      marshall_mask_(marshall_positions(lattice_, prob_.ordering())) {
    if (lattice_.num_sites() != prob_.num_sites() || phase_net_->num_sites() != prob_.num_sites())
        throw std::invalid_argument("lattice/network size mismatch");
    if (translational_ && lattice_.kind() != LatticeKind::ChainPeriodic)
        throw std::invalid_argument("translational wrapper requires a periodic chain");
}

Naqs::Naqs(Lattice lattice, ProbabilityNetwork prob, PhaseModelKind marshall, bool z2, bool translational)
    : lattice_(std::move(lattice)), prob_(std::move(prob)), phase_net_(std::nullopt),
      phase_model_(marshall), z2_(z2), translational_(translational),
      marshall_mask_(marshall_positions(lattice_, prob_.ordering())) {
    if (phase_model_ != PhaseModelKind::MarshallRule)
        throw std::invalid_argument("this constructor builds Marshall-rule states");
    if (lattice_.num_sites() != prob_.num_sites())
        throw std::invalid_argument("lattice/network size mismatch");
    if (translational_ && lattice_.kind() != LatticeKind::ChainPeriodic)
        throw std::invalid_argument("translational wrapper requires a periodic chain");
}

const PhaseNetwork& Naqs::phase_network() const {
    if (!phase_net_) throw std::logic_error("state uses the Marshall rule, no phase network");
    return *phase_net_;
}

PhaseNetwork& Naqs::phase_network() {
    if (!phase_net_) throw std::logic_error("state uses the Marshall rule, no phase network");
    return *phase_net_;
}

Eigen::VectorXd Naqs::base_log_prob(const SpinMatrix& batch) const { return prob_.log_prob_batch(batch); }

Eigen::VectorXd Naqs::z2_log_prob(const SpinMatrix& batch) const {
    return log_add_exp(base_log_prob(batch), base_log_prob(-batch)).array() - kLn2;
}

SpinMatrix Naqs::shifted_rows(const SpinMatrix& batch, int shift) const {
    const int n = num_sites();
    SpinMatrix out(n, batch.cols());
    for (int i = 0; i < n; ++i) out.row(i) = batch.row((i + shift) % n);
    return out;
}

Eigen::VectorXd Naqs::log_prob_batch(const SpinMatrix& batch) const {
    if (!translational_) return z2_ ? z2_log_prob(batch) : base_log_prob(batch);
    const int n = num_sites();
    Eigen::VectorXd acc = z2_ ? z2_log_prob(batch) : base_log_prob(batch);
    for (int k = 1; k < n; ++k) {
        const SpinMatrix shifted = shifted_rows(batch, k);
        acc = log_add_exp(acc, z2_ ? z2_log_prob(shifted) : base_log_prob(shifted));
    }
    return acc.array() - std::log(static_cast<double>(n));
}

Eigen::VectorXd Naqs::phase_batch(const SpinMatrix& batch) const {
    if (phase_model_ == PhaseModelKind::PhaseNetwork) return phase_net_->phase_batch(batch);
    // Marshall rule: pi * (down spins on sublattice A mod 2)
    Eigen::VectorXd downs = ((1.0 - batch.array()) * 0.5).matrix().transpose() * marshall_mask_;
    Eigen::VectorXd parity = downs.array() - 2.0 * (downs.array() * 0.5).floor();
    return kPi * parity;
}

SpinMatrix Naqs::sample_batch(int count, RandomStream& rng) const {
    SpinMatrix batch = prob_.sample_batch(count, rng);
    if (z2_) {
        for (int b = 0; b < count; ++b)
            if (rng.bernoulli(0.5)) batch.col(b) = -batch.col(b);
    }
    if (translational_) {
        const int n = num_sites();
        SpinMatrix out(n, count);
        for (int b = 0; b < count; ++b) {
            const int k = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
            for (int i = 0; i < n; ++i) out(i, b) = batch((i + k) % n, b);
        }
        batch = std::move(out);
    }
    return batch;
}

Eigen::VectorXd Naqs::log_prob_prefix_batch(const SpinMatrix& batch, int cut) const {
    if (!has_conditionals())
        throw UnsupportedConfiguration("translational wrapper has no tractable conditionals");
    if (!z2_) return prob_.log_prob_prefix_batch(batch, cut);
    return log_add_exp(prob_.log_prob_prefix_batch(batch, cut),
                       prob_.log_prob_prefix_batch(-batch, cut))
               .array() -
           kLn2;
}

void Naqs::sample_prefix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const {
    if (!has_conditionals())
        throw UnsupportedConfiguration("translational wrapper has no tractable conditionals");
    prob_.sample_range(batch, 0, cut, rng);
    if (z2_) {
        for (Eigen::Index b = 0; b < batch.cols(); ++b)
            if (rng.bernoulli(0.5)) batch.col(b).head(cut) = -batch.col(b).head(cut);
    }
}

void Naqs::sample_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const {
    if (!has_conditionals())
        throw UnsupportedConfiguration("translational wrapper has no tractable conditionals");
    if (!z2_) {
        prob_.sample_range(batch, cut, num_sites(), rng);
        return;
    }
    // Mixture branch per Z2 sampling: with probability
    // P(sigma_a) / (P(sigma_a) + P(-sigma_a)) draw the suffix conditioned on
    // sigma_a, otherwise draw conditioned on -sigma_a and flip the result.
    const Eigen::VectorXd lp_plus = prob_.log_prob_prefix_batch(batch, cut);
    const Eigen::VectorXd lp_minus = prob_.log_prob_prefix_batch(-batch, cut);
    std::vector<bool> flipped(static_cast<std::size_t>(batch.cols()));
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        const double w_plus = 1.0 / (1.0 + std::exp(lp_minus(b) - lp_plus(b)));
        const bool flip = !rng.bernoulli(w_plus);
        flipped[static_cast<std::size_t>(b)] = flip;
        if (flip) batch.col(b).head(cut) = -batch.col(b).head(cut);
    }
    prob_.sample_range(batch, cut, num_sites(), rng);
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        if (flipped[static_cast<std::size_t>(b)]) batch.col(b) = -batch.col(b); // restores the prefix
    }
}

void Naqs::accumulate_prob_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                NetworkGradient& grad) const {
    if (!z2_ && !translational_) {
        prob_.accumulate_weighted_grad(batch, weights, grad);
        return;
    }
    if (!translational_) {
        // grad ln P_Z2 = w+ grad ln P(sigma) + w- grad ln P(-sigma)
        const Eigen::VectorXd lp_plus = base_log_prob(batch);
        const Eigen::VectorXd lp_minus = base_log_prob(-batch);
        Eigen::VectorXd w_plus(batch.cols());
        for (Eigen::Index b = 0; b < batch.cols(); ++b)
            w_plus(b) = 1.0 / (1.0 + std::exp(lp_minus(b) - lp_plus(b)));
        prob_.accumulate_weighted_grad(batch, weights.cwiseProduct(w_plus), grad);
        prob_.accumulate_weighted_grad(-batch, weights.cwiseProduct((1.0 - w_plus.array()).matrix()),
                                       grad);
        return;
    }
    // translational (optionally with z2): softmax weights over the N shifts
    const int n = num_sites();
    std::vector<SpinMatrix> shifted;
    shifted.reserve(static_cast<std::size_t>(n));
    Eigen::MatrixXd logs(n, batch.cols());
    for (int k = 0; k < n; ++k) {
        shifted.push_back(shifted_rows(batch, k));
        logs.row(k) = (z2_ ? z2_log_prob(shifted.back()) : base_log_prob(shifted.back())).transpose();
    }
    const Eigen::VectorXd max_log = logs.colwise().maxCoeff().transpose();
    Eigen::MatrixXd soft = (logs.rowwise() - max_log.transpose()).array().exp();
    const Eigen::VectorXd norm = soft.colwise().sum().transpose();
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd wk =
            weights.cwiseProduct((soft.row(k).transpose().array() / norm.array()).matrix());
        if (!z2_) {
            prob_.accumulate_weighted_grad(shifted[static_cast<std::size_t>(k)], wk, grad);
        } else {
            const Eigen::VectorXd lp_plus = base_log_prob(shifted[static_cast<std::size_t>(k)]);
            const Eigen::VectorXd lp_minus = base_log_prob(-shifted[static_cast<std::size_t>(k)]);
            Eigen::VectorXd w_plus(batch.cols());
            for (Eigen::Index b = 0; b < batch.cols(); ++b)
                w_plus(b) = 1.0 / (1.0 + std::exp(lp_minus(b) - lp_plus(b)));
            prob_.accumulate_weighted_grad(shifted[static_cast<std::size_t>(k)],
                                           wk.cwiseProduct(w_plus), grad);
            prob_.accumulate_weighted_grad(-shifted[static_cast<std::size_t>(k)],
                                           wk.cwiseProduct((1.0 - w_plus.array()).matrix()), grad);
        }
    }
}

NaqsReverse::NaqsReverse(ReverseNetwork net, bool z2) : net_(std::move(net)), z2_(z2) {}

Eigen::VectorXd NaqsReverse::log_prob_batch(const SpinMatrix& batch) const {
    if (!z2_) return net_.log_prob_batch(batch);
    return log_add_exp(net_.log_prob_batch(batch), net_.log_prob_batch(-batch)).array() - kLn2;
}

Eigen::VectorXd NaqsReverse::log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const {
    if (!z2_) return net_.log_prefix_conditional_batch(batch, cut);
    // P_Z2(sigma_a | sigma_b) = (P(sigma) + P(-sigma)) / (P(sigma_b) + P(-sigma_b))
    const Eigen::VectorXd lp_plus = net_.log_prob_batch(batch);
    const Eigen::VectorXd lp_minus = net_.log_prob_batch(-batch);
    const Eigen::VectorXd lp_b_plus = lp_plus - net_.log_prefix_conditional_batch(batch, cut);
    const Eigen::VectorXd lp_b_minus = lp_minus - net_.log_prefix_conditional_batch(-batch, cut);
    return log_add_exp(lp_plus, lp_minus) - log_add_exp(lp_b_plus, lp_b_minus);
}

void NaqsReverse::sample_prefix_given_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const {
    if (!z2_) {
        net_.sample_prefix_given_suffix(batch, cut, rng);
        return;
    }
    const int n = num_sites();
    // Marginal of sigma_b under p_R, for each sign branch.
    SpinMatrix rev = net_.reverse_rows(batch);
    const Eigen::VectorXd lp_b_plus = net_.reversed_net().log_prob_prefix_batch(rev, n - cut);
    const Eigen::VectorXd lp_b_minus = net_.reversed_net().log_prob_prefix_batch(-rev, n - cut);
    std::vector<bool> flipped(static_cast<std::size_t>(batch.cols()));
    for (Eigen::Index b = 0; b < batch.cols(); ++b) {
        const double w_plus = 1.0 / (1.0 + std::exp(lp_b_minus(b) - lp_b_plus(b)));
        const bool flip = !rng.bernoulli(w_plus);
        flipped[static_cast<std::size_t>(b)] = flip;
        if (flip) batch.col(b).tail(n - cut) = -batch.col(b).tail(n - cut);
    }
    net_.sample_prefix_given_suffix(batch, cut, rng);
    for (Eigen::Index b = 0; b < batch.cols(); ++b)
        if (flipped[static_cast<std::size_t>(b)]) batch.col(b) = -batch.col(b);
}

void NaqsReverse::accumulate_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                  NetworkGradient& grad) const {
    if (!z2_) {
        net_.accumulate_weighted_grad(batch, weights, grad);
        return;
    }
    const Eigen::VectorXd lp_plus = net_.log_prob_batch(batch);
    const Eigen::VectorXd lp_minus = net_.log_prob_batch(-batch);
    Eigen::VectorXd w_plus(batch.cols());
    for (Eigen::Index b = 0; b < batch.cols(); ++b)
        w_plus(b) = 1.0 / (1.0 + std::exp(lp_minus(b) - lp_plus(b)));
    net_.accumulate_weighted_grad(batch, weights.cwiseProduct(w_plus), grad);
    net_.accumulate_weighted_grad(-batch, weights.cwiseProduct((1.0 - w_plus.array()).matrix()), grad);
}

} // namespace naqs
