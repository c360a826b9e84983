#pragma once

#include <complex>
#include <optional>

#include "naqs/errors.hpp"
#include "naqs/network.hpp"

namespace naqs {

// Estimator-facing view of a quantum state: the probability distribution
// |psi|^2 plus the phase phi, so that psi(sigma) = sqrt(p) * exp(i*phi).
// Conditional structure (prefix marginals, suffix sampling) is available
// unless a wrapper destroys it; conditional sampling requires it.
class QuantumState {
  public:
    virtual ~QuantumState() = default;

    virtual int num_sites() const = 0;

    virtual Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const = 0;
    virtual Eigen::VectorXd phase_batch(const SpinMatrix& batch) const = 0;
    virtual SpinMatrix sample_batch(int count, RandomStream& rng) const = 0;

    virtual bool has_conditionals() const = 0;
    // ln p(sigma_a), the marginal of the first `cut` positions.
    virtual Eigen::VectorXd log_prob_prefix_batch(const SpinMatrix& batch, int cut) const = 0;
    // Draw sigma_a ~ p(sigma_a) into rows [0, cut).
    virtual void sample_prefix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const = 0;
    // Draw sigma_b ~ p(. | sigma_a) into rows [cut, N).
    virtual void sample_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const = 0;

    double log_prob(const SpinConfiguration& sigma) const;
    double phase(const SpinConfiguration& sigma) const;
    double log_prob_prefix(const SpinConfiguration& sigma, int cut) const;
    SpinConfiguration sample(RandomStream& rng) const;
    SpinConfiguration sample_suffix(const SpinConfiguration& prefix, int cut, RandomStream& rng) const;

    // ln psi = 0.5 ln p + i phi
    std::complex<double> log_amplitude(const SpinConfiguration& sigma) const;
    std::complex<double> amplitude(const SpinConfiguration& sigma) const;
};

// The reverse-direction distribution p_R used by conditional sampling: same
// physical state, conditionals in reverse position order.
class ReverseModel {
  public:
    virtual ~ReverseModel() = default;

    virtual int num_sites() const = 0;
    virtual Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const = 0;
    // ln p_R(sigma_a | sigma_b) for a prefix cut.
    virtual Eigen::VectorXd log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const = 0;
    // Draw sigma_a ~ p_R(. | sigma_b) into rows [0, cut).
    virtual void sample_prefix_given_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const = 0;

    double log_prob(const SpinConfiguration& sigma) const;
    double log_prefix_conditional(const SpinConfiguration& sigma, int cut) const;
};

enum class PhaseModelKind { PhaseNetwork, MarshallRule };

std::string to_string(PhaseModelKind kind);
PhaseModelKind phase_model_from_string(const std::string& s);

// Marshall sign rule for bipartite antiferromagnets: phase pi times the
// parity of the number of down spins on sublattice A.
double marshall_phase(const SpinConfiguration& sigma, const Lattice& lattice, const SiteOrdering& ordering);

// Neural autoregressive quantum state: masked probability network plus a
// phase model (network or Marshall rule), with optional Z2 and translational
// symmetrization of the probability distribution. The translational wrapper
// keeps sampling and joint probabilities tractable but has no tractable
// conditionals, so it is rejected by conditional sampling.
class Naqs : public QuantumState {
  public:
    Naqs(Lattice lattice, ProbabilityNetwork prob, PhaseNetwork phase, bool z2, bool translational);
    Naqs(Lattice lattice, ProbabilityNetwork prob, PhaseModelKind marshall, bool z2, bool translational);

    const Lattice& lattice() const { return lattice_; }
    const SiteOrdering& ordering() const { return prob_.ordering(); }
    PhaseModelKind phase_model() const { return phase_model_; }
    bool z2() const { return z2_; }
    bool translational() const { return translational_; }

    const ProbabilityNetwork& prob() const { return prob_; }
    ProbabilityNetwork& prob() { return prob_; }
    const PhaseNetwork& phase_network() const;
    PhaseNetwork& phase_network();

    int num_sites() const override { return prob_.num_sites(); }
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const override;
    Eigen::VectorXd phase_batch(const SpinMatrix& batch) const override;
    SpinMatrix sample_batch(int count, RandomStream& rng) const override;

    bool has_conditionals() const override { return !translational_; }
    Eigen::VectorXd log_prob_prefix_batch(const SpinMatrix& batch, int cut) const override;
    void sample_prefix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;
    void sample_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;

    // Wrapper-aware gradient of ln p (symmetrized when z2/translational are
    // set); accumulates sum_b weight_b * grad ln p(column_b).
    void accumulate_prob_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                              NetworkGradient& grad) const;

  private:
    Eigen::VectorXd base_log_prob(const SpinMatrix& batch) const;       // no wrappers
    Eigen::VectorXd z2_log_prob(const SpinMatrix& batch) const;         // z2 only
    SpinMatrix shifted_rows(const SpinMatrix& batch, int shift) const;

    Lattice lattice_;
    ProbabilityNetwork prob_;
    std::optional<PhaseNetwork> phase_net_;
    PhaseModelKind phase_model_;
    bool z2_;
    bool translational_;
    Eigen::VectorXd marshall_mask_; // 1.0 at positions whose site lies on sublattice A
};

// Reverse counterpart of a Naqs: wraps a ReverseNetwork and applies the same
// Z2 symmetrization the forward state uses, so p_R can match p.
class NaqsReverse : public ReverseModel {
  public:
    NaqsReverse(ReverseNetwork net, bool z2);

    const ReverseNetwork& network() const { return net_; }
    ReverseNetwork& network() { return net_; }
    bool z2() const { return z2_; }

    int num_sites() const override { return net_.num_sites(); }
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const override;
    Eigen::VectorXd log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const override;
    void sample_prefix_given_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;

    // Wrapper-aware gradient of ln p_R, for KL training.
    void accumulate_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                         NetworkGradient& grad) const;

  private:
    ReverseNetwork net_;
    bool z2_;
};

// log(exp(a) + exp(b)) tolerating -inf arguments
double log_add_exp(double a, double b);
Eigen::VectorXd log_add_exp(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

} // namespace naqs
