#pragma once

#include <memory>

#include "naqs/hamiltonian.hpp"
#include "naqs/state.hpp"

namespace naqs {

// Full amplitude vector over the 2^N computational basis, bit j of the index
// holding the spin at network position j (1 = up). Desk-scale ground truth.
struct DenseState {
    int num_sites = 0;
    Eigen::VectorXcd amplitudes;

    std::int64_t dimension() const { return amplitudes.size(); }
    double norm() const { return amplitudes.norm(); }
};

inline constexpr int kMaxDenseSites = 20;

struct GroundStateResult {
    DenseState state;
    double energy = 0.0;
    int iterations = 0;
};

// Applies H to a dense vector (matrix-free).
void apply_hamiltonian(const Hamiltonian& h, const Eigen::VectorXd& in, Eigen::VectorXd& out);

// Lowest eigenpair by Lanczos with full reorthogonalization. Guarded at
// kMaxDenseSites.
GroundStateResult exact_ground_state(const Hamiltonian& h, std::uint64_t seed = 7);

// Independent checks on the Lanczos result.
double dense_ground_energy(const Hamiltonian& h);                       // N <= 10
double power_iteration_energy(const Hamiltonian& h, double tolerance,   // shift-and-multiply
                              int max_iterations, std::uint64_t seed = 11);

// Eigenvalues of Tr_B |psi><psi| via singular values of the reshaped
// amplitude matrix.
struct ReducedSpectrum {
    std::vector<double> eigenvalues; // sorted descending
    int rank = 0;                    // count above 1e-12
    double lambda_max = 0.0;
    int degeneracy = 0; // eigenvalues within 1e-9 relative of lambda_max

    double trace_power(double n) const;
};

ReducedSpectrum reduced_spectrum(const DenseState& state, const Bipartition& part);

// S_n = ln(sum lambda^n) / (1-n) for n != 1; exact_vn is the n -> 1 limit.
double exact_renyi(const ReducedSpectrum& spec, double n);
double exact_vn(const ReducedSpectrum& spec);

// Tr[rho_A^n] by the factored contraction Tr[(M M^dagger)^n]; guarded on the
// smaller region (<= 14 positions).
double brute_force_replica(const DenseState& state, const Bipartition& part, int n);
// Literal 2n-fold sum over basis pairs; cross-checks the contraction.
// Guarded at 2^(n*N) <= 2^24.
double replica_sum_literal(const DenseState& state, const Bipartition& part, int n);

enum class AnalyticStateKind { Ghz, UniformProduct, DimerSinglet };

// Closed-form reference states: GHZ, uniform product, and a product of
// nearest-neighbor singlets (N even).
DenseState analytic_state(AnalyticStateKind kind, int num_sites);

// Enumerates any state model into a dense amplitude vector (N <= 20).
DenseState dense_from_state(const QuantumState& state);

// Exact sampler over a dense state: a conditional-probability table plays
// the role of the autoregressive network (marginals, conditionals, and exact
// sampling), with phases read off the amplitudes. Serves as the estimator
// backend where the paper-level math calls for p_R = p exactly.
class ExactState : public QuantumState {
  public:
    explicit ExactState(DenseState state);

    const DenseState& dense() const { return state_; }

    int num_sites() const override { return state_.num_sites; }
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const override;
    Eigen::VectorXd phase_batch(const SpinMatrix& batch) const override;
    SpinMatrix sample_batch(int count, RandomStream& rng) const override;

    bool has_conditionals() const override { return true; }
    Eigen::VectorXd log_prob_prefix_batch(const SpinMatrix& batch, int cut) const override;
    void sample_prefix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;
    void sample_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;

  private:
    friend class ExactReverse;
    double theta(int position, std::uint64_t prefix_bits) const;

    DenseState state_;
    // marginals_[k][b] = p(first k positions have bits b); marginals_[0] = {1}
    std::vector<std::vector<double>> marginals_;
    std::vector<double> phases_;
};

// Reverse-order exact table over the same state: p_R = p with conditionals
// in reversed position order. Public methods speak forward coordinates.
class ExactReverse : public ReverseModel {
  public:
    explicit ExactReverse(const DenseState& state);

    int num_sites() const override { return table_.num_sites(); }
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const override;
    Eigen::VectorXd log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const override;
    void sample_prefix_given_suffix_batch(SpinMatrix& batch, int cut, RandomStream& rng) const override;

  private:
    ExactState table_; // built over the bit-reversed amplitudes
};

} // namespace naqs
