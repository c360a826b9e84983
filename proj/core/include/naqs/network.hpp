#pragma once

#include <Eigen/Dense>
#include <vector>

#include "naqs/lattice.hpp"
#include "naqs/random.hpp"
#include "naqs/spin.hpp"

namespace naqs {

// Batch convention: spin configurations are packed as N x B matrices of
// +/-1.0, one sample per column, row i = network position i.
using SpinMatrix = Eigen::MatrixXd;

SpinMatrix pack_configuration(const SpinConfiguration& sigma);
SpinConfiguration unpack_column(const SpinMatrix& batch, int column);

// Affine layer with a fixed binary connectivity mask. The weight matrix is
// kept pre-masked as a class invariant: masked entries are zero and every
// update re-applies the mask, so evaluation never multiplies by it.
struct MaskedLayer {
    Eigen::MatrixXd weights; // out x in
    Eigen::VectorXd biases;  // out
    Eigen::MatrixXd mask;    // out x in, entries 0/1
    Eigen::VectorXi degrees; // autoregressive degree label per output unit

    int fan_in() const { return static_cast<int>(weights.cols()); }
    int fan_out() const { return static_cast<int>(weights.rows()); }
};

// Per-layer gradient (or Adam moment) storage shaped like the network.
struct NetworkGradient {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    void set_zero();
    void axpy(double alpha, const NetworkGradient& other);
    double squared_norm() const;
    bool all_finite() const;
};

// Shared feed-forward machinery: tanh hidden layers, linear output
// pre-activations. Used by both the autoregressive probability network and
// the fully connected phase network.
class FeedForward {
  public:
    FeedForward() = default;
    explicit FeedForward(std::vector<MaskedLayer> layers);

    int depth() const { return static_cast<int>(layers_.size()); }
    int num_inputs() const { return layers_.front().fan_in(); }
    int num_outputs() const { return layers_.back().fan_out(); }
    const std::vector<MaskedLayer>& layers() const { return layers_; }
    std::vector<MaskedLayer>& layers() { return layers_; }

    int parameter_count() const;
    // Layer-major flattening: for each layer, weights in row-major order,
    // then biases. This is the documented checkpoint/gradient layout.
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& params);

    NetworkGradient zero_gradient() const;

    // Output pre-activations (num_outputs x B).
    Eigen::MatrixXd forward(const SpinMatrix& input) const;
    // Same, also recording the input and every hidden activation (the
    // quantities backpropagation needs).
    Eigen::MatrixXd forward(const SpinMatrix& input, std::vector<Eigen::MatrixXd>& activations) const;

    // Backpropagates output-side deltas (num_outputs x B) through the stack
    // and accumulates parameter gradients into `grad`.
    void backward(const std::vector<Eigen::MatrixXd>& activations, Eigen::MatrixXd output_delta,
                  NetworkGradient& grad) const;

  private:
    std::vector<MaskedLayer> layers_;
};

// Masked autoregressive network over N spins: one logistic output per
// position giving theta_i = p(s_i = +1 | s_{<i}). Masks follow the MADE
// degree rule (hidden: deg_out >= deg_in, output: deg_out > deg_in) with
// hidden degrees cycling 1..N-1 deterministically. Conditionals are clamped
// to [1e-10, 1 - 1e-10] and the clamped values are used consistently for
// both sampling and log-probabilities, so the sampled distribution is
// exactly the evaluated one.
class ProbabilityNetwork {
  public:
    ProbabilityNetwork(SiteOrdering ordering, int depth, int width, RandomStream& rng);
    ProbabilityNetwork(SiteOrdering ordering, int depth, int width, FeedForward net);

    int num_sites() const { return ordering_.num_sites(); }
    int depth() const { return depth_; }
    int width() const { return width_; }
    const SiteOrdering& ordering() const { return ordering_; }
    const FeedForward& net() const { return net_; }
    FeedForward& net() { return net_; }

    static constexpr double theta_floor = 1e-10;

    // N x B matrix of conditionals; row i of column b depends only on rows
    // < i of that column.
    Eigen::MatrixXd conditionals(const SpinMatrix& batch) const;
    Eigen::VectorXd conditionals(const SpinConfiguration& sigma) const;

    // ln p(s_i | s_{<i}) per position/sample (N x B).
    Eigen::MatrixXd conditional_log_matrix(const SpinMatrix& batch) const;

    double log_prob(const SpinConfiguration& sigma) const;
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const;
    // ln p(sigma_a): sum of the first `cut` conditional logs.
    double log_prob_prefix(const SpinConfiguration& sigma, int cut) const;
    Eigen::VectorXd log_prob_prefix_batch(const SpinMatrix& batch, int cut) const;

    SpinConfiguration sample(RandomStream& rng) const;
    std::vector<SpinConfiguration> sample(int count, RandomStream& rng) const;
    SpinMatrix sample_batch(int count, RandomStream& rng) const;
    // Fills rows [first, last) column by column given fixed earlier rows.
    void sample_range(SpinMatrix& batch, int first, int last, RandomStream& rng) const;

    // Exact gradient of ln p(sigma) with respect to all parameters.
    NetworkGradient grad_log_prob(const SpinConfiguration& sigma) const;
    // Accumulates sum_b weight_b * grad ln p(column_b) into `grad`.
    void accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                  NetworkGradient& grad) const;

  private:
    SiteOrdering ordering_;
    int depth_;
    int width_;
    FeedForward net_;
};

// Fully connected network with a single unbounded linear output phi(sigma).
class PhaseNetwork {
  public:
    PhaseNetwork(int num_sites, int depth, int width, RandomStream& rng);
    PhaseNetwork(int num_sites, int depth, int width, FeedForward net);

    int num_sites() const { return num_sites_; }
    int depth() const { return depth_; }
    int width() const { return width_; }
    const FeedForward& net() const { return net_; }
    FeedForward& net() { return net_; }

    double phase(const SpinConfiguration& sigma) const;
    Eigen::VectorXd phase_batch(const SpinMatrix& batch) const;

    NetworkGradient grad_phase(const SpinConfiguration& sigma) const;
    void accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                  NetworkGradient& grad) const;

  private:
    int num_sites_;
    int depth_;
    int width_;
    FeedForward net_;
};

// Autoregressive model of the same distribution conditioned in reverse
// position order: internally a ProbabilityNetwork over reversed positions.
// All public methods speak forward coordinates.
class ReverseNetwork {
  public:
    ReverseNetwork(const SiteOrdering& forward_ordering, int depth, int width, RandomStream& rng);
    explicit ReverseNetwork(ProbabilityNetwork reversed_net);

    int num_sites() const { return net_.num_sites(); }
    const ProbabilityNetwork& reversed_net() const { return net_; }
    ProbabilityNetwork& reversed_net() { return net_; }

    double log_prob(const SpinConfiguration& sigma) const;
    Eigen::VectorXd log_prob_batch(const SpinMatrix& batch) const;
    // ln p_R(sigma_a | sigma_b) for a prefix cut in forward coordinates.
    double log_prefix_conditional(const SpinConfiguration& sigma, int cut) const;
    Eigen::VectorXd log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const;
    // Draws sigma_a ~ p_R(. | sigma_b) into rows [0, cut).
    void sample_prefix_given_suffix(SpinMatrix& batch, int cut, RandomStream& rng) const;

    NetworkGradient grad_log_prob(const SpinConfiguration& sigma) const;
    void accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                  NetworkGradient& grad) const;

    SpinMatrix reverse_rows(const SpinMatrix& batch) const;

  private:
    ProbabilityNetwork net_;
};

// MADE degree assignment and mask construction, exposed for tests.
Eigen::VectorXi autoregressive_degrees(int num_sites, int units, bool is_input);
Eigen::MatrixXd autoregressive_mask(const Eigen::VectorXi& in_degrees, const Eigen::VectorXi& out_degrees,
                                    bool strict);

} // namespace naqs
