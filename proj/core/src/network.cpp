#include "naqs/network.hpp"

#include <cmath>
#include <stdexcept>

namespace naqs {

SpinMatrix pack_configuration(const SpinConfiguration& sigma) {
    SpinMatrix m(sigma.size(), 1);
    for (int i = 0; i < sigma.size(); ++i) m(i, 0) = static_cast<double>(sigma[i]);
    return m;
}

SpinConfiguration unpack_column(const SpinMatrix& batch, int column) {
    SpinConfiguration sigma(static_cast<int>(batch.rows()));
    for (int i = 0; i < batch.rows(); ++i) sigma[i] = batch(i, column) > 0.0 ? +1 : -1;
    return sigma;
}

void NetworkGradient::set_zero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
}

void NetworkGradient::axpy(double alpha, const NetworkGradient& other) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        w[l] += alpha * other.w[l];
        b[l] += alpha * other.b[l];
    }
}

double NetworkGradient::squared_norm() const {
    double s = 0.0;
    for (const auto& m : w) s += m.squaredNorm();
    for (const auto& v : b) s += v.squaredNorm();
    return s;
}

bool NetworkGradient::all_finite() const {
    for (const auto& m : w)
        if (!m.allFinite()) return false;
    for (const auto& v : b)
        if (!v.allFinite()) return false;
    return true;
}

FeedForward::FeedForward(std::vector<MaskedLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l)
        if (layers_[l].fan_out() != layers_[l + 1].fan_in())
            throw std::invalid_argument("layer shape mismatch");
}

int FeedForward::parameter_count() const {
    int n = 0;
    for (const auto& layer : layers_) n += layer.fan_in() * layer.fan_out() + layer.fan_out();
    return n;
}

Eigen::VectorXd FeedForward::flatten() const {
    Eigen::VectorXd out(parameter_count());
    int at = 0;
    for (const auto& layer : layers_) {
        for (int r = 0; r < layer.fan_out(); ++r)
            for (int c = 0; c < layer.fan_in(); ++c) out(at++) = layer.weights(r, c);
        for (int r = 0; r < layer.fan_out(); ++r) out(at++) = layer.biases(r);
    }
    return out;
}

void FeedForward::unflatten(const Eigen::VectorXd& params) {
    if (params.size() != parameter_count()) throw std::invalid_argument("parameter vector size mismatch");
    int at = 0;
    for (auto& layer : layers_) {
        for (int r = 0; r < layer.fan_out(); ++r)
            for (int c = 0; c < layer.fan_in(); ++c) layer.weights(r, c) = params(at++);
        for (int r = 0; r < layer.fan_out(); ++r) layer.biases(r) = params(at++);
        layer.weights = layer.weights.cwiseProduct(layer.mask);
    }
}

NetworkGradient FeedForward::zero_gradient() const {
    NetworkGradient g;
    for (const auto& layer : layers_) {
        g.w.emplace_back(Eigen::MatrixXd::Zero(layer.fan_out(), layer.fan_in()));
        g.b.emplace_back(Eigen::VectorXd::Zero(layer.fan_out()));
    }
    return g;
}

Eigen::MatrixXd FeedForward::forward(const SpinMatrix& input) const {
    Eigen::MatrixXd a = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = (layers_[l].weights * a).colwise() + layers_[l].biases;
        if (l + 1 == layers_.size()) return z;
        a = z.array().tanh().matrix();
    }
    return a; // unreachable
}

Eigen::MatrixXd FeedForward::forward(const SpinMatrix& input,
                                     std::vector<Eigen::MatrixXd>& activations) const {
    activations.clear();
    activations.reserve(layers_.size());
    activations.push_back(input);
    Eigen::MatrixXd a = input;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Eigen::MatrixXd z = (layers_[l].weights * a).colwise() + layers_[l].biases;
        if (l + 1 == layers_.size()) return z;
        a = z.array().tanh().matrix();
        activations.push_back(a);
    }
    return a; // unreachable
}

void FeedForward::backward(const std::vector<Eigen::MatrixXd>& activations, Eigen::MatrixXd delta,
                           NetworkGradient& grad) const {
    for (int l = static_cast<int>(layers_.size()) - 1; l >= 0; --l) {
        const auto& act = activations[static_cast<std::size_t>(l)];
        grad.w[static_cast<std::size_t>(l)] +=
            (delta * act.transpose()).cwiseProduct(layers_[static_cast<std::size_t>(l)].mask);
        grad.b[static_cast<std::size_t>(l)] += delta.rowwise().sum();
        if (l > 0) {
            delta = (layers_[static_cast<std::size_t>(l)].weights.transpose() * delta)
                        .cwiseProduct((1.0 - act.array().square()).matrix());
        }
    }
}

Eigen::VectorXi autoregressive_degrees(int num_sites, int units, bool is_input) {
    Eigen::VectorXi deg(units);
    if (is_input) {
        for (int i = 0; i < units; ++i) deg(i) = i + 1;
        return deg;
    }
    if (num_sites < 2) {
        deg.setZero(); // no valid hidden degrees for a single site; bias path only
        return deg;
    }
    for (int i = 0; i < units; ++i) deg(i) = 1 + (i % (num_sites - 1));
    return deg;
}

Eigen::MatrixXd autoregressive_mask(const Eigen::VectorXi& in_degrees, const Eigen::VectorXi& out_degrees,
                                    bool strict) {
    Eigen::MatrixXd mask(out_degrees.size(), in_degrees.size());
    for (int o = 0; o < out_degrees.size(); ++o)
        for (int i = 0; i < in_degrees.size(); ++i)
            mask(o, i) = (strict ? out_degrees(o) > in_degrees(i) : out_degrees(o) >= in_degrees(i)) ? 1.0 : 0.0;
    return mask;
}

namespace {

MaskedLayer make_layer(const Eigen::VectorXi& in_degrees, const Eigen::VectorXi& out_degrees, bool strict,
                       RandomStream& rng) {
    MaskedLayer layer;
    const int fan_in = static_cast<int>(in_degrees.size());
    const int fan_out = static_cast<int>(out_degrees.size());
    layer.degrees = out_degrees;
    layer.mask = autoregressive_mask(in_degrees, out_degrees, strict);
    layer.weights.resize(fan_out, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = scale * rng.normal();
    layer.weights = layer.weights.cwiseProduct(layer.mask);
    layer.biases = Eigen::VectorXd::Zero(fan_out);
    return layer;
}

MaskedLayer make_dense_layer(int fan_in, int fan_out, RandomStream& rng) {
    MaskedLayer layer;
    layer.degrees = Eigen::VectorXi::Zero(fan_out);
    layer.mask = Eigen::MatrixXd::Ones(fan_out, fan_in);
    layer.weights.resize(fan_out, fan_in);
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int r = 0; r < fan_out; ++r)
        for (int c = 0; c < fan_in; ++c) layer.weights(r, c) = scale * rng.normal();
    layer.biases = Eigen::VectorXd::Zero(fan_out);
    return layer;
}

FeedForward build_masked_stack(int n, int depth, int width, RandomStream& rng) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    if (width < 1) throw std::invalid_argument("width must be >= 1");
    const int hidden = width * n;
    std::vector<MaskedLayer> layers;
    Eigen::VectorXi in_deg = autoregressive_degrees(n, n, true);
    for (int l = 0; l + 1 < depth; ++l) {
        Eigen::VectorXi out_deg = autoregressive_degrees(n, hidden, false);
        layers.push_back(make_layer(in_deg, out_deg, false, rng));
        in_deg = out_deg;
    }
    Eigen::VectorXi final_deg = autoregressive_degrees(n, n, true);
    layers.push_back(make_layer(in_deg, final_deg, true, rng));
    return FeedForward(std::move(layers));
}

FeedForward build_dense_stack(int n, int depth, int width, int outputs, RandomStream& rng) {
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    const int hidden = width * n;
    std::vector<MaskedLayer> layers;
    int fan_in = n;
    for (int l = 0; l + 1 < depth; ++l) {
        layers.push_back(make_dense_layer(fan_in, hidden, rng));
        fan_in = hidden;
    }
    layers.push_back(make_dense_layer(fan_in, outputs, rng));
    return FeedForward(std::move(layers));
}

inline Eigen::MatrixXd clamp_theta(Eigen::MatrixXd theta) {
    return theta.array()
        .max(ProbabilityNetwork::theta_floor)
        .min(1.0 - ProbabilityNetwork::theta_floor)
        .matrix();
}

// dlnp/dz through the clamped logistic output: (t/theta - (1-t)/(1-theta)) *
// theta_raw * (1 - theta_raw); equals t - theta when the clamp is inactive
// and vanishes in the saturated tails, consistent with finite differences.
inline Eigen::MatrixXd logistic_delta(const SpinMatrix& batch, const Eigen::MatrixXd& z) {
    Eigen::ArrayXXd theta_raw = 1.0 / (1.0 + (-z.array()).exp());
    Eigen::ArrayXXd theta = theta_raw.max(ProbabilityNetwork::theta_floor)
                                .min(1.0 - ProbabilityNetwork::theta_floor);
    Eigen::ArrayXXd target = (batch.array() + 1.0) * 0.5;
    return ((target / theta - (1.0 - target) / (1.0 - theta)) * theta_raw * (1.0 - theta_raw)).matrix();
}

} // namespace

ProbabilityNetwork::ProbabilityNetwork(SiteOrdering ordering, int depth, int width, RandomStream& rng)
    : ordering_(std::move(ordering)), depth_(depth), width_(width),
      net_(build_masked_stack(ordering_.num_sites(), depth, width, rng)) {}

ProbabilityNetwork::ProbabilityNetwork(SiteOrdering ordering, int depth, int width, FeedForward net)
    : ordering_(std::move(ordering)), depth_(depth), width_(width), net_(std::move(net)) {
    if (net_.num_inputs() != ordering_.num_sites() || net_.num_outputs() != ordering_.num_sites())
        throw std::invalid_argument("network shape does not match site count");
}

Eigen::MatrixXd ProbabilityNetwork::conditionals(const SpinMatrix& batch) const {
    Eigen::MatrixXd z = net_.forward(batch);
    return clamp_theta((1.0 / (1.0 + (-z.array()).exp())).matrix());
}

Eigen::VectorXd ProbabilityNetwork::conditionals(const SpinConfiguration& sigma) const {
    return conditionals(pack_configuration(sigma)).col(0);
}

Eigen::MatrixXd ProbabilityNetwork::conditional_log_matrix(const SpinMatrix& batch) const {
    Eigen::ArrayXXd theta = conditionals(batch).array();
    return (batch.array() > 0.0).select(theta.log(), (1.0 - theta).log()).matrix();
}

double ProbabilityNetwork::log_prob(const SpinConfiguration& sigma) const {
    return conditional_log_matrix(pack_configuration(sigma)).col(0).sum();
}

Eigen::VectorXd ProbabilityNetwork::log_prob_batch(const SpinMatrix& batch) const {
    return conditional_log_matrix(batch).colwise().sum().transpose();
}

double ProbabilityNetwork::log_prob_prefix(const SpinConfiguration& sigma, int cut) const {
    return conditional_log_matrix(pack_configuration(sigma)).col(0).head(cut).sum();
}

Eigen::VectorXd ProbabilityNetwork::log_prob_prefix_batch(const SpinMatrix& batch, int cut) const {
    return conditional_log_matrix(batch).topRows(cut).colwise().sum().transpose();
}

void ProbabilityNetwork::sample_range(SpinMatrix& batch, int first, int last, RandomStream& rng) const {
    const int cols = static_cast<int>(batch.cols());
    for (int i = first; i < last; ++i) {
        Eigen::MatrixXd theta = conditionals(batch);
        for (int b = 0; b < cols; ++b) batch(i, b) = rng.uniform() < theta(i, b) ? 1.0 : -1.0;
    }
}

SpinMatrix ProbabilityNetwork::sample_batch(int count, RandomStream& rng) const {
    SpinMatrix batch = SpinMatrix::Constant(num_sites(), count, -1.0);
    sample_range(batch, 0, num_sites(), rng);
    return batch;
}

SpinConfiguration ProbabilityNetwork::sample(RandomStream& rng) const {
    return unpack_column(sample_batch(1, rng), 0);
}

std::vector<SpinConfiguration> ProbabilityNetwork::sample(int count, RandomStream& rng) const {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    SpinMatrix batch = sample_batch(count, rng);
    std::vector<SpinConfiguration> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int b = 0; b < count; ++b) out.push_back(unpack_column(batch, b));
    return out;
}

NetworkGradient ProbabilityNetwork::grad_log_prob(const SpinConfiguration& sigma) const {
    NetworkGradient grad = net_.zero_gradient();
    accumulate_weighted_grad(pack_configuration(sigma), Eigen::VectorXd::Ones(1), grad);
    return grad;
}

void ProbabilityNetwork::accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                                  NetworkGradient& grad) const {
    std::vector<Eigen::MatrixXd> activations;
    Eigen::MatrixXd z = net_.forward(batch, activations);
    Eigen::MatrixXd delta = logistic_delta(batch, z);
    delta = delta * weights.asDiagonal();
    net_.backward(activations, std::move(delta), grad);
}

PhaseNetwork::PhaseNetwork(int num_sites, int depth, int width, RandomStream& rng)
    : num_sites_(num_sites), depth_(depth), width_(width),
      net_(build_dense_stack(num_sites, depth, width, 1, rng)) {}

PhaseNetwork::PhaseNetwork(int num_sites, int depth, int width, FeedForward net)
    : num_sites_(num_sites), depth_(depth), width_(width), net_(std::move(net)) {
    if (net_.num_inputs() != num_sites_ || net_.num_outputs() != 1)
        throw std::invalid_argument("phase network shape mismatch");
}

double PhaseNetwork::phase(const SpinConfiguration& sigma) const {
    return net_.forward(pack_configuration(sigma))(0, 0);
}

Eigen::VectorXd PhaseNetwork::phase_batch(const SpinMatrix& batch) const {
    return net_.forward(batch).row(0).transpose();
}

NetworkGradient PhaseNetwork::grad_phase(const SpinConfiguration& sigma) const {
    NetworkGradient grad = net_.zero_gradient();
    accumulate_weighted_grad(pack_configuration(sigma), Eigen::VectorXd::Ones(1), grad);
    return grad;
}

void PhaseNetwork::accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                            NetworkGradient& grad) const {
    std::vector<Eigen::MatrixXd> activations;
    net_.forward(batch, activations);
    Eigen::MatrixXd delta = weights.transpose(); // d phi / d z_out = 1
    net_.backward(activations, std::move(delta), grad);
}

ReverseNetwork::ReverseNetwork(const SiteOrdering& forward_ordering, int depth, int width,
                               RandomStream& rng)
    : net_(forward_ordering.reversed(), depth, width, rng) {}

ReverseNetwork::ReverseNetwork(ProbabilityNetwork reversed_net) : net_(std::move(reversed_net)) {}

SpinMatrix ReverseNetwork::reverse_rows(const SpinMatrix& batch) const {
    return batch.colwise().reverse();
}

double ReverseNetwork::log_prob(const SpinConfiguration& sigma) const {
    return net_.log_prob_batch(reverse_rows(pack_configuration(sigma)))(0);
}

Eigen::VectorXd ReverseNetwork::log_prob_batch(const SpinMatrix& batch) const {
    return net_.log_prob_batch(reverse_rows(batch));
}

double ReverseNetwork::log_prefix_conditional(const SpinConfiguration& sigma, int cut) const {
    return log_prefix_conditional_batch(pack_configuration(sigma), cut)(0);
}

Eigen::VectorXd ReverseNetwork::log_prefix_conditional_batch(const SpinMatrix& batch, int cut) const {
    // sigma_a occupies the last `cut` reversed positions
    const SpinMatrix rev = reverse_rows(batch);
    Eigen::MatrixXd logs = net_.conditional_log_matrix(rev);
    return logs.bottomRows(cut).colwise().sum().transpose();
}

void ReverseNetwork::sample_prefix_given_suffix(SpinMatrix& batch, int cut, RandomStream& rng) const {
    const int n = num_sites();
    SpinMatrix rev = reverse_rows(batch);
    net_.sample_range(rev, n - cut, n, rng);
    batch = rev.colwise().reverse();
}

NetworkGradient ReverseNetwork::grad_log_prob(const SpinConfiguration& sigma) const {
    NetworkGradient grad = net_.net().zero_gradient();
    accumulate_weighted_grad(pack_configuration(sigma), Eigen::VectorXd::Ones(1), grad);
    return grad;
}

void ReverseNetwork::accumulate_weighted_grad(const SpinMatrix& batch, const Eigen::VectorXd& weights,
                                              NetworkGradient& grad) const {
    net_.accumulate_weighted_grad(reverse_rows(batch), weights, grad);
}

} // namespace naqs
