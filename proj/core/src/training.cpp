#include "naqs/training.hpp"

#include <cmath>
#include <limits>

namespace naqs {

void TrainingSchedule::validate() const {
    if (stages.empty()) throw ConfigError("training schedule needs at least one stage");
    if (penalty_weight < 0.0) throw ConfigError("penalty weight must be >= 0");
    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (stages[i].steps < 1) throw ConfigError("stage step count must be >= 1");
        if (stages[i].batch_size < 1) throw ConfigError("stage batch size must be >= 1");
        if (!(stages[i].learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
        if (i > 0) {
            if (stages[i].learning_rate > stages[i - 1].learning_rate)
                throw ConfigError("learning rates must be non-increasing across stages");
            if (stages[i].batch_size < stages[i - 1].batch_size)
                throw ConfigError("batch sizes must be non-decreasing across stages");
        }
    }
}

Eigen::VectorXcd local_energy_batch(const Hamiltonian& h, const QuantumState& state,
                                    const SpinMatrix& batch) {
    const int cols = static_cast<int>(batch.cols());
    const int n = state.num_sites();
    if (n != h.num_sites()) throw std::invalid_argument("state/hamiltonian size mismatch");

    const Eigen::VectorXd lp = state.log_prob_batch(batch);
    const Eigen::VectorXd ph = state.phase_batch(batch);
    for (int c = 0; c < cols; ++c)
        if (std::isinf(lp(c)))
            throw DegenerateSample("local energy evaluated on a zero-probability configuration");

    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(cols);

    // diagonal bond terms and the list of exchange configurations
    std::vector<int> flip_owner;
    std::vector<std::pair<int, int>> flip_bond;
    for (int c = 0; c < cols; ++c) {
        double diag = 0.0;
        for (const auto& [p, q] : h.position_bonds) {
            if (batch(p, c) == batch(q, c)) {
                diag += 0.25;
            } else {
                diag -= 0.25;
                flip_owner.push_back(c);
                flip_bond.emplace_back(p, q);
            }
        }
        e(c) = diag;
    }

    if (!flip_owner.empty()) {
        SpinMatrix flips(n, static_cast<Eigen::Index>(flip_owner.size()));
        for (std::size_t f = 0; f < flip_owner.size(); ++f) {
            flips.col(static_cast<Eigen::Index>(f)) = batch.col(flip_owner[f]);
            flips(flip_bond[f].first, static_cast<Eigen::Index>(f)) *= -1.0;
            flips(flip_bond[f].second, static_cast<Eigen::Index>(f)) *= -1.0;
        }
        const Eigen::VectorXd lp_flip = state.log_prob_batch(flips);
        const Eigen::VectorXd ph_flip = state.phase_batch(flips);
        for (std::size_t f = 0; f < flip_owner.size(); ++f) {
            const int c = flip_owner[f];
            const double dlog = 0.5 * (lp_flip(static_cast<Eigen::Index>(f)) - lp(c));
            const double dphase = ph_flip(static_cast<Eigen::Index>(f)) - ph(c);
            const double mag = std::exp(dlog);
            e(c) += 0.5 * mag * std::complex<double>(std::cos(dphase), std::sin(dphase));
        }
    }
    return e;
}

std::complex<double> local_energy(const Hamiltonian& h, const QuantumState& state,
                                  const SpinConfiguration& sigma) {
    return local_energy_batch(h, state, pack_configuration(sigma))(0);
}

AdamState AdamState::for_network(const FeedForward& net) {
    AdamState adam;
    adam.m = net.zero_gradient();
    adam.v = net.zero_gradient();
    return adam;
}

void adam_update(FeedForward& net, AdamState& adam, const NetworkGradient& grad, double learning_rate) {
    adam.t += 1;
    const double bc1 = 1.0 - std::pow(adam.beta1, static_cast<double>(adam.t));
    const double bc2 = 1.0 - std::pow(adam.beta2, static_cast<double>(adam.t));
    auto& layers = net.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
        adam.m.w[l] = adam.beta1 * adam.m.w[l] + (1.0 - adam.beta1) * grad.w[l];
        adam.v.w[l] = adam.beta2 * adam.v.w[l].array().matrix() +
                      (1.0 - adam.beta2) * grad.w[l].array().square().matrix();
        adam.m.b[l] = adam.beta1 * adam.m.b[l] + (1.0 - adam.beta1) * grad.b[l];
        adam.v.b[l] = adam.beta2 * adam.v.b[l].array().matrix() +
                      (1.0 - adam.beta2) * grad.b[l].array().square().matrix();

        layers[l].weights.array() -= learning_rate * (adam.m.w[l].array() / bc1) /
                                     ((adam.v.w[l].array() / bc2).sqrt() + adam.epsilon);
        layers[l].biases.array() -= learning_rate * (adam.m.b[l].array() / bc1) /
                                    ((adam.v.b[l].array() / bc2).sqrt() + adam.epsilon);
        layers[l].weights = layers[l].weights.cwiseProduct(layers[l].mask);
    }
}

namespace {

void check_finite(const NetworkGradient& grad, const char* which) {
    for (std::size_t l = 0; l < grad.w.size(); ++l) {
        if (!grad.w[l].allFinite() || !grad.b[l].allFinite())
            throw NumericalFailure(std::string("non-finite gradient in ") + which + " layer " +
                                   std::to_string(l));
    }
}

} // namespace

VmcStepStats vmc_step(Naqs& state, const Hamiltonian& h, int batch_size, double learning_rate,
                      double penalty_weight, AdamState& prob_adam, AdamState* phase_adam,
                      RandomStream& rng) {
    const bool has_phase_net = state.phase_model() == PhaseModelKind::PhaseNetwork;
    if (has_phase_net && phase_adam == nullptr)
        throw std::invalid_argument("phase network present but no phase optimizer state");

    const SpinMatrix batch = state.sample_batch(batch_size, rng);
    const Eigen::VectorXcd e_loc = local_energy_batch(h, state, batch);

    Eigen::VectorXd magnetization = batch.colwise().sum().transpose();
    Eigen::VectorXcd e_total = e_loc;
    e_total.real() += penalty_weight * magnetization.array().square().matrix();

    const std::complex<double> mean_total = e_total.mean();
    const Eigen::VectorXcd centered = e_total.array() - mean_total;

    const double inv_b = 1.0 / static_cast<double>(batch_size);
    NetworkGradient grad_prob = state.prob().net().zero_gradient();
    state.accumulate_prob_grad(batch, (centered.real() * inv_b).eval(), grad_prob);
    check_finite(grad_prob, "probability network");
    adam_update(state.prob().net(), prob_adam, grad_prob, learning_rate);

    if (has_phase_net) {
        NetworkGradient grad_phase = state.phase_network().net().zero_gradient();
        state.phase_network().accumulate_weighted_grad(batch, (2.0 * centered.imag() * inv_b).eval(),
                                                       grad_phase);
        check_finite(grad_phase, "phase network");
        adam_update(state.phase_network().net(), *phase_adam, grad_phase, learning_rate);
    }

    VmcStepStats stats;
    stats.energy = e_loc.real().mean();
    stats.variance = batch_size > 1
                         ? (e_loc.real().array() - stats.energy).square().sum() / (batch_size - 1.0)
                         : 0.0;
    stats.stderr_mc = std::sqrt(stats.variance / static_cast<double>(batch_size));
    stats.loss = mean_total.real();
    int nonzero = 0;
    for (int c = 0; c < batch_size; ++c)
        if (magnetization(c) != 0.0) ++nonzero;
    stats.sz_nonzero_fraction = static_cast<double>(nonzero) / static_cast<double>(batch_size);
    return stats;
}

VmcStepStats train(Naqs& state, const Hamiltonian& h, const TrainingSchedule& schedule,
                   std::uint64_t seed, const TrainCallback& callback) {
    schedule.validate();
    RandomStream rng(seed);
    AdamState prob_adam = AdamState::for_network(state.prob().net());
    AdamState phase_adam;
    AdamState* phase_ptr = nullptr;
    if (state.phase_model() == PhaseModelKind::PhaseNetwork) {
        phase_adam = AdamState::for_network(state.phase_network().net());
        phase_ptr = &phase_adam;
    }

    VmcStepStats last;
    long global_step = 0;
    for (std::size_t stage = 0; stage < schedule.stages.size(); ++stage) {
        const TrainingStage& s = schedule.stages[stage];
        for (int step = 0; step < s.steps; ++step) {
            last = vmc_step(state, h, s.batch_size, s.learning_rate, schedule.penalty_weight,
                            prob_adam, phase_ptr, rng);
            ++global_step;
            if (callback) {
                TrainStepInfo info{static_cast<int>(stage), step, global_step, last};
                if (!callback(info)) return last;
            }
        }
    }
    return last;
}

ReverseTrainResult train_reverse(const QuantumState& forward, NaqsReverse& reverse,
                                 const TrainingSchedule& schedule, std::uint64_t seed,
                                 const ReverseCallback& callback) {
    schedule.validate();
    RandomStream rng(seed);
    AdamState adam = AdamState::for_network(reverse.network().reversed_net().net());

    ReverseTrainResult result;
    long global_step = 0;
    for (std::size_t stage = 0; stage < schedule.stages.size(); ++stage) {
        const TrainingStage& s = schedule.stages[stage];
        const int probe = std::max(1, std::min(10, s.steps / 4));
        double head_sum = 0.0, tail_sum = 0.0;
        int head_count = 0, tail_count = 0;

        for (int step = 0; step < s.steps; ++step) {
            const SpinMatrix batch = forward.sample_batch(s.batch_size, rng);
            const Eigen::VectorXd lp_fwd = forward.log_prob_batch(batch);
            const Eigen::VectorXd lp_rev = reverse.log_prob_batch(batch);
            const double kl = (lp_fwd - lp_rev).mean();

            NetworkGradient grad = reverse.network().reversed_net().net().zero_gradient();
            const double inv_b = -1.0 / static_cast<double>(s.batch_size);
            reverse.accumulate_grad(batch, Eigen::VectorXd::Constant(s.batch_size, inv_b), grad);
            check_finite(grad, "reverse network");
            adam_update(reverse.network().reversed_net().net(), adam, grad, s.learning_rate);

            result.final_kl = kl;
            ++global_step;
            if (step < probe) {
                head_sum += kl;
                ++head_count;
            }
            if (step >= s.steps - probe) {
                tail_sum += kl;
                ++tail_count;
            }
            if (callback) {
                ReverseStepInfo info{static_cast<int>(stage), step, global_step, kl};
                if (!callback(info)) return result;
            }
        }

        if (head_count > 0 && tail_count > 0 && s.steps > 2 * probe &&
            tail_sum / tail_count > head_sum / head_count) {
            result.halted_on_increase = true;
            result.message = "KL estimate increased over stage " + std::to_string(stage) +
                             "; halting remaining stages";
            return result;
        }
    }
    return result;
}

double enumerated_kl(const QuantumState& p, const ReverseModel& p_r) {
    const int n = p.num_sites();
    if (n > kMaxDenseSites) throw SizeLimit("KL enumeration limited to 20 sites");
    const std::int64_t dim = 1ll << n;
    double kl = 0.0;
    constexpr std::int64_t chunk = 4096;
    for (std::int64_t start = 0; start < dim; start += chunk) {
        const std::int64_t count = std::min(chunk, dim - start);
        SpinMatrix batch(n, count);
        for (std::int64_t c = 0; c < count; ++c)
            for (int j = 0; j < n; ++j)
                batch(j, c) = ((static_cast<std::uint64_t>(start + c) >> j) & 1u) ? 1.0 : -1.0;
        const Eigen::VectorXd lp = p.log_prob_batch(batch);
        const Eigen::VectorXd lr = p_r.log_prob_batch(batch);
        for (std::int64_t c = 0; c < count; ++c) {
            const double prob = std::exp(lp(c));
            if (prob > 0.0) kl += prob * (lp(c) - lr(c));
        }
    }
    return kl;
}

} // namespace naqs
