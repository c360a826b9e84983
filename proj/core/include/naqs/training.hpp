#pragma once

#include <complex>
#include <functional>
#include <string>

#include "naqs/hamiltonian.hpp"
#include "naqs/oracle.hpp"
#include "naqs/state.hpp"

namespace naqs {

struct TrainingStage {
    int steps = 0;
    double learning_rate = 1e-3;
    int batch_size = 1000;
};

struct TrainingSchedule {
    std::vector<TrainingStage> stages;
    double penalty_weight = 0.0; // weight of (sum_i s_i)^2 added to E_loc

    void validate() const; // lr positive and non-increasing, batch non-decreasing
};

// E_loc(sigma) = sum_sigma' H_{sigma sigma'} psi(sigma') / psi(sigma)
std::complex<double> local_energy(const Hamiltonian& h, const QuantumState& state,
                                  const SpinConfiguration& sigma);
Eigen::VectorXcd local_energy_batch(const Hamiltonian& h, const QuantumState& state,
                                    const SpinMatrix& batch);

struct AdamState {
    NetworkGradient m;
    NetworkGradient v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_network(const FeedForward& net);
};

// One Adam update; re-applies the connectivity masks afterwards.
void adam_update(FeedForward& net, AdamState& adam, const NetworkGradient& grad, double learning_rate);

struct VmcStepStats {
    double energy = 0.0;   // mean Re E_loc, without the penalty
    double stderr_mc = 0.0;
    double variance = 0.0; // sample variance of Re E_loc
    double loss = 0.0;     // mean of Re E_loc + penalty
    double sz_nonzero_fraction = 0.0;
};

// Draws a batch, forms the stochastic gradient
// 2 Re<(E_loc - <E_loc>) grad ln psi*> and applies one Adam update per
// network. `phase_adam` must be null exactly when the state uses the
// Marshall rule.
VmcStepStats vmc_step(Naqs& state, const Hamiltonian& h, int batch_size, double learning_rate,
                      double penalty_weight, AdamState& prob_adam, AdamState* phase_adam,
                      RandomStream& rng);

struct TrainStepInfo {
    int stage = 0;
    int step_in_stage = 0;
    long global_step = 0;
    VmcStepStats stats;
};
using TrainCallback = std::function<bool(const TrainStepInfo&)>; // false stops training

VmcStepStats train(Naqs& state, const Hamiltonian& h, const TrainingSchedule& schedule,
                   std::uint64_t seed, const TrainCallback& callback = nullptr);

struct ReverseStepInfo {
    int stage = 0;
    int step_in_stage = 0;
    long global_step = 0;
    double kl_estimate = 0.0; // Monte Carlo <ln p - ln p_R>
};
using ReverseCallback = std::function<bool(const ReverseStepInfo&)>;

struct ReverseTrainResult {
    double final_kl = 0.0;
    bool halted_on_increase = false;
    std::string message;
};

// Minimizes D_KL(p || p_R) over the reverse parameters by descending
// -<grad ln p_R> on samples from the frozen forward state. A stage whose
// Monte Carlo KL estimate ends higher than it started is halted with a
// warning.
ReverseTrainResult train_reverse(const QuantumState& forward, NaqsReverse& reverse,
                                 const TrainingSchedule& schedule, std::uint64_t seed,
                                 const ReverseCallback& callback = nullptr);

// Exact D_KL(p || p_R) by basis enumeration (N <= 20).
double enumerated_kl(const QuantumState& p, const ReverseModel& p_r);

} // namespace naqs
