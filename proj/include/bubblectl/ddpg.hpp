/** \file ddpg.hpp
 *  Deep deterministic policy gradient: replay buffer, target networks with
 *  soft updates, Gaussian exploration in normalized action space, and the
 *  episode training loop over the bubble environment.
 */
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "bubblectl/env.hpp"
#include "bubblectl/neural.hpp"

namespace bubblectl {

struct DdpgConfig {
    double gamma = 0.99;
    int batch_size = 256;
    int buffer_capacity = 10'000;
    double tau_soft = 5.0e-3;
    double noise_sigma = 0.1;  ///< exploration std in normalized [-1,1] units
    double lr = 2.5e-4;
    int warmup_steps = 500;        ///< uniform random actions before learning
    std::int64_t total_steps = 100'000;
    int update_ratio = 1;          ///< gradient updates per environment step
    std::int64_t checkpoint_interval = 10'000;
    double ema_alpha = 0.99;       ///< smoothing for logged return/length
    std::uint64_t seed = 1;

    void validate() const;
};

/// Replay record over normalized observations and normalized actions.
struct Transition {
    std::array<double, 3> s{};
    std::array<double, 2> a{};  ///< in [-1, 1]
    double r = 0;
    std::array<double, 3> s2{};
    bool done = false;  ///< true terminal (bootstraps nothing)
};

/// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(int capacity);

    void push(const Transition& t);
    std::size_t size() const { return size_; }
    int capacity() const { return capacity_; }
    const Transition& at(std::size_t i) const { return storage_[i]; }

    /// Uniform over current contents, with replacement.
    std::vector<std::size_t> sample_indices(int batch, std::mt19937_64& rng) const;

  private:
    int capacity_;
    std::vector<Transition> storage_;
    std::size_t size_ = 0;
    std::size_t cursor_ = 0;
};

/// Maps the actor's tanh output into pressure amplitudes:
/// a_i = (PA_max - PA_min)/2 * y_i + (PA_max + PA_min)/2. Inputs are clamped
/// to [-1, 1] first.
Action rescale_action(std::array<double, 2> y_hat, double PA_min, double PA_max);

/// Deterministic policy output plus Gaussian exploration noise, clamped to
/// [-1, 1]; noise_sigma = 0 gives the deterministic policy.
std::array<double, 2> select_action_norm(const MlpParams& actor, const MlpSpec& spec,
                                         const Observation& obs, double noise_sigma,
                                         std::mt19937_64& rng);

/// Online and target actor/critic networks plus optimizer state.
struct DdpgAgent {
    MlpSpec actor_spec;
    MlpSpec critic_spec;
    MlpParams actor, critic;
    MlpParams actor_target, critic_target;
    AdamState actor_opt, critic_opt;
};

/// Default shapes: actor in -> hidden -> 2 (tanh output), critic
/// in+2 -> hidden -> 1 (linear output).
DdpgAgent make_agent(const std::vector<int>& hidden, Activation hidden_act,
                     std::mt19937_64& rng);

/// theta_target <- tau * theta + (1 - tau) * theta_target
void soft_update(MlpParams& target, const MlpParams& online, double tau);

/// y_i = r_i + gamma (1 - done_i) Q_target(s2_i, mu_target(s2_i))
Eigen::VectorXd critic_targets(const std::vector<Transition>& batch,
                               const DdpgAgent& agent, double gamma);

struct TrainStepDiag {
    double critic_loss = 0;
    double actor_objective = 0;  ///< mean_batch Q(s, mu(s))
};

/// One critic regression step, one policy-ascent step, one soft update of
/// both targets. The caller guarantees buffer.size() >= cfg.batch_size.
TrainStepDiag train_step(DdpgAgent& agent, const ReplayBuffer& buffer,
                         const DdpgConfig& cfg, std::mt19937_64& rng);

struct EpisodeRow {
    std::int64_t global_step = 0;
    std::int64_t episode = 0;
    double ret = 0;
    int length = 0;
    double ema_return = 0;
    double ema_length = 0;
};

struct TrainCallbacks {
    std::function<void(const EpisodeRow&)> on_episode;
    std::function<void(std::int64_t step, const DdpgAgent&)> on_checkpoint;
};

struct TrainResult {
    std::vector<EpisodeRow> log;
    DdpgAgent agent;
    std::int64_t aborted_episodes = 0;
};

/// Runs the full training loop; reproducible under a fixed cfg.seed (the
/// environment draws from its own seed).
TrainResult train(const PhysicalParams& params, const AcousticField& field,
                  const EnvConfig& env_cfg, const DdpgConfig& cfg,
                  const std::vector<int>& hidden, Activation hidden_act,
                  const TrainCallbacks& callbacks = {});

}  // namespace bubblectl
