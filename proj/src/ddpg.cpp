#include "bubblectl/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubblectl {

void DdpgConfig::validate() const {
    if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("DdpgConfig: gamma in (0,1)");
    if (!(tau_soft > 0 && tau_soft <= 1))
        throw std::invalid_argument("DdpgConfig: tau_soft in (0,1]");
    if (batch_size <= 0 || buffer_capacity <= 0 || batch_size > buffer_capacity)
        throw std::invalid_argument("DdpgConfig: need 0 < batch_size <= buffer_capacity");
    if (noise_sigma < 0) throw std::invalid_argument("DdpgConfig: noise_sigma >= 0");
    if (!(lr > 0)) throw std::invalid_argument("DdpgConfig: lr must be positive");
    if (warmup_steps < 0 || total_steps <= 0 || update_ratio <= 0)
        throw std::invalid_argument("DdpgConfig: bad step counts");
}

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
    if (capacity <= 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    storage_.resize(capacity);
}

void ReplayBuffer::push(const Transition& t) {
    storage_[cursor_] = t;
    cursor_ = (cursor_ + 1) % capacity_;
    size_ = std::min<std::size_t>(size_ + 1, capacity_);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(int batch,
                                                      std::mt19937_64& rng) const {
    if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
    std::vector<std::size_t> idx(batch);
    for (auto& i : idx) i = pick(rng);
    return idx;
}

Action rescale_action(std::array<double, 2> y_hat, double PA_min, double PA_max) {
    const double half_span = 0.5 * (PA_max - PA_min);
    const double mid = 0.5 * (PA_max + PA_min);
    for (auto& y : y_hat) y = std::clamp(y, -1.0, 1.0);
    return {half_span * y_hat[0] + mid, half_span * y_hat[1] + mid};
}

std::array<double, 2> select_action_norm(const MlpParams& actor, const MlpSpec& spec,
                                         const Observation& obs, double noise_sigma,
                                         std::mt19937_64& rng) {
    Eigen::Vector3d in(obs.target_n, obs.pos_n, obs.prev_pos_n);
    const Eigen::VectorXd out = forward(actor, spec, Eigen::VectorXd(in));
    std::array<double, 2> y{out(0), out(1)};
    if (noise_sigma > 0) {
        std::normal_distribution<double> noise(0.0, noise_sigma);
        y[0] += noise(rng);
        y[1] += noise(rng);
    }
    y[0] = std::clamp(y[0], -1.0, 1.0);
    y[1] = std::clamp(y[1], -1.0, 1.0);
    return y;
}

DdpgAgent make_agent(const std::vector<int>& hidden, Activation hidden_act,
                     std::mt19937_64& rng) {
    if (hidden.empty()) throw std::invalid_argument("make_agent: need >= 1 hidden layer");
    DdpgAgent a;
    a.actor_spec.layer_sizes = {3};
    a.critic_spec.layer_sizes = {5};
    for (int h : hidden) {
        a.actor_spec.layer_sizes.push_back(h);
        a.critic_spec.layer_sizes.push_back(h);
    }
    a.actor_spec.layer_sizes.push_back(2);
    a.critic_spec.layer_sizes.push_back(1);
    a.actor_spec.hidden_activation = hidden_act;
    a.actor_spec.output_activation = Activation::tanh;
    a.critic_spec.hidden_activation = hidden_act;
    a.critic_spec.output_activation = Activation::linear;

    a.actor = init_params(a.actor_spec, rng);
    a.critic = init_params(a.critic_spec, rng);
    a.actor_target = a.actor;
    a.critic_target = a.critic;
    a.actor_opt = make_adam_state(a.actor);
    a.critic_opt = make_adam_state(a.critic);
    return a;
}

void soft_update(MlpParams& target, const MlpParams& online, double tau) {
    for (std::size_t l = 0; l < target.W.size(); ++l) {
        target.W[l] = tau * online.W[l] + (1.0 - tau) * target.W[l];
        target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
    }
}

namespace {

struct BatchMatrices {
    Eigen::MatrixXd S;    // 3 x B
    Eigen::MatrixXd SA;   // 5 x B, state stacked over action
    Eigen::MatrixXd S2;   // 3 x B
    Eigen::VectorXd r;
    Eigen::VectorXd not_done;
};

BatchMatrices gather(const ReplayBuffer& buffer, const std::vector<std::size_t>& idx) {
    const int B = static_cast<int>(idx.size());
    BatchMatrices m;
    m.S.resize(3, B);
    m.SA.resize(5, B);
    m.S2.resize(3, B);
    m.r.resize(B);
    m.not_done.resize(B);
    for (int c = 0; c < B; ++c) {
        const Transition& t = buffer.at(idx[c]);
        for (int k = 0; k < 3; ++k) {
            m.S(k, c) = t.s[k];
            m.SA(k, c) = t.s[k];
            m.S2(k, c) = t.s2[k];
        }
        m.SA(3, c) = t.a[0];
        m.SA(4, c) = t.a[1];
        m.r(c) = t.r;
        m.not_done(c) = t.done ? 0.0 : 1.0;
    }
    return m;
}

Eigen::MatrixXd stack_state_action(const Eigen::MatrixXd& S, const Eigen::MatrixXd& A) {
    Eigen::MatrixXd SA(S.rows() + A.rows(), S.cols());
    SA.topRows(S.rows()) = S;
    SA.bottomRows(A.rows()) = A;
    return SA;
}

}  // namespace

Eigen::VectorXd critic_targets(const std::vector<Transition>& batch,
                               const DdpgAgent& agent, double gamma) {
    const int B = static_cast<int>(batch.size());
    Eigen::MatrixXd S2(3, B);
    Eigen::VectorXd r(B), not_done(B);
    for (int c = 0; c < B; ++c) {
        for (int k = 0; k < 3; ++k) S2(k, c) = batch[c].s2[k];
        r(c) = batch[c].r;
        not_done(c) = batch[c].done ? 0.0 : 1.0;
    }
    const Eigen::MatrixXd A2 = forward(agent.actor_target, agent.actor_spec, S2);
    const Eigen::MatrixXd Q2 =
        forward(agent.critic_target, agent.critic_spec, stack_state_action(S2, A2));
    return r.array() + gamma * not_done.array() * Q2.row(0).transpose().array();
}

TrainStepDiag train_step(DdpgAgent& agent, const ReplayBuffer& buffer,
                         const DdpgConfig& cfg, std::mt19937_64& rng) {
    if (buffer.size() < static_cast<std::size_t>(cfg.batch_size))
        throw std::logic_error("train_step: buffer smaller than batch");
    const auto idx = buffer.sample_indices(cfg.batch_size, rng);
    const BatchMatrices m = gather(buffer, idx);
    const int B = cfg.batch_size;

    // critic: minimize mean squared TD error
    const Eigen::MatrixXd A2 = forward(agent.actor_target, agent.actor_spec, m.S2);
    const Eigen::MatrixXd Q2 =
        forward(agent.critic_target, agent.critic_spec, stack_state_action(m.S2, A2));
    const Eigen::VectorXd y =
        m.r.array() + cfg.gamma * m.not_done.array() * Q2.row(0).transpose().array();

    const Eigen::MatrixXd Q = forward(agent.critic, agent.critic_spec, m.SA);
    const Eigen::VectorXd err = Q.row(0).transpose() - y;
    TrainStepDiag diag;
    diag.critic_loss = err.squaredNorm() / B;

    Eigen::MatrixXd upstream_critic(1, B);
    upstream_critic.row(0) = (2.0 / B) * err.transpose();
    const Gradients gc = gradients(agent.critic, agent.critic_spec, m.SA, upstream_critic);
    adam_step(agent.critic, gc, agent.critic_opt, cfg.lr);

    // actor: ascend mean Q(s, mu(s)); the upstream -1/B turns it into descent
    const Eigen::MatrixXd Amu = forward(agent.actor, agent.actor_spec, m.S);
    const Eigen::MatrixXd SAmu = stack_state_action(m.S, Amu);
    const Eigen::MatrixXd Qmu = forward(agent.critic, agent.critic_spec, SAmu);
    diag.actor_objective = Qmu.row(0).mean();

    Eigen::MatrixXd upstream_q = Eigen::MatrixXd::Constant(1, B, -1.0 / B);
    const Gradients gq = gradients(agent.critic, agent.critic_spec, SAmu, upstream_q);
    const Eigen::MatrixXd dQ_dA = gq.gX.bottomRows(2);  // action rows of the input grad
    const Gradients ga = gradients(agent.actor, agent.actor_spec, m.S, dQ_dA);
    adam_step(agent.actor, ga, agent.actor_opt, cfg.lr);

    soft_update(agent.actor_target, agent.actor, cfg.tau_soft);
    soft_update(agent.critic_target, agent.critic, cfg.tau_soft);
    return diag;
}

TrainResult train(const PhysicalParams& params, const AcousticField& field,
                  const EnvConfig& env_cfg, const DdpgConfig& cfg,
                  const std::vector<int>& hidden, Activation hidden_act,
                  const TrainCallbacks& callbacks) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    TrainResult result;
    result.agent = make_agent(hidden, hidden_act, rng);
    DdpgAgent& agent = result.agent;
    ReplayBuffer buffer(cfg.buffer_capacity);
    BubbleEnv env(params, field, env_cfg);

    std::uniform_real_distribution<double> uniform_action(-1.0, 1.0);
    Observation obs = env.reset();
    double ep_return = 0;
    int ep_length = 0;
    std::int64_t episode = 0;
    double ema_return = 0, ema_length = 0;
    bool ema_init = false;

    for (std::int64_t step = 1; step <= cfg.total_steps; ++step) {
        std::array<double, 2> a_norm;
        if (step <= cfg.warmup_steps) {
            a_norm = {uniform_action(rng), uniform_action(rng)};
        } else {
            a_norm = select_action_norm(agent.actor, agent.actor_spec, obs,
                                        cfg.noise_sigma, rng);
        }
        const Action action = rescale_action(a_norm, env_cfg.PA_min, env_cfg.PA_max);
        const StepResult sr = env.step(action);
        ep_return += sr.reward;
        ep_length += 1;

        if (sr.info.aborted) {
            // solver artifact, not an MDP transition: keep it out of the buffer
            result.aborted_episodes += 1;
        } else {
            // step-cap truncation is not an environment terminal; bootstrap
            // through it and store done only for success/out-of-bounds ends
            const bool terminal = sr.info.success || sr.info.out_of_bounds;
            buffer.push({{obs.target_n, obs.pos_n, obs.prev_pos_n},
                         a_norm,
                         sr.reward,
                         {sr.obs.target_n, sr.obs.pos_n, sr.obs.prev_pos_n},
                         terminal});
        }

        if (step > cfg.warmup_steps &&
            buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
            for (int u = 0; u < cfg.update_ratio; ++u)
                train_step(agent, buffer, cfg, rng);
        }

        if (sr.done) {
            episode += 1;
            if (!ema_init) {
                ema_return = ep_return;
                ema_length = ep_length;
                ema_init = true;
            } else {
                ema_return = cfg.ema_alpha * ema_return + (1 - cfg.ema_alpha) * ep_return;
                ema_length = cfg.ema_alpha * ema_length + (1 - cfg.ema_alpha) * ep_length;
            }
            const EpisodeRow row{step, episode, ep_return, ep_length, ema_return,
                                 ema_length};
            result.log.push_back(row);
            if (callbacks.on_episode) callbacks.on_episode(row);
            ep_return = 0;
            ep_length = 0;
            obs = env.reset();
        } else {
            obs = sr.obs;
        }

        if (callbacks.on_checkpoint &&
            (step % cfg.checkpoint_interval == 0 || step == cfg.total_steps))
            callbacks.on_checkpoint(step, agent);
    }
    return result;
}

}  // namespace bubblectl
