#include "bubblectl/env.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bubblectl {

void EnvConfig::validate() const {
    if (!(x_min < x_max)) throw std::invalid_argument("EnvConfig: need x_min < x_max");
    if (!(PA_min < PA_max)) throw std::invalid_argument("EnvConfig: need PA_min < PA_max");
    if (!(tol > 0)) throw std::invalid_argument("EnvConfig: tol must be positive");
    if (step_cycles <= 0 || max_steps <= 0)
        throw std::invalid_argument("EnvConfig: step_cycles and max_steps must be positive");
    if (!(k_reward > 0)) throw std::invalid_argument("EnvConfig: k_reward must be positive");
    integrator.validate();
}

EnvConfig make_env_config(const AcousticField& field, double xi_min, double xi_max) {
    EnvConfig cfg;
    cfg.x_min = xi_min * field.lambda0;
    cfg.x_max = xi_max * field.lambda0;
    return cfg;
}

double shaped_reward(double xT, double xt, double x_min, double x_max, double k) {
    const double d = std::abs(xT - xt);
    const double d_max = std::max(x_max - xT, xT - x_min);
    if (d_max <= 0) return 1.0;  // degenerate target at a corner of a zero-width range
    return 1.0 - std::pow(d / d_max, k);
}

BubbleEnv::BubbleEnv(const PhysicalParams& params, const AcousticField& field,
                     const EnvConfig& cfg)
    : params_(params), field_(field), cfg_(cfg), rng_(cfg.seed) {
    params_.validate();
    cfg_.validate();
}

Observation BubbleEnv::observe(double pos_clamped) const {
    return {4.0 * xT_ / field_.lambda0, 4.0 * pos_clamped / field_.lambda0,
            4.0 * prev_pos_ / field_.lambda0};
}

Observation BubbleEnv::reset(std::optional<double> x0, std::optional<double> xT) {
    std::uniform_real_distribution<double> pos(cfg_.x_min, cfg_.x_max);
    const double x0v = x0 ? *x0 : pos(rng_);
    const double xTv = xT ? *xT : pos(rng_);
    if (x0v < cfg_.x_min || x0v > cfg_.x_max)
        throw std::invalid_argument("reset: x0 outside [x_min, x_max]");
    if (xTv < cfg_.x_min || xTv > cfg_.x_max)
        throw std::invalid_argument("reset: xT outside [x_min, x_max]");

    state_ = SimState{params_.R0, 0.0, x0v, 0.0, 0.0};
    xT_ = xTv;
    prev_pos_ = x0v;  // rest start: "no motion so far"
    steps_ = 0;
    active_ = true;
    trace_.clear();
    return observe(x0v);
}

StepResult BubbleEnv::step(const Action& action) {
    if (!active_) throw std::logic_error("step: environment not reset or episode over");

    StepResult out;
    out.info.action_clamped = action.PA0 < cfg_.PA_min || action.PA0 > cfg_.PA_max ||
                              action.PA1 < cfg_.PA_min || action.PA1 > cfg_.PA_max;
    field_.PA0 = std::clamp(action.PA0, cfg_.PA_min, cfg_.PA_max);
    field_.PA1 = std::clamp(action.PA1, cfg_.PA_min, cfg_.PA_max);

    const double duration = cfg_.step_cycles / field_.f0;
    const double prev_clamped = std::clamp(state_.x, cfg_.x_min, cfg_.x_max);
    double observed_pos;
    try {
        if (cfg_.observe_mean_position) {
            const MeanResult mr =
                integrate_with_mean(state_, field_, params_, duration, cfg_.integrator);
            state_ = mr.state;
            observed_pos = mr.mean_x;
        } else {
            state_ = integrate(state_, field_, params_, duration, cfg_.integrator);
            observed_pos = state_.x;
        }
    } catch (const IntegrationError& e) {
        steps_ += 1;
        active_ = false;
        out.info.state = e.last_state;
        out.info.aborted = true;
        out.info.abort_reason = e.what();
        out.done = true;
        out.reward = 0.0;
        prev_pos_ = prev_clamped;
        out.obs = observe(prev_clamped);
        trace_.push_back({steps_, e.last_state.t * field_.f0, e.last_state.x / field_.lambda0,
                          e.last_state.R / params_.R0, field_.PA0, field_.PA1, out.reward,
                          out.done});
        return out;
    }

    steps_ += 1;
    const double x = observed_pos;
    const double pos_clamped = std::clamp(x, cfg_.x_min, cfg_.x_max);

    out.info.state = state_;
    out.info.success = std::abs(xT_ - x) / field_.lambda0 <= cfg_.tol;
    out.info.out_of_bounds = x < cfg_.x_min || x > cfg_.x_max;
    out.reward = reward(xT_, pos_clamped);
    out.done = out.info.success || out.info.out_of_bounds || steps_ >= cfg_.max_steps;

    prev_pos_ = prev_clamped;
    out.obs = observe(pos_clamped);
    prev_pos_ = pos_clamped;

    if (out.done) active_ = false;
    trace_.push_back({steps_, state_.t * field_.f0, state_.x / field_.lambda0,
                      state_.R / params_.R0, field_.PA0, field_.PA1, out.reward, out.done});
    return out;
}

double BubbleEnv::reward(double xT, double xt) const {
    return shaped_reward(xT, xt, cfg_.x_min, cfg_.x_max, cfg_.k_reward);
}

}  // namespace bubblectl
