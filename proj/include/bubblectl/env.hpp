/** \file env.hpp
 *  Episodic control environment around the bubble dynamics: the controller
 *  observes normalized positions, sets the two pressure amplitudes, and each
 *  action is held constant over a fixed number of acoustic cycles.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bubblectl/integrator.hpp"
#include "bubblectl/physics.hpp"

namespace bubblectl {

struct EnvConfig {
    double x_min = 0.05 * 0.06;  ///< lower observation limit [m]
    double x_max = 0.25 * 0.06;  ///< upper observation limit [m]
    int step_cycles = 50;        ///< acoustic cycles per action
    int max_steps = 12;          ///< episode cap
    double tol = 0.01;           ///< success tolerance on |xT - x| / lambda0
    double PA_min = 0.0;         ///< action lower limit [Pa]
    double PA_max = 1.0e5;       ///< action upper limit [Pa]
    double k_reward = 0.2;       ///< reward shaping exponent
    std::uint64_t seed = 1;
    bool observe_mean_position = false;  ///< observe the period-averaged x
                                         ///< instead of the boundary value
    IntegratorConfig integrator{};

    void validate() const;
};

/// Builds an EnvConfig whose position limits are the given fractions of the
/// field's fundamental wavelength.
EnvConfig make_env_config(const AcousticField& field, double xi_min = 0.05,
                          double xi_max = 0.25);

struct Observation {
    double target_n = 0;    ///< 4 xT / lambda0
    double pos_n = 0;       ///< 4 x_t / lambda0
    double prev_pos_n = 0;  ///< 4 x_{t-1} / lambda0
};

struct Action {
    double PA0 = 0;  ///< [Pa]
    double PA1 = 0;  ///< [Pa]
};

struct StepInfo {
    SimState state{};            ///< raw state after the step
    bool success = false;        ///< target reached within tolerance
    bool out_of_bounds = false;  ///< left [x_min, x_max] at the step boundary
    bool action_clamped = false;
    bool aborted = false;  ///< integration failure ended the episode
    std::string abort_reason;
};

struct StepResult {
    Observation obs{};
    double reward = 0;
    bool done = false;
    StepInfo info{};
};

/// One CSV-exportable trace record per environment step.
struct TraceRow {
    int step = 0;
    double t_cycles = 0;
    double xi = 0;       ///< x / lambda0
    double radius_n = 0; ///< R / R0
    double PA0 = 0;
    double PA1 = 0;
    double reward = 0;
    bool done = false;
};

/// Shaped distance reward 1 - (d / d_max)^k with
/// d_max = max(x_max - xT, xT - x_min).
double shaped_reward(double xT, double xt, double x_min, double x_max, double k);

class BubbleEnv {
  public:
    BubbleEnv(const PhysicalParams& params, const AcousticField& field,
              const EnvConfig& cfg);

    /// Starts a new episode; missing positions are drawn uniformly from
    /// [x_min, x_max] (x0 first, then xT).
    Observation reset(std::optional<double> x0 = std::nullopt,
                      std::optional<double> xT = std::nullopt);

    StepResult step(const Action& action);

    double reward(double xT, double xt) const;

    const SimState& state() const { return state_; }
    double target() const { return xT_; }
    int steps_taken() const { return steps_; }
    bool episode_active() const { return active_; }
    double lambda0() const { return field_.lambda0; }
    const EnvConfig& config() const { return cfg_; }
    const std::vector<TraceRow>& trace() const { return trace_; }

  private:
    PhysicalParams params_;
    AcousticField field_;
    EnvConfig cfg_;
    std::mt19937_64 rng_;

    SimState state_{};
    double xT_ = 0;
    double prev_pos_ = 0;  ///< previous observed (clamped) position [m]
    int steps_ = 0;
    bool active_ = false;
    std::vector<TraceRow> trace_;

    Observation observe(double pos_clamped) const;
};

}  // namespace bubblectl
