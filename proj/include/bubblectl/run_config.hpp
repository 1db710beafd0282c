/** \file run_config.hpp
 *  Single structured run configuration with full defaults, so a
 *  zero-argument invocation reproduces the reference setup. Unknown keys are
 *  rejected to keep archived configs trustworthy.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bubblectl/ddpg.hpp"
#include "bubblectl/env.hpp"
#include "bubblectl/integrator.hpp"
#include "bubblectl/oracle.hpp"
#include "bubblectl/physics.hpp"

namespace bubblectl {

struct NetworkConfig {
    std::vector<int> hidden = {256, 256};
    std::string activation = "tanh";  ///< hidden-layer activation
};

struct EnvSection {
    double xi_min = 0.05;   ///< x_min / lambda0
    double xi_max = 0.25;   ///< x_max / lambda0
    int step_cycles = 50;
    int max_steps = 12;
    double tol = 0.01;
    double PA_min = 0.0;
    double PA_max = 1.0e5;
    double k_reward = 0.2;
    bool observe_mean_position = false;
};

struct ScanSection {
    double PA0_min = 0.1e5;
    double PA0_max = 0.6e5;
    int PA0_steps = 151;
    double PA1 = 0.1e5;
    std::vector<double> initial_xi = {0.075, 0.1, 0.125, 0.15, 0.175};
    std::int64_t transient_cycles = 8192;
    std::int64_t eval_cycles = 256;
};

struct MapSection {
    double PA0_min = 0.0, PA0_max = 1.0e5;
    double PA1_min = 0.0, PA1_max = 1.0e5;
    int resolution = 256;
    double xi = 0.05;          ///< rest-start position / lambda0
    std::int64_t duration_cycles = 50;
    int direction = +1;
};

struct EvaluateSection {
    int grid = 101;     ///< resolution of the (x0, xT) grid
    int max_steps = 25;
    double xi_min = 0.05, xi_max = 0.25;
};

struct RunConfig {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int workers = 1;
    PhysicalParams physics{};
    double f0 = 25.0e3;
    double f1 = 50.0e3;
    IntegratorConfig integrator{};
    EnvSection env{};
    NetworkConfig network{};
    DdpgConfig ddpg{};
    ScanSection scan{};
    MapSection map{};
    EvaluateSection evaluate{};

    AcousticField make_acoustic_field() const { return make_field(physics, f0, f1); }
    EnvConfig make_env_config() const;
    ScanConfig make_scan_config() const;
    VelocityMapConfig make_map_config() const;
    DdpgConfig make_ddpg_config() const;
};

/// Parses a config document; every key is optional, unknown keys throw
/// std::invalid_argument with the offending path.
RunConfig parse_run_config(const std::string& json_text);

/// Reads and parses a config file.
RunConfig load_run_config(const std::string& path);

/// Serializes the resolved configuration (used to archive configs next to
/// outputs).
std::string dump_run_config(const RunConfig& cfg);

}  // namespace bubblectl
