#include "bubblectl/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bubblectl {

namespace {

using nlohmann::json;

void expect_keys(const json& j, const std::string& path,
                 std::initializer_list<const char*> known) {
    if (!j.is_object())
        throw std::invalid_argument("config: " + path + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            if (key == k) {
                ok = true;
                break;
            }
        if (!ok)
            throw std::invalid_argument("config: unknown key '" + path + key + "'");
    }
}

template <class T>
void get_if(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

EnvConfig RunConfig::make_env_config() const {
    const AcousticField field = make_acoustic_field();
    EnvConfig c;
    c.x_min = env.xi_min * field.lambda0;
    c.x_max = env.xi_max * field.lambda0;
    c.step_cycles = env.step_cycles;
    c.max_steps = env.max_steps;
    c.tol = env.tol;
    c.PA_min = env.PA_min;
    c.PA_max = env.PA_max;
    c.k_reward = env.k_reward;
    c.observe_mean_position = env.observe_mean_position;
    c.seed = seed;
    c.integrator = integrator;
    return c;
}

ScanConfig RunConfig::make_scan_config() const {
    ScanConfig c;
    c.PA0_min = scan.PA0_min;
    c.PA0_max = scan.PA0_max;
    c.PA0_steps = scan.PA0_steps;
    c.PA1 = scan.PA1;
    c.initial_xi = scan.initial_xi;
    c.transient_cycles = scan.transient_cycles;
    c.eval_cycles = scan.eval_cycles;
    c.workers = workers;
    c.integrator = integrator;
    return c;
}

VelocityMapConfig RunConfig::make_map_config() const {
    const AcousticField field = make_acoustic_field();
    VelocityMapConfig c;
    c.PA0_min = map.PA0_min;
    c.PA0_max = map.PA0_max;
    c.PA1_min = map.PA1_min;
    c.PA1_max = map.PA1_max;
    c.n_PA0 = map.resolution;
    c.n_PA1 = map.resolution;
    c.initial = SimState{physics.R0, 0.0, map.xi * field.lambda0, 0.0, 0.0};
    c.duration_cycles = map.duration_cycles;
    c.direction = map.direction;
    c.workers = workers;
    c.integrator = integrator;
    return c;
}

DdpgConfig RunConfig::make_ddpg_config() const {
    DdpgConfig c = ddpg;
    c.seed = seed;
    return c;
}

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: JSON parse error: ") + e.what());
    }

    RunConfig cfg;
    expect_keys(j, "", {"seed", "out_dir", "workers", "physics", "field", "integrator",
                        "env", "network", "ddpg", "scan", "map", "evaluate"});
    get_if(j, "seed", cfg.seed);
    get_if(j, "out_dir", cfg.out_dir);
    get_if(j, "workers", cfg.workers);

    if (auto it = j.find("physics"); it != j.end()) {
        expect_keys(*it, "physics.",
                    {"rho_L", "c_L", "sigma", "mu_L", "n_poly", "R0", "P0", "P_inf"});
        get_if(*it, "rho_L", cfg.physics.rho_L);
        get_if(*it, "c_L", cfg.physics.c_L);
        get_if(*it, "sigma", cfg.physics.sigma);
        get_if(*it, "mu_L", cfg.physics.mu_L);
        get_if(*it, "n_poly", cfg.physics.n_poly);
        get_if(*it, "R0", cfg.physics.R0);
        get_if(*it, "P0", cfg.physics.P0);
        bool p_inf_given = it->contains("P_inf");
        get_if(*it, "P_inf", cfg.physics.P_inf);
        if (!p_inf_given) cfg.physics.P_inf = cfg.physics.P0;
    }
    if (auto it = j.find("field"); it != j.end()) {
        expect_keys(*it, "field.", {"f0", "f1"});
        get_if(*it, "f0", cfg.f0);
        get_if(*it, "f1", cfg.f1);
    }
    if (auto it = j.find("integrator"); it != j.end()) {
        expect_keys(*it, "integrator.",
                    {"abs_tol", "rel_tol", "h_init", "h_min", "h_max", "max_steps",
                     "safety"});
        get_if(*it, "abs_tol", cfg.integrator.abs_tol);
        get_if(*it, "rel_tol", cfg.integrator.rel_tol);
        get_if(*it, "h_init", cfg.integrator.h_init);
        get_if(*it, "h_min", cfg.integrator.h_min);
        get_if(*it, "h_max", cfg.integrator.h_max);
        get_if(*it, "max_steps", cfg.integrator.max_steps);
        get_if(*it, "safety", cfg.integrator.safety);
    }
    if (auto it = j.find("env"); it != j.end()) {
        expect_keys(*it, "env.",
                    {"xi_min", "xi_max", "step_cycles", "max_steps", "tol", "PA_min",
                     "PA_max", "k_reward", "observe_mean_position"});
        get_if(*it, "xi_min", cfg.env.xi_min);
        get_if(*it, "xi_max", cfg.env.xi_max);
        get_if(*it, "step_cycles", cfg.env.step_cycles);
        get_if(*it, "max_steps", cfg.env.max_steps);
        get_if(*it, "tol", cfg.env.tol);
        get_if(*it, "PA_min", cfg.env.PA_min);
        get_if(*it, "PA_max", cfg.env.PA_max);
        get_if(*it, "k_reward", cfg.env.k_reward);
        get_if(*it, "observe_mean_position", cfg.env.observe_mean_position);
    }
    if (auto it = j.find("network"); it != j.end()) {
        expect_keys(*it, "network.", {"hidden", "activation"});
        get_if(*it, "hidden", cfg.network.hidden);
        get_if(*it, "activation", cfg.network.activation);
        activation_from_string(cfg.network.activation);  // validates
    }
    if (auto it = j.find("ddpg"); it != j.end()) {
        expect_keys(*it, "ddpg.",
                    {"gamma", "batch_size", "buffer_capacity", "tau_soft", "noise_sigma",
                     "lr", "warmup_steps", "total_steps", "update_ratio",
                     "checkpoint_interval", "ema_alpha"});
        get_if(*it, "gamma", cfg.ddpg.gamma);
        get_if(*it, "batch_size", cfg.ddpg.batch_size);
        get_if(*it, "buffer_capacity", cfg.ddpg.buffer_capacity);
        get_if(*it, "tau_soft", cfg.ddpg.tau_soft);
        get_if(*it, "noise_sigma", cfg.ddpg.noise_sigma);
        get_if(*it, "lr", cfg.ddpg.lr);
        get_if(*it, "warmup_steps", cfg.ddpg.warmup_steps);
        get_if(*it, "total_steps", cfg.ddpg.total_steps);
        get_if(*it, "update_ratio", cfg.ddpg.update_ratio);
        get_if(*it, "checkpoint_interval", cfg.ddpg.checkpoint_interval);
        get_if(*it, "ema_alpha", cfg.ddpg.ema_alpha);
    }
    if (auto it = j.find("scan"); it != j.end()) {
        expect_keys(*it, "scan.",
                    {"PA0_min", "PA0_max", "PA0_steps", "PA1", "initial_xi",
                     "transient_cycles", "eval_cycles"});
        get_if(*it, "PA0_min", cfg.scan.PA0_min);
        get_if(*it, "PA0_max", cfg.scan.PA0_max);
        get_if(*it, "PA0_steps", cfg.scan.PA0_steps);
        get_if(*it, "PA1", cfg.scan.PA1);
        get_if(*it, "initial_xi", cfg.scan.initial_xi);
        get_if(*it, "transient_cycles", cfg.scan.transient_cycles);
        get_if(*it, "eval_cycles", cfg.scan.eval_cycles);
    }
    if (auto it = j.find("map"); it != j.end()) {
        expect_keys(*it, "map.",
                    {"PA0_min", "PA0_max", "PA1_min", "PA1_max", "resolution", "xi",
                     "duration_cycles", "direction"});
        get_if(*it, "PA0_min", cfg.map.PA0_min);
        get_if(*it, "PA0_max", cfg.map.PA0_max);
        get_if(*it, "PA1_min", cfg.map.PA1_min);
        get_if(*it, "PA1_max", cfg.map.PA1_max);
        get_if(*it, "resolution", cfg.map.resolution);
        get_if(*it, "xi", cfg.map.xi);
        get_if(*it, "duration_cycles", cfg.map.duration_cycles);
        get_if(*it, "direction", cfg.map.direction);
    }
    if (auto it = j.find("evaluate"); it != j.end()) {
        expect_keys(*it, "evaluate.", {"grid", "max_steps", "xi_min", "xi_max"});
        get_if(*it, "grid", cfg.evaluate.grid);
        get_if(*it, "max_steps", cfg.evaluate.max_steps);
        get_if(*it, "xi_min", cfg.evaluate.xi_min);
        get_if(*it, "xi_max", cfg.evaluate.xi_max);
    }

    cfg.physics.validate();
    cfg.integrator.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["workers"] = cfg.workers;
    j["physics"] = {{"rho_L", cfg.physics.rho_L}, {"c_L", cfg.physics.c_L},
                    {"sigma", cfg.physics.sigma}, {"mu_L", cfg.physics.mu_L},
                    {"n_poly", cfg.physics.n_poly}, {"R0", cfg.physics.R0},
                    {"P0", cfg.physics.P0},       {"P_inf", cfg.physics.P_inf}};
    j["field"] = {{"f0", cfg.f0}, {"f1", cfg.f1}};
    j["integrator"] = {{"abs_tol", cfg.integrator.abs_tol},
                       {"rel_tol", cfg.integrator.rel_tol},
                       {"h_init", cfg.integrator.h_init},
                       {"h_min", cfg.integrator.h_min},
                       {"h_max", cfg.integrator.h_max},
                       {"max_steps", cfg.integrator.max_steps},
                       {"safety", cfg.integrator.safety}};
    j["env"] = {{"xi_min", cfg.env.xi_min},
                {"xi_max", cfg.env.xi_max},
                {"step_cycles", cfg.env.step_cycles},
                {"max_steps", cfg.env.max_steps},
                {"tol", cfg.env.tol},
                {"PA_min", cfg.env.PA_min},
                {"PA_max", cfg.env.PA_max},
                {"k_reward", cfg.env.k_reward},
                {"observe_mean_position", cfg.env.observe_mean_position}};
    j["network"] = {{"hidden", cfg.network.hidden}, {"activation", cfg.network.activation}};
    j["ddpg"] = {{"gamma", cfg.ddpg.gamma},
                 {"batch_size", cfg.ddpg.batch_size},
                 {"buffer_capacity", cfg.ddpg.buffer_capacity},
                 {"tau_soft", cfg.ddpg.tau_soft},
                 {"noise_sigma", cfg.ddpg.noise_sigma},
                 {"lr", cfg.ddpg.lr},
                 {"warmup_steps", cfg.ddpg.warmup_steps},
                 {"total_steps", cfg.ddpg.total_steps},
                 {"update_ratio", cfg.ddpg.update_ratio},
                 {"checkpoint_interval", cfg.ddpg.checkpoint_interval},
                 {"ema_alpha", cfg.ddpg.ema_alpha}};
    j["scan"] = {{"PA0_min", cfg.scan.PA0_min},
                 {"PA0_max", cfg.scan.PA0_max},
                 {"PA0_steps", cfg.scan.PA0_steps},
                 {"PA1", cfg.scan.PA1},
                 {"initial_xi", cfg.scan.initial_xi},
                 {"transient_cycles", cfg.scan.transient_cycles},
                 {"eval_cycles", cfg.scan.eval_cycles}};
    j["map"] = {{"PA0_min", cfg.map.PA0_min},
                {"PA0_max", cfg.map.PA0_max},
                {"PA1_min", cfg.map.PA1_min},
                {"PA1_max", cfg.map.PA1_max},
                {"resolution", cfg.map.resolution},
                {"xi", cfg.map.xi},
                {"duration_cycles", cfg.map.duration_cycles},
                {"direction", cfg.map.direction}};
    j["evaluate"] = {{"grid", cfg.evaluate.grid},
                     {"max_steps", cfg.evaluate.max_steps},
                     {"xi_min", cfg.evaluate.xi_min},
                     {"xi_max", cfg.evaluate.xi_max}};
    return j.dump(2) + "\n";
}

}  // namespace bubblectl
