/** Command-line front end: simulate, bifurcation, sweep, train, evaluate,
 *  infer. Exit codes: 0 success, 1 usage, 2 numerical failure, 3 IO.
 */
#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bubblectl/cli.hpp"

namespace {

using namespace bubblectl;

std::vector<int> parse_arch(const std::string& s) {
    std::vector<int> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stoi(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (out.empty()) throw CLI::ValidationError("--arch", "expected e.g. 128,128");
    return out;
}

std::vector<double> parse_obs(const std::string& s) {
    std::vector<double> out;
    std::string cur;
    for (char c : s + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bubblectl: single-bubble position control in a dual-frequency "
                 "standing wave (simulation, brute-force sweeps, DDPG training)"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
    app.add_option("--config", config_path, "run configuration file (JSON)");
    app.add_option("--seed", seed, "override the configured seed");
    app.add_option("--workers", workers, "override the configured worker count");
    app.add_option("--out", out_dir, "override the configured output directory");

    auto* sim = app.add_subcommand("simulate", "integrate one trajectory to CSV");
    SimulateArgs sim_args;
    sim->add_option("--x0", sim_args.xi0, "initial position x/lambda0")->capture_default_str();
    sim->add_option("--PA0", sim_args.PA0, "amplitude of the f0 component [Pa]");
    sim->add_option("--PA1", sim_args.PA1, "amplitude of the f1 component [Pa]");
    sim->add_option("--cycles", sim_args.cycles, "acoustic cycles to integrate")
        ->capture_default_str();
    sim->add_option("--stride", sim_args.stride_cycles, "sampling stride [cycles]")
        ->capture_default_str();

    bool resume = false;
    auto* bif = app.add_subcommand("bifurcation", "mean-position scan over PA0");
    bif->add_flag("--resume", resume, "reuse cells from an interrupted run");
    auto* sweep = app.add_subcommand("sweep", "mean-velocity map over (PA0, PA1)");
    sweep->add_flag("--resume", resume, "reuse cells from an interrupted run");
    std::optional<double> sweep_xi;
    sweep->add_option("--xi", sweep_xi, "map position x/lambda0");

    auto* train = app.add_subcommand("train", "DDPG training");
    std::vector<std::string> arch_opts;
    std::string act_opt;
    std::optional<std::int64_t> total_steps_opt;
    train->add_option("--arch", arch_opts,
                      "hidden widths, e.g. 128,128 (repeat for a model-size grid)");
    train->add_option("--act", act_opt, "hidden activation: tanh or relu");
    train->add_option("--total-steps", total_steps_opt, "training budget override");

    auto* eval = app.add_subcommand("evaluate", "roll out a checkpoint on an (x0, xT) grid");
    std::string ckpt_path;
    std::optional<int> grid_opt, eval_steps_opt;
    eval->add_option("--checkpoint", ckpt_path, "actor checkpoint")->required();
    eval->add_option("--grid", grid_opt, "grid resolution per axis");
    eval->add_option("--max-steps", eval_steps_opt, "episode cap during evaluation");

    auto* infer = app.add_subcommand("infer", "print the action for one observation");
    std::string infer_ckpt, obs_str = "0.6,0.6,0.6";
    infer->add_option("--checkpoint", infer_ckpt, "actor checkpoint")->required();
    infer->add_option("--obs", obs_str, "comma-separated observation")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? exit_ok : exit_usage;
    }

    try {
        RunConfig cfg =
            config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        if (out_dir) cfg.out_dir = *out_dir;
        if (sweep_xi) cfg.map.xi = *sweep_xi;
        if (total_steps_opt) cfg.ddpg.total_steps = *total_steps_opt;

        if (sim->parsed()) return cmd_simulate(cfg, sim_args, std::cerr);
        if (bif->parsed()) return cmd_bifurcation(cfg, resume, std::cerr);
        if (sweep->parsed()) return cmd_sweep(cfg, resume, std::cerr);
        if (train->parsed()) {
            TrainArgs args;
            for (const auto& a : arch_opts) args.arch_grid.push_back(parse_arch(a));
            args.activation = act_opt;
            return cmd_train(cfg, args, std::cerr);
        }
        if (eval->parsed())
            return cmd_evaluate(cfg, ckpt_path,
                                grid_opt.value_or(cfg.evaluate.grid),
                                eval_steps_opt.value_or(cfg.evaluate.max_steps),
                                std::cout, std::cerr);
        if (infer->parsed())
            return cmd_infer(infer_ckpt, parse_obs(obs_str), cfg.env.PA_min,
                             cfg.env.PA_max, std::cout, std::cerr);
        return exit_usage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const InvalidStateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numerical;
    }
}
