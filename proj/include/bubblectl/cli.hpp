/** \file cli.hpp
 *  Command implementations behind the command-line front end, kept as library
 *  functions so they can be tested and reused directly. All file outputs are
 *  plain CSV with a schema comment; the resolved configuration is archived
 *  next to the outputs of every command that writes files.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bubblectl/ddpg.hpp"
#include "bubblectl/oracle.hpp"
#include "bubblectl/run_config.hpp"

namespace bubblectl {

// process exit codes
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_numerical = 2;
inline constexpr int exit_io = 3;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Deterministic rollout of a policy on one episode.
struct RolloutResult {
    int steps = 0;
    bool success = false;
    bool aborted = false;
    std::vector<TraceRow> trace;
    Action first_action{};
};

RolloutResult rollout_policy(const PhysicalParams& params, const AcousticField& field,
                             const EnvConfig& env_cfg, const MlpParams& actor,
                             const MlpSpec& actor_spec, double x0, double xT,
                             int max_steps);

struct EvalCell {
    double xi0 = 0, xiT = 0;
    int steps = 0;
    bool success = false;
};

struct EvalSummary {
    std::vector<EvalCell> cells;
    double success_rate = 0;
};

/// Deterministic policy over the (x0, xT) grid; parallel over cells.
EvalSummary evaluate_policy_grid(const RunConfig& cfg, const MlpParams& actor,
                                 const MlpSpec& actor_spec, int grid, int max_steps,
                                 const ProgressFn& progress = {});

/// One sampled point of a plain simulation run.
struct SimRow {
    double t_cycles = 0;
    double radius_n = 0;  ///< R / R0
    double xi = 0;        ///< x / lambda0
    double xdot = 0;      ///< [m/s]
};

struct SimulateArgs {
    double xi0 = 0.15;       ///< initial x / lambda0
    double PA0 = 0;          ///< [Pa]
    double PA1 = 0;          ///< [Pa]
    std::int64_t cycles = 50;
    std::int64_t stride_cycles = 1;  ///< sampling stride
};

int cmd_simulate(const RunConfig& cfg, const SimulateArgs& args, std::ostream& err);
int cmd_bifurcation(const RunConfig& cfg, bool resume, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, bool resume, std::ostream& err);

struct TrainArgs {
    std::vector<std::vector<int>> arch_grid;  ///< architectures to train
    std::string activation;                   ///< hidden activation
};

int cmd_train(const RunConfig& cfg, const TrainArgs& args, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path, int grid,
                 int max_steps, std::ostream& out, std::ostream& err);
int cmd_infer(const std::string& checkpoint_path, const std::vector<double>& obs,
              double PA_min, double PA_max, std::ostream& out, std::ostream& err);

// CSV writers shared with the acceptance harness
void write_trajectory_csv(std::ostream& os, const std::vector<SimRow>& rows);
void write_episode_csv(std::ostream& os, const std::vector<TraceRow>& rows);
void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows);
void write_map_csv(std::ostream& os, const VelocityMap& map);
void write_training_log_csv(std::ostream& os, const std::vector<EpisodeRow>& rows);
void write_eval_csv(std::ostream& os, const EvalSummary& summary);
void write_baseline_csv(std::ostream& os, const BaselineResult& res, int check_cycles);

/// Creates the directory (and parents) if needed and archives the resolved
/// config as <out_dir>/run_config.json.
void prepare_out_dir(const RunConfig& cfg);

}  // namespace bubblectl
