#include "bubblectl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "bubblectl/csv.hpp"
#include "bubblectl/neural.hpp"

namespace bubblectl {

namespace fs = std::filesystem;

namespace {

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::trunc) {
    std::ofstream os(p, mode);
    if (!os) throw IoError("cannot open for writing: " + p.string());
    return os;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string arch_tag(const std::vector<int>& hidden, const std::string& act) {
    std::string tag;
    for (std::size_t i = 0; i < hidden.size(); ++i)
        tag += (i ? "x" : "") + std::to_string(hidden[i]);
    return tag + "_" + act;
}

}  // namespace

RolloutResult rollout_policy(const PhysicalParams& params, const AcousticField& field,
                             const EnvConfig& env_cfg, const MlpParams& actor,
                             const MlpSpec& actor_spec, double x0, double xT,
                             int max_steps) {
    EnvConfig cfg = env_cfg;
    cfg.max_steps = max_steps;
    BubbleEnv env(params, field, cfg);
    std::mt19937_64 unused_rng(0);  // noise_sigma = 0: never drawn from

    RolloutResult out;
    Observation obs = env.reset(x0, xT);
    for (int k = 0; k < max_steps; ++k) {
        const auto y = select_action_norm(actor, actor_spec, obs, 0.0, unused_rng);
        const Action a = rescale_action(y, cfg.PA_min, cfg.PA_max);
        if (k == 0) out.first_action = a;
        const StepResult sr = env.step(a);
        out.steps = k + 1;
        obs = sr.obs;
        if (sr.done) {
            out.success = sr.info.success;
            out.aborted = sr.info.aborted;
            break;
        }
    }
    out.trace = env.trace();
    return out;
}

EvalSummary evaluate_policy_grid(const RunConfig& cfg, const MlpParams& actor,
                                 const MlpSpec& actor_spec, int grid, int max_steps,
                                 const ProgressFn& progress) {
    if (grid < 2) throw std::invalid_argument("evaluate: grid must be >= 2");
    const AcousticField field = cfg.make_acoustic_field();
    const EnvConfig env_cfg = cfg.make_env_config();
    const double lam0 = field.lambda0;

    EvalSummary summary;
    summary.cells.resize(std::size_t(grid) * grid);
    auto task = [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / grid;   // x0 index
        const int j = static_cast<int>(idx) % grid;   // xT index
        const double xi0 = cfg.evaluate.xi_min +
                           (cfg.evaluate.xi_max - cfg.evaluate.xi_min) * i / (grid - 1);
        const double xiT = cfg.evaluate.xi_min +
                           (cfg.evaluate.xi_max - cfg.evaluate.xi_min) * j / (grid - 1);
        const RolloutResult r = rollout_policy(cfg.physics, field, env_cfg, actor,
                                               actor_spec, xi0 * lam0, xiT * lam0,
                                               max_steps);
        summary.cells[idx] = {xi0, xiT, r.steps, r.success};
    };
    detail::run_parallel(summary.cells.size(), cfg.workers, task, progress);

    std::size_t ok = 0;
    for (const auto& c : summary.cells) ok += c.success ? 1 : 0;
    summary.success_rate = double(ok) / double(summary.cells.size());
    return summary;
}

void write_trajectory_csv(std::ostream& os, const std::vector<SimRow>& rows) {
    csv::schema_comment(os, "trajectory");
    os << "t_cycles,R_over_R0,x_over_lambda0,xdot_m_per_s\n";
    for (const auto& r : rows)
        os << csv::fmt(r.t_cycles) << ',' << csv::fmt(r.radius_n) << ',' << csv::fmt(r.xi)
           << ',' << csv::fmt(r.xdot) << '\n';
}

void write_episode_csv(std::ostream& os, const std::vector<TraceRow>& rows) {
    csv::schema_comment(os, "episode");
    os << "step,t_cycles,x_over_lambda0,R_over_R0,PA0_pa,PA1_pa,reward,done\n";
    for (const auto& r : rows)
        os << r.step << ',' << csv::fmt(r.t_cycles) << ',' << csv::fmt(r.xi) << ','
           << csv::fmt(r.radius_n) << ',' << csv::fmt(r.PA0) << ',' << csv::fmt(r.PA1)
           << ',' << csv::fmt(r.reward) << ',' << (r.done ? 1 : 0) << '\n';
}

namespace {

void write_scan_row(std::ostream& os, const ScanRow& r) {
    os << r.i_pa << ',' << r.i_ic << ',' << csv::fmt(r.PA0) << ',' << csv::fmt(r.PA1)
       << ',' << csv::fmt(r.xi0) << ',';
    if (r.ok) os << csv::fmt(r.mean_xi);
    os << ',' << (r.ok ? "" : sanitize(r.error)) << '\n';
}

}  // namespace

void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
    csv::schema_comment(os, "bifurcation");
    os << "i_PA0,i_x0,PA0_pa,PA1_pa,x0_over_lambda0,mean_x_over_lambda0,error\n";
    for (const auto& r : rows) write_scan_row(os, r);
}

void write_map_csv(std::ostream& os, const VelocityMap& map) {
    csv::schema_comment(os, "velocity_map");
    if (map.argmax_i >= 0)
        os << "# argmax: i=" << map.argmax_i << " j=" << map.argmax_j
           << " PA0_pa=" << csv::fmt(map.PA0[map.argmax_i])
           << " PA1_pa=" << csv::fmt(map.PA1[map.argmax_j])
           << " mean_xdot=" << csv::fmt(map.at(map.argmax_i, map.argmax_j)) << "\n";
    os << "i_PA0,i_PA1,PA0_pa,PA1_pa,mean_xdot_m_per_s\n";
    for (int i = 0; i < map.n_PA0; ++i)
        for (int j = 0; j < map.n_PA1; ++j) {
            const double v = map.at(i, j);
            os << i << ',' << j << ',' << csv::fmt(map.PA0[i]) << ','
               << csv::fmt(map.PA1[j]) << ',' << (std::isnan(v) ? "" : csv::fmt(v))
               << '\n';
        }
}

void write_training_log_csv(std::ostream& os, const std::vector<EpisodeRow>& rows) {
    csv::schema_comment(os, "training_log");
    os << "global_step,episode,return,length,ema_return,ema_length\n";
    for (const auto& r : rows)
        os << r.global_step << ',' << r.episode << ',' << csv::fmt(r.ret) << ','
           << r.length << ',' << csv::fmt(r.ema_return) << ',' << csv::fmt(r.ema_length)
           << '\n';
}

void write_eval_csv(std::ostream& os, const EvalSummary& summary) {
    csv::schema_comment(os, "evaluation");
    os << "x0_over_lambda0,xT_over_lambda0,steps,success\n";
    for (const auto& c : summary.cells)
        os << csv::fmt(c.xi0) << ',' << csv::fmt(c.xiT) << ',' << c.steps << ','
           << (c.success ? 1 : 0) << '\n';
}

void write_baseline_csv(std::ostream& os, const BaselineResult& res, int check_cycles) {
    csv::schema_comment(os, "baseline");
    os << "# PA0_pa=" << csv::fmt(res.PA0) << " reached=" << (res.reached ? 1 : 0)
       << " cycles=" << res.cycles << "\n";
    os << "t_cycles,x_over_lambda0\n";
    for (std::size_t k = 0; k < res.trajectory_xi.size(); ++k)
        os << (k * std::int64_t(check_cycles)) << ',' << csv::fmt(res.trajectory_xi[k])
           << '\n';
}

void prepare_out_dir(const RunConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir);
    auto os = open_out(fs::path(cfg.out_dir) / "run_config.json");
    os << dump_run_config(cfg);
}

int cmd_simulate(const RunConfig& cfg, const SimulateArgs& args, std::ostream& err) {
    prepare_out_dir(cfg);
    const AcousticField field =
        make_field(cfg.physics, cfg.f0, cfg.f1, args.PA0, args.PA1);
    if (args.cycles <= 0 || args.stride_cycles <= 0)
        throw std::invalid_argument("simulate: cycles and stride must be positive");

    SimState s{cfg.physics.R0, 0.0, args.xi0 * field.lambda0, 0.0, 0.0};
    std::vector<SimRow> rows;
    rows.push_back({0.0, 1.0, args.xi0, 0.0});
    const fs::path out_path = fs::path(cfg.out_dir) / "trajectory.csv";
    bool failed = false;
    std::string failure;
    for (std::int64_t c = 0; c < args.cycles; c += args.stride_cycles) {
        const std::int64_t n = std::min(args.stride_cycles, args.cycles - c);
        try {
            s = integrate(s, field, cfg.physics, n / field.f0, cfg.integrator);
        } catch (const IntegrationError& e) {
            failed = true;
            failure = e.what();
            break;
        }
        rows.push_back({s.t * field.f0, s.R / cfg.physics.R0, s.x / field.lambda0,
                        s.xdot});
    }
    auto os = open_out(out_path);
    write_trajectory_csv(os, rows);
    if (failed) {
        os << "# integration failure: " << sanitize(failure) << "\n";
        err << "simulate: " << failure << "\n";
        return exit_numerical;
    }
    err << "simulate: wrote " << out_path.string() << "\n";
    return exit_ok;
}

namespace {

// partial files share the final row format; rows are appended as cells finish
// and merged back on --resume
std::map<std::pair<int, int>, ScanRow> read_scan_partial(const fs::path& p) {
    std::map<std::pair<int, int>, ScanRow> done;
    std::ifstream is(p);
    if (!is) return done;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("i_PA0", 0) == 0) continue;
        const auto f = split(line, ',');
        if (f.size() != 7 || f[5].empty()) continue;  // failed rows are recomputed
        ScanRow r;
        try {
            r.i_pa = std::stoi(f[0]);
            r.i_ic = std::stoi(f[1]);
            r.PA0 = std::stod(f[2]);
            r.PA1 = std::stod(f[3]);
            r.xi0 = std::stod(f[4]);
            r.mean_xi = std::stod(f[5]);
        } catch (const std::exception&) {
            continue;
        }
        r.ok = true;
        done[{r.i_pa, r.i_ic}] = r;
    }
    return done;
}

}  // namespace

int cmd_bifurcation(const RunConfig& cfg, bool resume, std::ostream& err) {
    prepare_out_dir(cfg);
    ScanConfig scan_cfg = cfg.make_scan_config();
    const fs::path out_path = fs::path(cfg.out_dir) / "bifurcation.csv";
    const fs::path partial_path = fs::path(cfg.out_dir) / "bifurcation.partial.csv";

    const int n_ic = static_cast<int>(scan_cfg.initial_xi.size());
    const std::size_t n_tasks = std::size_t(scan_cfg.PA0_steps) * n_ic;
    std::map<std::pair<int, int>, ScanRow> done;
    if (resume) done = read_scan_partial(partial_path);
    std::vector<bool> skip(n_tasks, false);
    for (const auto& [key, _] : done)
        skip[std::size_t(key.first) * n_ic + key.second] = true;
    err << "bifurcation: " << n_tasks << " points, " << done.size()
        << " restored from partial\n";

    std::mutex io_mutex;
    std::ofstream partial(partial_path, resume ? std::ios::app : std::ios::trunc);
    if (!partial) throw IoError("cannot open " + partial_path.string());

    // the scan's progress callback doubles as the incremental writer
    std::vector<ScanRow> rows;
    {
        auto progress = [&](std::size_t d, std::size_t n) {
            std::lock_guard lock(io_mutex);
            err << "\rbifurcation: " << d << "/" << n << std::flush;
        };
        ScanConfig run_cfg = scan_cfg;
        rows = bifurcation_scan(cfg.physics, cfg.f0, cfg.f1, run_cfg,
                                skip.empty() ? nullptr : &skip, progress);
        err << "\n";
    }
    for (auto& r : rows) {
        if (auto it = done.find({r.i_pa, r.i_ic}); it != done.end()) {
            r = it->second;
        } else {
            std::lock_guard lock(io_mutex);
            write_scan_row(partial, r);
            partial.flush();
        }
    }
    auto os = open_out(out_path);
    write_scan_csv(os, rows);
    os.close();
    partial.close();
    fs::remove(partial_path);
    err << "bifurcation: wrote " << out_path.string() << "\n";
    return exit_ok;
}

namespace {

std::map<std::pair<int, int>, double> read_map_partial(const fs::path& p) {
    std::map<std::pair<int, int>, double> done;
    std::ifstream is(p);
    if (!is) return done;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("i_PA0", 0) == 0) continue;
        const auto f = split(line, ',');
        if (f.size() != 5 || f[4].empty()) continue;
        try {
            done[{std::stoi(f[0]), std::stoi(f[1])}] = std::stod(f[4]);
        } catch (const std::exception&) {
            continue;
        }
    }
    return done;
}

}  // namespace

int cmd_sweep(const RunConfig& cfg, bool resume, std::ostream& err) {
    prepare_out_dir(cfg);
    VelocityMapConfig map_cfg = cfg.make_map_config();
    const fs::path out_path = fs::path(cfg.out_dir) / "velocity_map.csv";
    const fs::path partial_path = fs::path(cfg.out_dir) / "velocity_map.partial.csv";

    const std::size_t n_tasks = std::size_t(map_cfg.n_PA0) * map_cfg.n_PA1;
    std::map<std::pair<int, int>, double> done;
    if (resume) done = read_map_partial(partial_path);
    std::vector<bool> skip(n_tasks, false);
    for (const auto& [key, _] : done)
        skip[std::size_t(key.first) * map_cfg.n_PA1 + key.second] = true;
    err << "sweep: " << n_tasks << " cells, " << done.size() << " restored from partial\n";

    std::ofstream partial(partial_path, resume ? std::ios::app : std::ios::trunc);
    if (!partial) throw IoError("cannot open " + partial_path.string());

    auto progress = [&](std::size_t d, std::size_t n) {
        err << "\rsweep: " << d << "/" << n << std::flush;
    };
    VelocityMap map = velocity_map(cfg.physics, cfg.f0, cfg.f1, map_cfg,
                                   skip.empty() ? nullptr : &skip, progress);
    err << "\n";
    for (const auto& [key, v] : done) map.mean_v[std::size_t(key.first) * map.n_PA1 + key.second] = v;

    // recompute the argmax over the merged grid
    map.argmax_i = map.argmax_j = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < map.n_PA0; ++i)
        for (int j = 0; j < map.n_PA1; ++j) {
            const double v = map.at(i, j);
            if (!std::isnan(v) && map_cfg.direction * v > best) {
                best = map_cfg.direction * v;
                map.argmax_i = i;
                map.argmax_j = j;
            }
        }

    // append the newly computed cells to the partial before finalizing
    for (int i = 0; i < map.n_PA0; ++i)
        for (int j = 0; j < map.n_PA1; ++j) {
            const std::size_t idx = std::size_t(i) * map.n_PA1 + j;
            if (skip[idx] || std::isnan(map.mean_v[idx])) continue;
            partial << i << ',' << j << ',' << csv::fmt(map.PA0[i]) << ','
                    << csv::fmt(map.PA1[j]) << ',' << csv::fmt(map.mean_v[idx]) << '\n';
        }
    partial.close();

    auto os = open_out(out_path);
    write_map_csv(os, map);
    os.close();
    fs::remove(partial_path);
    err << "sweep: wrote " << out_path.string() << "\n";
    return exit_ok;
}

int cmd_train(const RunConfig& cfg, const TrainArgs& args, std::ostream& err) {
    prepare_out_dir(cfg);
    std::vector<std::vector<int>> archs = args.arch_grid;
    if (archs.empty()) archs.push_back(cfg.network.hidden);
    const std::string act_name =
        args.activation.empty() ? cfg.network.activation : args.activation;
    const Activation act = activation_from_string(act_name);

    const AcousticField field = cfg.make_acoustic_field();
    const EnvConfig env_cfg = cfg.make_env_config();
    const DdpgConfig ddpg_cfg = cfg.make_ddpg_config();
    err << "train: discounted-return ceiling 1/(1-gamma) = "
        << 1.0 / (1.0 - ddpg_cfg.gamma) << "\n";

    for (const auto& hidden : archs) {
        const std::string tag = arch_tag(hidden, act_name);
        const fs::path log_path = fs::path(cfg.out_dir) / ("train_" + tag + ".csv");
        const fs::path ckpt_path = fs::path(cfg.out_dir) / ("actor_" + tag + ".ckpt");
        err << "train: arch " << tag << " for " << ddpg_cfg.total_steps << " steps\n";

        MlpSpec actor_spec;  // filled by the checkpoint callback below
        TrainCallbacks cb;
        std::int64_t last_logged = 0;
        cb.on_episode = [&](const EpisodeRow& row) {
            if (row.global_step - last_logged >= 2000) {
                last_logged = row.global_step;
                err << "\rtrain[" << tag << "] step " << row.global_step << " ep "
                    << row.episode << " ema_return " << row.ema_return << " ema_len "
                    << row.ema_length << "   " << std::flush;
            }
        };
        cb.on_checkpoint = [&](std::int64_t step, const DdpgAgent& agent) {
            save_checkpoint(ckpt_path.string(), agent.actor_spec, agent.actor, cfg.seed,
                            static_cast<std::uint64_t>(step));
        };
        const TrainResult result =
            train(cfg.physics, field, env_cfg, ddpg_cfg, hidden, act, cb);
        err << "\n";
        auto os = open_out(log_path);
        write_training_log_csv(os, result.log);
        if (result.aborted_episodes > 0)
            err << "train: " << result.aborted_episodes << " aborted episodes\n";
        err << "train: wrote " << log_path.string() << " and " << ckpt_path.string()
            << "\n";
    }
    return exit_ok;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& checkpoint_path, int grid,
                 int max_steps, std::ostream& out, std::ostream& err) {
    prepare_out_dir(cfg);
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    auto progress = [&](std::size_t d, std::size_t n) {
        err << "\revaluate: " << d << "/" << n << std::flush;
    };
    const EvalSummary summary =
        evaluate_policy_grid(cfg, ck.params, ck.spec, grid, max_steps, progress);
    err << "\n";
    const fs::path out_path = fs::path(cfg.out_dir) / "evaluation.csv";
    auto os = open_out(out_path);
    write_eval_csv(os, summary);
    out << "success_rate_percent: " << csv::fmt(100.0 * summary.success_rate) << "\n";
    err << "evaluate: wrote " << out_path.string() << "\n";
    return exit_ok;
}

int cmd_infer(const std::string& checkpoint_path, const std::vector<double>& obs,
              double PA_min, double PA_max, std::ostream& out, std::ostream& err) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    if (obs.size() != static_cast<std::size_t>(ck.spec.input_size()))
        throw std::invalid_argument("infer: observation size mismatch (need " +
                                    std::to_string(ck.spec.input_size()) + " values)");
    Eigen::VectorXd in(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) in(int(i)) = obs[i];

    const auto t0 = std::chrono::steady_clock::now();
    const Eigen::VectorXd y = forward(ck.params, ck.spec, in);
    const auto t1 = std::chrono::steady_clock::now();
    const Action a = rescale_action({y(0), y(1)}, PA_min, PA_max);
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out << "action_pa: " << csv::fmt(a.PA0) << ' ' << csv::fmt(a.PA1) << "\n";
    out << "latency_ms: " << csv::fmt(ms) << "\n";
    err << "infer: checkpoint step count " << ck.step_count << "\n";
    return exit_ok;
}

}  // namespace bubblectl
