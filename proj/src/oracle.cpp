#include "bubblectl/oracle.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace bubblectl {

void ScanConfig::validate() const {
    if (PA0_steps < 2) throw std::invalid_argument("ScanConfig: PA0_steps >= 2");
    if (!(PA0_min <= PA0_max) || PA0_min < 0)
        throw std::invalid_argument("ScanConfig: bad PA0 range");
    if (PA1 < 0) throw std::invalid_argument("ScanConfig: PA1 >= 0");
    if (initial_xi.empty()) throw std::invalid_argument("ScanConfig: need initial positions");
    if (transient_cycles < 0 || eval_cycles <= 0)
        throw std::invalid_argument("ScanConfig: bad cycle counts");
    if (workers <= 0) throw std::invalid_argument("ScanConfig: workers >= 1");
    integrator.validate();
}

void VelocityMapConfig::validate() const {
    if (n_PA0 < 2 || n_PA1 < 2)
        throw std::invalid_argument("VelocityMapConfig: resolution >= 2");
    if (!(PA0_min <= PA0_max) || !(PA1_min <= PA1_max) || PA0_min < 0 || PA1_min < 0)
        throw std::invalid_argument("VelocityMapConfig: bad amplitude ranges");
    if (duration_cycles <= 0)
        throw std::invalid_argument("VelocityMapConfig: duration_cycles >= 1");
    if (direction != 1 && direction != -1)
        throw std::invalid_argument("VelocityMapConfig: direction is +1 or -1");
    if (workers <= 0) throw std::invalid_argument("VelocityMapConfig: workers >= 1");
    integrator.validate();
}

namespace detail {

void run_parallel(std::size_t n, int workers, const std::function<void(std::size_t)>& task,
                  const ProgressFn& progress) {
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            task(i);
            const std::size_t d = done.fetch_add(1) + 1;
            if (progress && (d % 16 == 0 || d == n)) progress(d, n);
        }
    };
    if (workers <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

namespace {

double grid_value(double lo, double hi, int steps, int i) {
    if (steps == 1) return lo;
    return lo + (hi - lo) * double(i) / double(steps - 1);
}

}  // namespace

}  // namespace detail

std::vector<ScanRow> bifurcation_scan(const PhysicalParams& params, double f0, double f1,
                                      const ScanConfig& cfg, const std::vector<bool>* skip,
                                      const ProgressFn& progress) {
    cfg.validate();
    params.validate();
    const int n_ic = static_cast<int>(cfg.initial_xi.size());
    const std::size_t n_tasks = std::size_t(cfg.PA0_steps) * n_ic;
    std::vector<ScanRow> rows(n_tasks);

    auto task = [&](std::size_t idx) {
        const int i_pa = static_cast<int>(idx) / n_ic;
        const int i_ic = static_cast<int>(idx) % n_ic;
        ScanRow& row = rows[idx];
        row.i_pa = i_pa;
        row.i_ic = i_ic;
        row.PA0 = detail::grid_value(cfg.PA0_min, cfg.PA0_max, cfg.PA0_steps, i_pa);
        row.PA1 = cfg.PA1;
        row.xi0 = cfg.initial_xi[i_ic];
        if (skip && (*skip)[idx]) {
            row.ok = false;
            row.error = "skipped";
            return;
        }
        const AcousticField field = make_field(params, f0, f1, row.PA0, row.PA1);
        SimState s{params.R0, 0.0, row.xi0 * field.lambda0, 0.0, 0.0};
        try {
            if (cfg.transient_cycles > 0)
                s = integrate(s, field, params, cfg.transient_cycles / f0, cfg.integrator);
            const MeanResult mr =
                integrate_with_mean(s, field, params, cfg.eval_cycles / f0, cfg.integrator);
            row.mean_xi = mr.mean_x / field.lambda0;
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
        }
    };
    detail::run_parallel(n_tasks, cfg.workers, task, progress);
    return rows;
}

VelocityMap velocity_map(const PhysicalParams& params, double f0, double f1,
                         const VelocityMapConfig& cfg, const std::vector<bool>* skip,
                         const ProgressFn& progress) {
    cfg.validate();
    params.validate();
    VelocityMap map;
    map.n_PA0 = cfg.n_PA0;
    map.n_PA1 = cfg.n_PA1;
    map.PA0.resize(cfg.n_PA0);
    map.PA1.resize(cfg.n_PA1);
    for (int i = 0; i < cfg.n_PA0; ++i)
        map.PA0[i] = detail::grid_value(cfg.PA0_min, cfg.PA0_max, cfg.n_PA0, i);
    for (int j = 0; j < cfg.n_PA1; ++j)
        map.PA1[j] = detail::grid_value(cfg.PA1_min, cfg.PA1_max, cfg.n_PA1, j);
    const std::size_t n_tasks = std::size_t(cfg.n_PA0) * cfg.n_PA1;
    map.mean_v.assign(n_tasks, std::numeric_limits<double>::quiet_NaN());

    auto task = [&](std::size_t idx) {
        if (skip && (*skip)[idx]) return;
        const int i = static_cast<int>(idx) / cfg.n_PA1;
        const int j = static_cast<int>(idx) % cfg.n_PA1;
        const AcousticField field = make_field(params, f0, f1, map.PA0[i], map.PA1[j]);
        try {
            const MeanResult mr = integrate_with_mean(
                cfg.initial, field, params, cfg.duration_cycles / f0, cfg.integrator);
            map.mean_v[idx] = mr.mean_xdot;
        } catch (const std::exception&) {
            // failed cell stays NaN and is excluded from the argmax
        }
    };
    detail::run_parallel(n_tasks, cfg.workers, task, progress);

    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.n_PA0; ++i) {
        for (int j = 0; j < cfg.n_PA1; ++j) {
            const double v = map.at(i, j);
            if (std::isnan(v)) continue;
            const double signed_v = cfg.direction * v;
            if (signed_v > best) {
                best = signed_v;
                map.argmax_i = i;
                map.argmax_j = j;
            }
        }
    }
    return map;
}

namespace {

/// Cycles to reach the band around xT at constant PA0 (PA1 = 0), checked on
/// the lattice; negative = never reached within budget.
std::int64_t cycles_to_target(const PhysicalParams& params, double f0, double f1,
                              double PA0, double x0, double xT,
                              const BaselineOptions& opts,
                              std::vector<double>* trajectory_xi) {
    const AcousticField field = make_field(params, f0, f1, PA0, 0.0);
    SimState s{params.R0, 0.0, x0, 0.0, 0.0};
    if (trajectory_xi) trajectory_xi->push_back(s.x / field.lambda0);
    std::int64_t cycles = 0;
    while (cycles <= opts.cycle_budget) {
        if (std::abs(s.x - xT) / field.lambda0 <= opts.tol) return cycles;
        try {
            s = integrate(s, field, params, opts.check_cycles / f0, opts.integrator);
        } catch (const IntegrationError&) {
            return -1;
        }
        cycles += opts.check_cycles;
        if (trajectory_xi) trajectory_xi->push_back(s.x / field.lambda0);
    }
    return -1;
}

}  // namespace

BaselineResult naive_baseline(const PhysicalParams& params, double f0, double f1,
                              double x0, double xT, const BaselineOptions& opts,
                              const ProgressFn& progress) {
    params.validate();
    if (opts.PA0_steps < 2 || !(opts.PA0_lo < opts.PA0_hi))
        throw std::invalid_argument("naive_baseline: bad PA0 scan range");

    BaselineResult res;
    if (std::abs(x0 - xT) / (params.c_L / f0) <= opts.tol) {
        res.reached = true;
        res.cycles = 0;
        res.PA0 = 0.0;
        res.trajectory_xi.push_back(x0 / (params.c_L / f0));
        return res;
    }

    std::vector<std::int64_t> cycles(opts.PA0_steps, -1);
    auto task = [&](std::size_t i) {
        const double PA0 = detail::grid_value(opts.PA0_lo, opts.PA0_hi, opts.PA0_steps,
                                              static_cast<int>(i));
        cycles[i] = cycles_to_target(params, f0, f1, PA0, x0, xT, opts, nullptr);
    };
    detail::run_parallel(opts.PA0_steps, opts.workers, task, progress);

    int best = -1;
    for (int i = 0; i < opts.PA0_steps; ++i)
        if (cycles[i] >= 0) best = i;  // the largest amplitude that arrives
    if (best < 0) return res;          // budget exhausted everywhere

    res.PA0 = detail::grid_value(opts.PA0_lo, opts.PA0_hi, opts.PA0_steps, best);
    res.cycles = cycles_to_target(params, f0, f1, res.PA0, x0, xT, opts,
                                  &res.trajectory_xi);
    res.reached = res.cycles >= 0;
    return res;
}

}  // namespace bubblectl
