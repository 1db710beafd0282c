/** \file oracle.hpp
 *  Brute-force ground truth: 1-D bifurcation scans of the long-run mean
 *  position, 2-D amplitude maps of the 50-cycle mean velocity, and the
 *  constant-amplitude baseline trajectory. All sweeps are embarrassingly
 *  parallel; every task owns its integrator and writes one pre-assigned
 *  output slot, so results are identical for any worker count.
 */
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bubblectl/integrator.hpp"
#include "bubblectl/physics.hpp"

namespace bubblectl {

/// Called with (completed tasks, total tasks) from the work loop.
using ProgressFn = std::function<void(std::size_t, std::size_t)>;

struct ScanConfig {
    double PA0_min = 0.1e5;   ///< [Pa]
    double PA0_max = 0.6e5;   ///< [Pa]
    int PA0_steps = 151;
    double PA1 = 0.1e5;       ///< fixed second amplitude [Pa]
    std::vector<double> initial_xi = {0.075, 0.1, 0.125, 0.15, 0.175};  ///< x0 / lambda0
    std::int64_t transient_cycles = 8192;
    std::int64_t eval_cycles = 256;
    int workers = 1;
    IntegratorConfig integrator{};

    void validate() const;
};

struct ScanRow {
    int i_pa = 0;          ///< PA0 grid index
    int i_ic = 0;          ///< initial-condition index
    double PA0 = 0;        ///< [Pa]
    double PA1 = 0;        ///< [Pa]
    double xi0 = 0;        ///< initial x / lambda0
    double mean_xi = 0;    ///< time-averaged x / lambda0 over the eval window
    bool ok = false;
    std::string error;
};

/// Transient-then-evaluate scan over the PA0 grid times the initial
/// positions. Failed points are reported as rows with ok = false; the scan
/// continues. `skip` marks task indices (i_pa * n_ic + i_ic) already done
/// elsewhere; corresponding rows come back with ok = false, error = "skipped".
std::vector<ScanRow> bifurcation_scan(const PhysicalParams& params, double f0, double f1,
                                      const ScanConfig& cfg,
                                      const std::vector<bool>* skip = nullptr,
                                      const ProgressFn& progress = {});

struct VelocityMapConfig {
    double PA0_min = 0.0, PA0_max = 1.0e5;  ///< [Pa]
    double PA1_min = 0.0, PA1_max = 1.0e5;  ///< [Pa]
    int n_PA0 = 256, n_PA1 = 256;
    SimState initial{};            ///< state each cell starts from
    std::int64_t duration_cycles = 50;
    int direction = +1;            ///< sign of "toward the target"
    int workers = 1;
    IntegratorConfig integrator{};

    void validate() const;
};

struct VelocityMap {
    int n_PA0 = 0, n_PA1 = 0;
    std::vector<double> PA0;     ///< grid values [Pa]
    std::vector<double> PA1;     ///< grid values [Pa]
    std::vector<double> mean_v;  ///< row-major [i_PA0 * n_PA1 + i_PA1], NaN = failed
    int argmax_i = -1, argmax_j = -1;  ///< cell maximizing direction * mean_v

    double at(int i, int j) const { return mean_v[std::size_t(i) * n_PA1 + j]; }
};

/// One integrate_with_mean per grid cell from the identical initial state.
VelocityMap velocity_map(const PhysicalParams& params, double f0, double f1,
                         const VelocityMapConfig& cfg,
                         const std::vector<bool>* skip = nullptr,
                         const ProgressFn& progress = {});

struct BaselineOptions {
    double PA0_lo = 0.1e5, PA0_hi = 1.0e5;  ///< scan range [Pa]
    int PA0_steps = 46;
    std::int64_t cycle_budget = 6000;
    int check_cycles = 50;   ///< arrival checked on this cycle lattice
    double tol = 0.01;       ///< success band on |x - xT| / lambda0
    int workers = 1;
    IntegratorConfig integrator{};
};

struct BaselineResult {
    bool reached = false;
    std::int64_t cycles = 0;   ///< cycles needed (multiples of check_cycles)
    double PA0 = 0;            ///< amplitude selected by the scan [Pa]
    std::vector<double> trajectory_xi;  ///< x / lambda0 at each checked lattice point
};

/// Single-frequency push (PA1 = 0): a 1-D scan over PA0 finds the largest
/// amplitude whose trajectory from rest at x0 reaches the tolerance band
/// around xT inside the budget (larger amplitudes fall into the intermediate
/// equilibrium and never arrive); returns that trajectory and its cycle count.
BaselineResult naive_baseline(const PhysicalParams& params, double f0, double f1,
                              double x0, double xT, const BaselineOptions& opts,
                              const ProgressFn& progress = {});

namespace detail {

/// Runs tasks 0..n-1 on `workers` threads; each task must write only its own
/// output slot. Exceptions inside tasks must be handled by the task itself.
void run_parallel(std::size_t n, int workers, const std::function<void(std::size_t)>& task,
                  const ProgressFn& progress);

}  // namespace detail

}  // namespace bubblectl
