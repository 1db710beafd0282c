/** \file integrator.hpp
 *  Adaptive embedded Runge--Kutta (Cash--Karp 4(5)) integration.
 *
 *  The generic core advances any fixed-dimension first-order system; the
 *  bubble-specific wrappers integrate the scaled variables
 *  (R/R0, R'/R0, x/lambda0, x'/lambda0) against dimensionless time tau = t f0
 *  so that the mixed absolute/relative tolerance acts on commensurate
 *  magnitudes.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "bubblectl/physics.hpp"

namespace bubblectl {

struct IntegratorConfig {
    double abs_tol = 1.0e-10;
    double rel_tol = 1.0e-10;
    double h_init = 1.0e-8;          ///< initial step [s]
    double h_min = 1.0e-18;          ///< step floor [s]
    double h_max = 1.0e-5;           ///< step cap [s]
    std::int64_t max_steps = 20'000'000;  ///< accepted+rejected budget per call
    double safety = 0.9;

    void validate() const {
        if (!(h_min > 0 && h_min <= h_init && h_init <= h_max))
            throw std::invalid_argument("IntegratorConfig: need 0 < h_min <= h_init <= h_max");
        if (!(abs_tol > 0 && rel_tol > 0))
            throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
        if (!(safety > 0 && safety < 1))
            throw std::invalid_argument("IntegratorConfig: safety must lie in (0,1)");
        if (max_steps <= 0)
            throw std::invalid_argument("IntegratorConfig: max_steps must be positive");
    }
};

enum class IntegrateStatus { ok, step_underflow, budget_exhausted, invalid_state };

inline const char* to_string(IntegrateStatus s) {
    switch (s) {
        case IntegrateStatus::ok: return "ok";
        case IntegrateStatus::step_underflow: return "step size underflow";
        case IntegrateStatus::budget_exhausted: return "step budget exhausted";
        case IntegrateStatus::invalid_state: return "invalid state encountered";
    }
    return "unknown";
}

template <std::size_t N>
struct OdeResult {
    IntegrateStatus status = IntegrateStatus::ok;
    std::array<double, N> y{};  ///< last valid state
    double t = 0;               ///< time of the last valid state
    std::int64_t accepted = 0;
    std::int64_t rejected = 0;
};

namespace detail {

// Cash--Karp tableau. The step is advanced with the 5th-order weights; the
// 4th-order embedded solution provides the error estimate.
inline constexpr double ck_a21 = 1.0 / 5.0;
inline constexpr double ck_a31 = 3.0 / 40.0, ck_a32 = 9.0 / 40.0;
inline constexpr double ck_a41 = 3.0 / 10.0, ck_a42 = -9.0 / 10.0, ck_a43 = 6.0 / 5.0;
inline constexpr double ck_a51 = -11.0 / 54.0, ck_a52 = 5.0 / 2.0,
                        ck_a53 = -70.0 / 27.0, ck_a54 = 35.0 / 27.0;
inline constexpr double ck_a61 = 1631.0 / 55296.0, ck_a62 = 175.0 / 512.0,
                        ck_a63 = 575.0 / 13824.0, ck_a64 = 44275.0 / 110592.0,
                        ck_a65 = 253.0 / 4096.0;
inline constexpr double ck_b1 = 37.0 / 378.0, ck_b3 = 250.0 / 621.0,
                        ck_b4 = 125.0 / 594.0, ck_b6 = 512.0 / 1771.0;
inline constexpr double ck_e1 = ck_b1 - 2825.0 / 27648.0;
inline constexpr double ck_e3 = ck_b3 - 18575.0 / 48384.0;
inline constexpr double ck_e4 = ck_b4 - 13525.0 / 55296.0;
inline constexpr double ck_e5 = -277.0 / 14336.0;
inline constexpr double ck_e6 = ck_b6 - 1.0 / 4.0;

struct NullObserver {
    template <std::size_t N>
    void operator()(double, const std::array<double, N>&, const std::array<double, N>&) {}
};

}  // namespace detail

/** Integrates dy/dt = rhs(t, y) from t0 to t1 > t0.
 *
 *  rhs has signature bool(double t, const array& y, array& dydt) and returns
 *  false when the probed state is invalid; the step is then rejected and
 *  retried smaller, so transient stage overshoots (e.g. into R <= 0 during a
 *  collapse) do not abort the run unless the step floor is reached.
 *
 *  The observer is called as observer(t, y, dydt) at t0 and after every
 *  accepted step. Rejected steps never reach it and never mutate y.
 */
template <std::size_t N, class Rhs, class Observer = detail::NullObserver>
OdeResult<N> integrate_ode(Rhs&& rhs, std::array<double, N> y, double t0, double t1,
                           const IntegratorConfig& cfg, Observer&& observer = {}) {
    cfg.validate();
    if (!(t1 > t0)) throw std::invalid_argument("integrate_ode: need t1 > t0");

    OdeResult<N> res;
    res.y = y;
    res.t = t0;

    std::array<double, N> f0{};
    if (!rhs(t0, y, f0)) {
        res.status = IntegrateStatus::invalid_state;
        return res;
    }
    observer(t0, y, f0);

    const double span = t1 - t0;
    double t = t0;
    double h = std::clamp(cfg.h_init, cfg.h_min, std::min(cfg.h_max, span));
    std::array<double, N> k1 = f0, k2{}, k3{}, k4{}, k5{}, k6{}, ytmp{}, ynew{}, fnew{};

    while (t < t1) {
        if (res.accepted + res.rejected >= cfg.max_steps) {
            res.status = IntegrateStatus::budget_exhausted;
            return res;
        }

        const bool last = t + h >= t1;
        const double hs = last ? t1 - t : h;

        bool stage_ok = true;
        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + hs * detail::ck_a21 * k1[i];
        stage_ok = rhs(t + hs / 5.0, ytmp, k2);
        if (stage_ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (detail::ck_a31 * k1[i] + detail::ck_a32 * k2[i]);
            stage_ok = rhs(t + 3.0 * hs / 10.0, ytmp, k3);
        }
        if (stage_ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (detail::ck_a41 * k1[i] + detail::ck_a42 * k2[i] +
                                       detail::ck_a43 * k3[i]);
            stage_ok = rhs(t + 3.0 * hs / 5.0, ytmp, k4);
        }
        if (stage_ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (detail::ck_a51 * k1[i] + detail::ck_a52 * k2[i] +
                                       detail::ck_a53 * k3[i] + detail::ck_a54 * k4[i]);
            stage_ok = rhs(t + hs, ytmp, k5);
        }
        if (stage_ok) {
            for (std::size_t i = 0; i < N; ++i)
                ytmp[i] = y[i] + hs * (detail::ck_a61 * k1[i] + detail::ck_a62 * k2[i] +
                                       detail::ck_a63 * k3[i] + detail::ck_a64 * k4[i] +
                                       detail::ck_a65 * k5[i]);
            stage_ok = rhs(t + 7.0 * hs / 8.0, ytmp, k6);
        }
        if (stage_ok) {
            double sum_sq = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                ynew[i] = y[i] + hs * (detail::ck_b1 * k1[i] + detail::ck_b3 * k3[i] +
                                       detail::ck_b4 * k4[i] + detail::ck_b6 * k6[i]);
                const double ei = hs * (detail::ck_e1 * k1[i] + detail::ck_e3 * k3[i] +
                                        detail::ck_e4 * k4[i] + detail::ck_e5 * k5[i] +
                                        detail::ck_e6 * k6[i]);
                const double scale =
                    cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
                sum_sq += (ei / scale) * (ei / scale);
            }
            err = std::sqrt(sum_sq / N);
            if (!std::isfinite(err)) stage_ok = false;
        }

        // derivative at the step end doubles as k1 of the next step
        const double tnew = last ? t1 : t + hs;
        if (stage_ok && err <= 1.0) stage_ok = rhs(tnew, ynew, fnew);

        if (stage_ok && err <= 1.0) {
            t = tnew;
            y = ynew;
            k1 = fnew;
            res.accepted += 1;
            res.y = y;
            res.t = t;
            observer(t, y, fnew);
            const double factor =
                err > 0 ? std::clamp(cfg.safety * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
            h = std::min(hs * factor, cfg.h_max);
        } else {
            res.rejected += 1;
            const double factor =
                stage_ok ? std::clamp(cfg.safety * std::pow(err, -0.2), 0.2, 1.0) : 0.2;
            h = hs * factor;
            if (h < cfg.h_min) {
                res.status = stage_ok ? IntegrateStatus::step_underflow
                                      : IntegrateStatus::invalid_state;
                return res;
            }
        }
    }
    res.status = IntegrateStatus::ok;
    return res;
}

/// Integration failure; carries the last valid state and its time.
struct IntegrationError : std::runtime_error {
    IntegrateStatus status;
    SimState last_state;

    IntegrationError(IntegrateStatus st, const SimState& s)
        : std::runtime_error(std::string("integration failed: ") + to_string(st) +
                             " at t = " + std::to_string(s.t) + " s"),
          status(st),
          last_state(s) {}
};

namespace detail {

/// Bubble system in scaled variables u = (R/R0, R'/(R0 f0), x/l0, x'/(l0 f0)),
/// independent variable tau = t f0.
struct BubbleOde {
    AcousticField field;
    PhysicalParams params;
    double R0, lam0, f0, inv_f0;

    BubbleOde(const AcousticField& f, const PhysicalParams& par)
        : field(f), params(par), R0(par.R0), lam0(f.lambda0), f0(f.f0), inv_f0(1.0 / f.f0) {}

    bool operator()(double tau, const std::array<double, 4>& u,
                    std::array<double, 4>& du) const noexcept {
        SimState s;
        s.R = R0 * u[0];
        s.Rdot = R0 * f0 * u[1];
        s.x = lam0 * u[2];
        s.xdot = lam0 * f0 * u[3];
        s.t = tau * inv_f0;
        StateDerivatives d;
        if (!try_rhs(field, params, s, d)) return false;
        du[0] = u[1];
        du[1] = d.Rddot / (R0 * f0 * f0);
        du[2] = u[3];
        du[3] = d.xddot / (lam0 * f0 * f0);
        return true;
    }
};

inline std::array<double, 4> to_scaled(const SimState& s, const BubbleOde& ode) {
    return {s.R / ode.R0, s.Rdot / (ode.R0 * ode.f0), s.x / ode.lam0,
            s.xdot / (ode.lam0 * ode.f0)};
}

inline SimState from_scaled(const std::array<double, 4>& u, double tau,
                            const BubbleOde& ode) {
    SimState s;
    s.R = ode.R0 * u[0];
    s.Rdot = ode.R0 * ode.f0 * u[1];
    s.x = ode.lam0 * u[2];
    s.xdot = ode.lam0 * ode.f0 * u[3];
    s.t = tau * ode.inv_f0;
    return s;
}

inline IntegratorConfig to_tau_units(const IntegratorConfig& cfg, double f0) {
    IntegratorConfig c = cfg;
    c.h_init = cfg.h_init * f0;
    c.h_min = cfg.h_min * f0;
    c.h_max = cfg.h_max * f0;
    return c;
}

}  // namespace detail

/// Advances the bubble state by `duration` seconds. The returned t is exactly
/// state.t + duration. Throws IntegrationError on failure.
inline SimState integrate(const SimState& state, const AcousticField& field,
                          const PhysicalParams& params, double duration,
                          const IntegratorConfig& cfg) {
    if (!(duration > 0)) throw std::invalid_argument("integrate: duration must be positive");
    if (!state.valid()) throw InvalidStateError("integrate: invalid initial state");

    const detail::BubbleOde ode(field, params);
    const double tau0 = state.t * field.f0;
    const auto res = integrate_ode<4>(ode, detail::to_scaled(state, ode), tau0,
                                      tau0 + duration * field.f0,
                                      detail::to_tau_units(cfg, field.f0));
    if (res.status != IntegrateStatus::ok)
        throw IntegrationError(res.status, detail::from_scaled(res.y, res.t, ode));
    SimState out = detail::from_scaled(res.y, res.t, ode);
    out.t = state.t + duration;
    return out;
}

struct MeanResult {
    SimState state;
    double mean_xdot = 0;  ///< time-averaged translational velocity [m/s]
    double mean_x = 0;     ///< time-averaged position [m]
};

namespace detail {

/// Corrected-trapezoid accumulator over accepted steps: the endpoint
/// derivatives sharpen the plain trapezoid rule to O(h^4) per step, keeping
/// the quadrature route independent of the Runge--Kutta increments.
struct MeanAccumulator {
    bool primed = false;
    double tau_prev = 0;
    double xi_prev = 0, dxi_prev = 0;
    double v_prev = 0, dv_prev = 0;
    double int_xi = 0, int_v = 0;

    void operator()(double tau, const std::array<double, 4>& u,
                    const std::array<double, 4>& du) {
        if (primed) {
            const double h = tau - tau_prev;
            int_xi += 0.5 * h * (xi_prev + u[2]) + h * h / 12.0 * (dxi_prev - du[2]);
            int_v += 0.5 * h * (v_prev + u[3]) + h * h / 12.0 * (dv_prev - du[3]);
        }
        primed = true;
        tau_prev = tau;
        xi_prev = u[2];
        dxi_prev = du[2];
        v_prev = u[3];
        dv_prev = du[3];
    }
};

}  // namespace detail

/// As integrate(), additionally returning the time averages of xdot and x
/// accumulated by corrected-trapezoid quadrature over the accepted steps.
inline MeanResult integrate_with_mean(const SimState& state, const AcousticField& field,
                                      const PhysicalParams& params, double duration,
                                      const IntegratorConfig& cfg) {
    if (!(duration > 0))
        throw std::invalid_argument("integrate_with_mean: duration must be positive");
    if (!state.valid()) throw InvalidStateError("integrate_with_mean: invalid initial state");

    const detail::BubbleOde ode(field, params);
    const double tau0 = state.t * field.f0;
    const double dtau = duration * field.f0;
    detail::MeanAccumulator acc;
    const auto res = integrate_ode<4>(ode, detail::to_scaled(state, ode), tau0, tau0 + dtau,
                                      detail::to_tau_units(cfg, field.f0), acc);
    if (res.status != IntegrateStatus::ok)
        throw IntegrationError(res.status, detail::from_scaled(res.y, res.t, ode));

    MeanResult out;
    out.state = detail::from_scaled(res.y, res.t, ode);
    out.state.t = state.t + duration;
    out.mean_x = ode.lam0 * acc.int_xi / dtau;
    out.mean_xdot = ode.lam0 * field.f0 * acc.int_v / dtau;
    return out;
}

}  // namespace bubblectl
