/** \file physics.hpp
 *  Dual-frequency standing-wave field and the coupled radial/translational
 *  dynamics of a single spherical gas bubble (Keller--Miksis radial equation,
 *  primary Bjerknes force, Levich drag).
 *
 *  Everything here is a pure function of its inputs and safe to call from any
 *  number of threads.
 */
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace bubblectl {

inline constexpr double pi = std::numbers::pi;

/// Thrown when an operation is evaluated at a physically invalid state
/// (nonpositive radius, vanishing acceleration coefficient).
struct InvalidStateError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Liquid/gas/bubble constants. Defaults: air bubble of 60 um equilibrium
/// radius in water at ambient conditions.
struct PhysicalParams {
    double rho_L = 998.0;    ///< liquid density [kg/m^3]
    double c_L = 1500.0;     ///< speed of sound in the liquid [m/s]
    double sigma = 0.0725;   ///< surface tension [N/m]
    double mu_L = 1.0e-3;    ///< dynamic viscosity [Pa s]
    double n_poly = 1.4;     ///< polytropic exponent
    double R0 = 60.0e-6;     ///< equilibrium bubble radius [m]
    double P0 = 1.0e5;       ///< ambient pressure [Pa]
    double P_inf = 1.0e5;    ///< static far-field pressure in the gas law [Pa]

    void validate() const {
        if (!(rho_L > 0 && c_L > 0 && sigma > 0 && mu_L > 0 && R0 > 0 &&
              P0 > 0 && P_inf > 0))
            throw std::invalid_argument("PhysicalParams: all fields must be positive");
        if (!(n_poly >= 1.0 && n_poly <= 5.0 / 3.0))
            throw std::invalid_argument("PhysicalParams: n_poly outside [1, 5/3]");
    }
};

/// Superposition of two standing waves. The pressure amplitudes are the only
/// quantities a controller may change at runtime; the wave geometry
/// (omega_i, k_i, lambda_i) is fixed by the frequencies and sound speed.
struct AcousticField {
    double f0 = 25.0e3;  ///< low frequency component [Hz]
    double f1 = 50.0e3;  ///< high frequency component [Hz]
    double PA0 = 0.0;    ///< amplitude of the f0 component [Pa]
    double PA1 = 0.0;    ///< amplitude of the f1 component [Pa]

    // derived
    double omega0 = 2 * pi * 25.0e3;
    double omega1 = 2 * pi * 50.0e3;
    double k0 = 2 * pi * 25.0e3 / 1500.0;
    double k1 = 2 * pi * 50.0e3 / 1500.0;
    double lambda0 = 1500.0 / 25.0e3;
    double lambda1 = 1500.0 / 50.0e3;
};

/// Builds a field with the derived wave numbers/lengths consistent with the
/// liquid sound speed.
inline AcousticField make_field(const PhysicalParams& par, double f0, double f1,
                                double PA0 = 0.0, double PA1 = 0.0) {
    if (!(f0 > 0 && f1 > 0))
        throw std::invalid_argument("AcousticField: frequencies must be positive");
    if (PA0 < 0 || PA1 < 0)
        throw std::invalid_argument("AcousticField: amplitudes must be nonnegative");
    AcousticField f;
    f.f0 = f0;
    f.f1 = f1;
    f.PA0 = PA0;
    f.PA1 = PA1;
    f.omega0 = 2 * pi * f0;
    f.omega1 = 2 * pi * f1;
    f.k0 = f.omega0 / par.c_L;
    f.k1 = f.omega1 / par.c_L;
    f.lambda0 = par.c_L / f0;
    f.lambda1 = par.c_L / f1;
    return f;
}

/// Full continuous state of the coupled ODE system.
struct SimState {
    double R = 0;     ///< bubble radius [m]
    double Rdot = 0;  ///< wall velocity [m/s]
    double x = 0;     ///< bubble center position [m]
    double xdot = 0;  ///< translational velocity [m/s]
    double t = 0;     ///< time [s]

    bool valid() const {
        return R > 0 && std::isfinite(R) && std::isfinite(Rdot) &&
               std::isfinite(x) && std::isfinite(xdot) && std::isfinite(t);
    }
};

/// Evaluates the driving field and its derivatives at one (x, t), sharing the
/// trigonometric work between pressure, gradient, and particle velocity.
struct FieldEval {
    double p;      ///< pressure [Pa]
    double dp_dx;  ///< spatial gradient [Pa/m]
    double dp_dt;  ///< explicit time derivative [Pa/s]
    double v_ex;   ///< first-order acoustic particle velocity [m/s]

    FieldEval(const AcousticField& f, const PhysicalParams& par, double x, double t) {
        const double s0 = std::sin(f.k0 * x), c0 = std::cos(f.k0 * x);
        const double s1 = std::sin(f.k1 * x), c1 = std::cos(f.k1 * x);
        const double st0 = std::sin(f.omega0 * t), ct0 = std::cos(f.omega0 * t);
        const double st1 = std::sin(f.omega1 * t), ct1 = std::cos(f.omega1 * t);
        const double inv_rhoc = 1.0 / (par.rho_L * par.c_L);
        p = par.P0 + f.PA0 * s0 * st0 + f.PA1 * s1 * st1;
        dp_dx = f.PA0 * f.k0 * c0 * st0 + f.PA1 * f.k1 * c1 * st1;
        dp_dt = f.PA0 * f.omega0 * s0 * ct0 + f.PA1 * f.omega1 * s1 * ct1;
        v_ex = (f.PA0 * c0 * ct0 + f.PA1 * c1 * ct1) * inv_rhoc;
    }
};

/// p(x,t) = P0 + PA0 sin(k0 x) sin(w0 t) + PA1 sin(k1 x) sin(w1 t)
inline double pressure_at(const AcousticField& f, const PhysicalParams& par,
                          double x, double t) {
    return FieldEval(f, par, x, t).p;
}

/// Spatial derivative of the driving pressure.
inline double pressure_gradient_at(const AcousticField& f, const PhysicalParams& par,
                                   double x, double t) {
    return FieldEval(f, par, x, t).dp_dx;
}

/// First-order particle velocity of the standing-wave field, from the
/// linearized momentum equation rho dv/dt = -dp/dx.
inline double acoustic_particle_velocity(const AcousticField& f,
                                         const PhysicalParams& par, double x,
                                         double t) {
    return FieldEval(f, par, x, t).v_ex;
}

/// Polytropic gas pressure p_G = (2 sigma / R0 + P_inf) (R0 / R)^(3n).
inline double gas_pressure(const PhysicalParams& par, double R) {
    if (!(R > 0)) throw InvalidStateError("gas_pressure: R must be positive");
    return (2.0 * par.sigma / par.R0 + par.P_inf) * std::pow(par.R0 / R, 3.0 * par.n_poly);
}

/// Liquid pressure at the bubble wall: p_G - 2 sigma / R - 4 mu Rdot / R.
inline double wall_liquid_pressure(const PhysicalParams& par, double R, double Rdot) {
    if (!(R > 0)) throw InvalidStateError("wall_liquid_pressure: R must be positive");
    return gas_pressure(par, R) - 2.0 * par.sigma / R - 4.0 * par.mu_L * Rdot / R;
}

/// Primary Bjerknes force F_B1 = -V grad p, V = (4/3) pi R^3.
inline double primary_bjerknes_force(const AcousticField& f, const PhysicalParams& par,
                                     const SimState& s) {
    const double volume = (4.0 / 3.0) * pi * s.R * s.R * s.R;
    return -volume * pressure_gradient_at(f, par, s.x, s.t);
}

/// Levich drag F_D = -12 pi mu R (xdot - v_ex).
inline double drag_force(const AcousticField& f, const PhysicalParams& par,
                         const SimState& s) {
    return -12.0 * pi * par.mu_L * s.R *
           (s.xdot - acoustic_particle_velocity(f, par, s.x, s.t));
}

/// Time derivatives of (R, Rdot, x, xdot).
struct StateDerivatives {
    double Rdot = 0;
    double Rddot = 0;
    double xdot = 0;
    double xddot = 0;
};

/// Acceleration-coefficient floor [m]; the Keller--Miksis rearrangement is
/// singular where (1 - Rdot/c) R + 4 mu / (rho c) crosses zero.
inline constexpr double km_coeff_floor = 1.0e-15;

/// Non-throwing right-hand side of the coupled system. Returns false when the
/// state is invalid (R <= 0, non-finite, or vanishing acceleration
/// coefficient); the output is unspecified in that case.
inline bool try_rhs(const AcousticField& f, const PhysicalParams& par,
                    const SimState& s, StateDerivatives& out) noexcept {
    const double R = s.R, Rdot = s.Rdot, xdot = s.xdot;
    if (!(R > 0) || !std::isfinite(R) || !std::isfinite(Rdot) || !std::isfinite(xdot))
        return false;

    const FieldEval fe(f, par, s.x, s.t);
    const double inv_R = 1.0 / R;
    const double inv_c = 1.0 / par.c_L;
    const double inv_rho = 1.0 / par.rho_L;

    const double p_G = (2.0 * par.sigma / par.R0 + par.P_inf) *
                       std::pow(par.R0 * inv_R, 3.0 * par.n_poly);
    const double p_L = p_G - 2.0 * par.sigma * inv_R - 4.0 * par.mu_L * Rdot * inv_R;
    const double delta_p = p_L - fe.p;

    // d(p_L - p)/dt split into the part independent of Rddot and the
    // coefficient of Rddot (the latter is moved into the denominator).
    const double dpL_dR = -3.0 * par.n_poly * p_G * inv_R +
                          (2.0 * par.sigma + 4.0 * par.mu_L * Rdot) * inv_R * inv_R;
    const double dp_free = dpL_dR * Rdot - fe.dp_dt - xdot * fe.dp_dx;

    const double denom = (1.0 - Rdot * inv_c) * R + 4.0 * par.mu_L * inv_rho * inv_c;
    if (!(denom > km_coeff_floor || denom < -km_coeff_floor)) return false;

    const double numer = (1.0 + Rdot * inv_c) * delta_p * inv_rho +
                         R * inv_c * inv_rho * dp_free + 0.25 * xdot * xdot -
                         1.5 * (1.0 - Rdot * inv_c / 3.0) * Rdot * Rdot;

    // translational part: R xddot + 3 Rdot xdot = 3 F_ex / (2 pi rho R^2)
    const double force_accel = -2.0 * R * inv_rho * fe.dp_dx -
                               18.0 * par.mu_L * inv_rho * inv_R * (xdot - fe.v_ex);

    out.Rdot = Rdot;
    out.Rddot = numer / denom;
    out.xdot = xdot;
    out.xddot = (force_accel - 3.0 * Rdot * xdot) * inv_R;
    return std::isfinite(out.Rddot) && std::isfinite(out.xddot);
}

/// Throwing wrapper around try_rhs.
inline StateDerivatives rhs(const AcousticField& f, const PhysicalParams& par,
                            const SimState& s) {
    StateDerivatives d;
    if (!try_rhs(f, par, s, d))
        throw InvalidStateError("rhs: invalid state (R <= 0, non-finite, or singular "
                                "acceleration coefficient)");
    return d;
}

/// Linear (Minnaert-type) natural frequency of radial oscillation, with the
/// surface-tension correction: omega^2 = [3n (P_inf + 2s/R) - 2s/R] / (rho R^2).
inline double linear_resonance_frequency(const PhysicalParams& par, double R) {
    if (!(R > 0)) throw InvalidStateError("linear_resonance_frequency: R must be positive");
    const double two_sigma_over_R = 2.0 * par.sigma / R;
    const double omega_sq = (3.0 * par.n_poly * (par.P_inf + two_sigma_over_R) -
                             two_sigma_over_R) /
                            (par.rho_L * R * R);
    return std::sqrt(omega_sq) / (2.0 * pi);
}

/// Inverts the linear resonance relation: the equilibrium radius whose natural
/// frequency equals the given driving frequency. Bisection on the monotone
/// cubic rho omega^2 R^3 - 3n P_inf R - 2 sigma (3n - 1) = 0.
inline double linear_resonance_radius(const PhysicalParams& par, double f) {
    if (!(f > 0)) throw std::invalid_argument("linear_resonance_radius: f must be positive");
    const double omega_sq = (2.0 * pi * f) * (2.0 * pi * f);
    auto cubic = [&](double R) {
        return par.rho_L * omega_sq * R * R * R - 3.0 * par.n_poly * par.P_inf * R -
               2.0 * par.sigma * (3.0 * par.n_poly - 1.0);
    };
    double lo = 1.0e-9, hi = 1.0e-1;
    if (cubic(lo) >= 0 || cubic(hi) <= 0)
        throw std::invalid_argument("linear_resonance_radius: root bracket failed");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cubic(mid) < 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace bubblectl
