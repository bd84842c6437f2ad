#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fcsmpcc/machine.hpp"

namespace fcsmpcc {

struct PiGains {
    double kp = 0.003;      // [A per rad/s]
    double ki = 0.001;      // [A per rad]
    double limit = 10.0;    // |iq_ref| clamp [A]
};

struct PiState {
    double integral = 0.0;  // [rad]
};

struct PiOutput {
    double iq_ref = 0.0;
    PiState state{};
};

// PI speed controller with conditional-integration anti-windup: the
// integrator freezes while the output is saturated in the error's
// direction.
inline PiOutput pi_speed(double omega_ref, double omega, const PiState& s, const PiGains& g,
                         double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("pi_speed: dt must be > 0");
    const double e = omega_ref - omega;
    const double unsat = g.kp * e + g.ki * (s.integral + e * dt);
    PiOutput out;
    out.state = s;
    if (std::abs(unsat) > g.limit && unsat * e > 0.0) {
        // saturated in the direction the error is pushing: hold integral
    } else {
        out.state.integral += e * dt;
    }
    const double u = g.kp * e + g.ki * out.state.integral;
    out.iq_ref = std::clamp(u, -g.limit, g.limit);
    return out;
}

// Observer gains plus the torque-constant scaling k = 2*J_n/(3*p_n*psi_f).
// k_gain is always derived from machine parameters.
struct EsoGains {
    double beta1 = 1200.0;  // [1/s]
    double beta2 = 4000.0;  // [1/s^2]
    double kp = 30.0;       // feedback magnification [A per rad/s]
    double k_gain = 0.0;
    double limit = 10.0;    // |iq_ref| clamp [A]

    static EsoGains from(const MachineParams& p, double beta1, double beta2, double kp,
                         double limit, double nominal_inertia = -1.0) {
        if (!(beta1 > 0.0) || !(beta2 > 0.0) || !(kp > 0.0))
            throw std::invalid_argument("EsoGains: beta1, beta2, kp must be > 0");
        const double jn = nominal_inertia > 0.0 ? nominal_inertia : p.inertia;
        return {beta1, beta2, kp, 2.0 * jn / (3.0 * p.pole_pairs * p.psi_f), limit};
    }
};

// z1 estimates the speed, z2 the lumped disturbance (in rad/s^2).
struct EsoState {
    double z1 = 0.0;
    double z2 = 0.0;
};

// Forward-Euler update of the extended state observer.
inline EsoState eso_update(const EsoState& s, double iq_ref, double omega_meas,
                           const EsoGains& g, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("eso_update: dt must be > 0");
    const double e1 = s.z1 - omega_meas;
    EsoState out;
    out.z1 = s.z1 + dt * (iq_ref / g.k_gain + s.z2 - g.beta1 * e1);
    out.z2 = s.z2 + dt * (-g.beta2 * e1);
    return out;
}

// Linear state-error feedback with disturbance compensation:
// iq_ref = kp*(omega_ref - z1) - k*z2, clamped.
inline double dc_control(double omega_ref, const EsoState& s, const EsoGains& g) {
    const double u0 = g.kp * (omega_ref - s.z1);
    return std::clamp(u0 - g.k_gain * s.z2, -g.limit, g.limit);
}

}  // namespace fcsmpcc
