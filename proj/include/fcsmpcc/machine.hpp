#pragma once

#include <cmath>
#include <stdexcept>

#include "fcsmpcc/transforms.hpp"

namespace fcsmpcc {

// Electrical and mechanical constants of the PMSM.
struct MachineParams {
    double rs = 1.3;       // stator resistance [ohm]
    double ld = 0.0085;    // d-axis inductance [H]
    double lq = 0.0085;    // q-axis inductance [H]
    double psi_f = 0.175;  // rotor flux linkage [Wb]
    int pole_pairs = 4;
    double inertia = 0.008;  // rotor inertia [kg m^2]
    double friction = 0.0;   // viscous friction [N m s/rad]
    double vdc = 311.0;      // DC-link voltage [V]

    void validate() const {
        if (!(rs > 0.0)) throw std::invalid_argument("machine: rs must be > 0");
        if (!(ld > 0.0)) throw std::invalid_argument("machine: ld must be > 0");
        if (!(lq > 0.0)) throw std::invalid_argument("machine: lq must be > 0");
        if (!(psi_f > 0.0)) throw std::invalid_argument("machine: psi_f must be > 0");
        if (pole_pairs < 1) throw std::invalid_argument("machine: pole_pairs must be >= 1");
        if (!(inertia > 0.0)) throw std::invalid_argument("machine: inertia must be > 0");
        if (!(friction >= 0.0)) throw std::invalid_argument("machine: friction must be >= 0");
        if (!(vdc > 0.0)) throw std::invalid_argument("machine: vdc must be > 0");
    }
};

// Plant state in the rotor frame. theta_e stays wrapped to [0, 2*pi).
struct MotorState {
    double id = 0.0;       // [A]
    double iq = 0.0;       // [A]
    double omega_m = 0.0;  // mechanical angular velocity [rad/s]
    double theta_e = 0.0;  // electrical angle [rad]

    bool finite() const {
        return std::isfinite(id) && std::isfinite(iq) && std::isfinite(omega_m) &&
               std::isfinite(theta_e);
    }
};

struct PlantInput {
    double ud = 0.0;      // [V]
    double uq = 0.0;      // [V]
    double t_load = 0.0;  // load torque [N m]
};

struct MotorStateRate {
    double did = 0.0;
    double diq = 0.0;
    double domega = 0.0;
    double dtheta = 0.0;
};

inline double electromagnetic_torque(const MotorState& s, const MachineParams& p) {
    return 1.5 * p.pole_pairs * (p.psi_f * s.iq + (p.ld - p.lq) * s.id * s.iq);
}

// Continuous-time dq model with the mechanical equation.
inline MotorStateRate derivative(const MotorState& s, const PlantInput& u,
                                 const MachineParams& p) {
    const double omega_re = p.pole_pairs * s.omega_m;
    MotorStateRate r;
    r.did = (u.ud - p.rs * s.id + omega_re * p.lq * s.iq) / p.ld;
    r.diq = (u.uq - p.rs * s.iq - omega_re * p.ld * s.id - omega_re * p.psi_f) / p.lq;
    r.domega = (electromagnetic_torque(s, p) - p.friction * s.omega_m - u.t_load) / p.inertia;
    r.dtheta = p.pole_pairs * s.omega_m;
    return r;
}

// One classical fourth-order fixed step under a held input.
inline MotorState step_plant(const MotorState& s, const PlantInput& u,
                             const MachineParams& p, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_plant: dt must be > 0");

    auto advance = [](const MotorState& x, const MotorStateRate& k, double h) {
        MotorState y = x;
        y.id += h * k.did;
        y.iq += h * k.diq;
        y.omega_m += h * k.domega;
        y.theta_e += h * k.dtheta;
        return y;
    };

    const MotorStateRate k1 = derivative(s, u, p);
    const MotorStateRate k2 = derivative(advance(s, k1, 0.5 * dt), u, p);
    const MotorStateRate k3 = derivative(advance(s, k2, 0.5 * dt), u, p);
    const MotorStateRate k4 = derivative(advance(s, k3, dt), u, p);

    MotorState out = s;
    out.id += dt / 6.0 * (k1.did + 2.0 * k2.did + 2.0 * k3.did + k4.did);
    out.iq += dt / 6.0 * (k1.diq + 2.0 * k2.diq + 2.0 * k3.diq + k4.diq);
    out.omega_m += dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
    out.theta_e += dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);
    out.theta_e = wrap_angle(out.theta_e);
    return out;
}

}  // namespace fcsmpcc
