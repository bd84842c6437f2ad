#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fcsmpcc/machine.hpp"
#include "fcsmpcc/mpcc.hpp"
#include "fcsmpcc/multistep.hpp"
#include "fcsmpcc/speed_loop.hpp"
#include "fcsmpcc/trace.hpp"

namespace fcsmpcc {

enum class ControllerType { pi_mpcc, pi_conv_n, pi_im_mpcc, dc_im_mpcc };
enum class DelayModel { none, one_step };

inline const char* to_string(ControllerType t) {
    switch (t) {
        case ControllerType::pi_mpcc: return "PI+MPCC";
        case ControllerType::pi_conv_n: return "PI+ConvN";
        case ControllerType::pi_im_mpcc: return "PI+IMMPCC";
        case ControllerType::dc_im_mpcc: return "DC+IMMPCC";
    }
    return "?";
}

inline const char* to_string(DelayModel d) {
    return d == DelayModel::none ? "none" : "one_step";
}

// Piecewise-constant profile: value of the latest breakpoint at or before t.
struct Profile {
    std::vector<std::pair<double, double>> points;  // (time [s], value)

    double at(double t) const {
        double v = points.empty() ? 0.0 : points.front().second;
        for (const auto& [bt, bv] : points) {
            if (bt <= t) v = bv;
            else break;
        }
        return v;
    }
};

struct ScenarioConfig {
    std::string label = "scenario";
    double duration = 0.2;  // [s]
    double ts = 50e-6;      // control period [s]
    int substeps = 10;      // plant integrator steps per control period
    MachineParams machine{};

    ControllerType controller = ControllerType::pi_im_mpcc;
    int horizon = 2;  // prediction steps for ConvN / IMMPCC
    CostConfig cost{};
    bool accumulate_cost = false;

    PiGains pi{};
    double eso_beta1 = 1200.0;
    double eso_beta2 = 4000.0;
    double eso_kp = 30.0;
    double eso_limit = 10.0;
    double nominal_inertia = -1.0;  // controller-side J; <= 0 means machine value

    Profile speed_ref_rpm;  // piecewise-constant speed reference [rpm]
    Profile load_torque;    // piecewise-constant load torque [N m]
    double id_ref = 0.0;    // [A]

    DelayModel delay = DelayModel::one_step;
    double noise_amp = 0.0;  // uniform measurement noise amplitude [A]
    std::uint64_t seed = 1;

    void validate() const {
        machine.validate();
        if (!(duration > 0.0)) throw std::invalid_argument("sim: duration must be > 0");
        if (!(ts > 0.0)) throw std::invalid_argument("sim: ts must be > 0");
        if (substeps < 1) throw std::invalid_argument("sim: substeps must be >= 1");
        if (!(cost.i_max > 0.0)) throw std::invalid_argument("controller: i_max must be > 0");
        if (!(cost.penalty > 0.0)) throw std::invalid_argument("controller: penalty must be > 0");
        if (horizon < 1 || horizon > 3)
            throw std::invalid_argument("controller: horizon must be in [1,3]");
        if (!(noise_amp >= 0.0)) throw std::invalid_argument("sim: noise_amp must be >= 0");
        auto check_profile = [&](const Profile& p, const char* name) {
            double prev = -1.0;
            for (const auto& [t, v] : p.points) {
                (void)v;
                if (t < 0.0 || t > duration)
                    throw std::invalid_argument(std::string(name) +
                                                ": breakpoint outside [0, duration]");
                if (t <= prev)
                    throw std::invalid_argument(std::string(name) +
                                                ": breakpoints must be strictly increasing");
                prev = t;
            }
        };
        check_profile(speed_ref_rpm, "speed_ref.profile");
        check_profile(load_torque, "load.profile");
    }

    // Canonical one-line-per-field dump; the basis of the config hash.
    std::string canonical() const {
        char buf[2048];
        int n = std::snprintf(
            buf, sizeof buf,
            "label=%s;duration=%.17g;ts=%.17g;substeps=%d;"
            "rs=%.17g;ld=%.17g;lq=%.17g;psi_f=%.17g;pn=%d;j=%.17g;b=%.17g;vdc=%.17g;"
            "controller=%s;horizon=%d;i_max=%.17g;penalty=%.17g;accumulate=%d;"
            "pi_kp=%.17g;pi_ki=%.17g;pi_limit=%.17g;"
            "eso_beta1=%.17g;eso_beta2=%.17g;eso_kp=%.17g;eso_limit=%.17g;jn=%.17g;"
            "id_ref=%.17g;delay=%s;noise=%.17g;seed=%llu;",
            label.c_str(), duration, ts, substeps, machine.rs, machine.ld, machine.lq,
            machine.psi_f, machine.pole_pairs, machine.inertia, machine.friction, machine.vdc,
            to_string(controller), horizon, cost.i_max, cost.penalty, accumulate_cost ? 1 : 0,
            pi.kp, pi.ki, pi.limit, eso_beta1, eso_beta2, eso_kp, eso_limit, nominal_inertia,
            id_ref, to_string(delay), noise_amp,
            static_cast<unsigned long long>(seed));
        std::string s(buf, n > 0 ? static_cast<std::size_t>(n) : 0);
        auto dump_profile = [&s](const char* name, const Profile& p) {
            s += name;
            s += '=';
            char b[64];
            for (const auto& [t, v] : p.points) {
                std::snprintf(b, sizeof b, "%.17g:%.17g,", t, v);
                s += b;
            }
            s += ';';
        };
        dump_profile("speed_ref", speed_ref_rpm);
        dump_profile("load", load_torque);
        return s;
    }
};

inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Stator phase currents from the rotor-frame state; the inverse of the
// transform convention used for the inverter voltages.
inline Abc phase_currents(const MotorState& s) {
    return dq_to_abc({s.id, s.iq}, s.theta_e);
}

// Raised when the plant state stops being finite; carries the timestamp.
struct SimulationError : std::runtime_error {
    double t;
    explicit SimulationError(double t_)
        : std::runtime_error("simulation diverged (non-finite state) at t = " +
                             std::to_string(t_) + " s"),
          t(t_) {}
};

// Per-period observation handed to an optional hook; used by tests to
// inspect the controller's view of each period.
struct PeriodInfo {
    int period = 0;
    double t = 0.0;
    Dq state_k1{};       // delay-compensated currents candidate evaluation starts from
    double omega_re = 0.0;
    CurrentRef ref{};
    std::array<Dq, 8> candidate_u{};
    SwitchState chosen{};
    double chosen_cost = 0.0;
    bool feasible = true;
};

using PeriodHook = std::function<void(const PeriodInfo&)>;

// Runs the closed loop: measure, speed loop, delay compensation, vector
// selection, zero-order-hold plant sub-stepping, trace recording.
// Bitwise deterministic for a fixed config.
inline Trace run_scenario(const ScenarioConfig& cfg, const PeriodHook& hook = {}) {
    cfg.validate();

    const DiscreteModel dm = DiscreteModel::from(cfg.machine, cfg.ts);
    const EsoGains eso_gains = EsoGains::from(cfg.machine, cfg.eso_beta1, cfg.eso_beta2,
                                              cfg.eso_kp, cfg.eso_limit, cfg.nominal_inertia);
    const bool dc_active = cfg.controller == ControllerType::dc_im_mpcc;
    const int periods = static_cast<int>(std::llround(cfg.duration / cfg.ts));
    const double sub_dt = cfg.ts / cfg.substeps;

    Trace trace;
    trace.label = cfg.label;
    trace.controller = to_string(cfg.controller);
    trace.config_hash = fnv1a_hex(cfg.canonical());
    trace.ts = cfg.ts;
    trace.pole_pairs = cfg.machine.pole_pairs;
    trace.seed = cfg.seed;
    trace.rows.reserve(periods + 1);

    MotorState x{};
    PiState pi_state{};
    EsoState eso{x.omega_m, 0.0};
    double prev_iq_ref = 0.0;
    SwitchState latched = vector_set()[0];  // zero vector until the first choice acts
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> noise(-1.0, 1.0);

    for (int k = 0; k <= periods; ++k) {
        const double t = k * cfg.ts;
        const double omega_ref_rpm = cfg.speed_ref_rpm.at(t);
        const double omega_ref = rpm_to_rad_s(omega_ref_rpm);
        const double t_load = cfg.load_torque.at(t);

        Dq meas{x.id, x.iq};
        if (cfg.noise_amp > 0.0) {
            meas.d += cfg.noise_amp * noise(rng);
            meas.q += cfg.noise_amp * noise(rng);
        }
        const double omega_meas = x.omega_m;
        const double omega_re = cfg.machine.pole_pairs * omega_meas;

        // Outer speed loop -> iq reference.
        double iq_ref;
        if (dc_active) {
            eso = eso_update(eso, prev_iq_ref, omega_meas, eso_gains, cfg.ts);
            iq_ref = dc_control(omega_ref, eso, eso_gains);
        } else {
            const PiOutput out = pi_speed(omega_ref, omega_meas, pi_state, cfg.pi, cfg.ts);
            iq_ref = out.iq_ref;
            pi_state = out.state;
        }
        // Keep the reference inside the current limit circle.
        const double iq_cap = std::sqrt(
            std::max(0.0, cfg.cost.i_max * cfg.cost.i_max - cfg.id_ref * cfg.id_ref));
        iq_ref = std::clamp(iq_ref, -iq_cap, iq_cap);
        prev_iq_ref = iq_ref;
        const CurrentRef ref{cfg.id_ref, iq_ref};

        const std::array<Dq, 8> cand_u = candidate_voltages(cfg.machine.vdc, x.theta_e);
        const Dq u_applied = cand_u[latched.index];
        const Dq state_k1 = cfg.delay == DelayModel::one_step
                                ? delay_compensate(meas, omega_re, u_applied, dm)
                                : meas;

        SwitchState chosen;
        EvalCounter evals;
        double chosen_cost = 0.0;
        bool feasible = true;
        switch (cfg.controller) {
            case ControllerType::pi_mpcc: {
                const SelectResult r =
                    single_step_select(state_k1, omega_re, ref, cand_u, vector_set(), dm,
                                       cfg.cost);
                chosen = r.vector;
                evals = r.evals;
                chosen_cost = r.cost;
                feasible = r.feasible;
                break;
            }
            case ControllerType::pi_conv_n: {
                const ConventionalResult r = conventional_nstep(
                    state_k1, omega_re, ref, cfg.horizon, cand_u, vector_set(), dm, cfg.cost);
                chosen = r.vector;
                evals = r.evals;
                chosen_cost = r.cost;
                feasible = r.cost < cfg.cost.penalty;
                break;
            }
            case ControllerType::pi_im_mpcc:
            case ControllerType::dc_im_mpcc: {
                const ImResult r = im_n_step(state_k1, omega_re, ref, cfg.horizon, cand_u,
                                             vector_set(), dm, cfg.cost, cfg.accumulate_cost);
                chosen = r.vector;
                evals = r.evals;
                chosen_cost = r.best_cost;
                feasible = r.best_cost < cfg.cost.penalty;
                break;
            }
        }

        if (hook)
            hook({k, t, state_k1, omega_re, ref, cand_u, chosen, chosen_cost, feasible});

        const Abc iabc = dq_to_abc(meas, x.theta_e);
        TraceRow row;
        row.t = t;
        row.id = meas.d;
        row.iq = meas.q;
        row.ia = iabc.a;
        row.ib = iabc.b;
        row.ic = iabc.c;
        row.omega_rpm = rad_s_to_rpm(x.omega_m);
        row.omega_ref_rpm = omega_ref_rpm;
        row.te = electromagnetic_torque(x, cfg.machine);
        row.t_load = t_load;
        row.vector_index = chosen.index;
        row.model_evals = evals.model_evals;
        row.cost_evals = evals.cost_evals;
        row.z1 = dc_active ? eso.z1 : 0.0;
        row.z2 = dc_active ? eso.z2 : 0.0;
        trace.rows.push_back(row);

        if (k == periods) break;

        // Zero-order hold: the applied vector's dq voltage at the period
        // start is held for the whole period.
        const SwitchState applied = cfg.delay == DelayModel::one_step ? latched : chosen;
        const PlantInput u{cand_u[applied.index].d, cand_u[applied.index].q, t_load};
        for (int s = 0; s < cfg.substeps; ++s) x = step_plant(x, u, cfg.machine, sub_dt);
        if (!x.finite()) throw SimulationError(t + cfg.ts);

        latched = chosen;
    }
    return trace;
}

}  // namespace fcsmpcc
