#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fcsmpcc/inverter.hpp"
#include "fcsmpcc/machine.hpp"
#include "fcsmpcc/transforms.hpp"

namespace fcsmpcc {

// Forward-Euler discretization constants of the current equations.
struct DiscreteModel {
    double ts = 50e-6;  // control period [s]
    double g = 0.0;     // ts/ld [s/H]
    double h = 0.0;     // ts/lq [s/H]
    MachineParams machine{};

    static DiscreteModel from(const MachineParams& p, double ts) {
        if (!(ts > 0.0)) throw std::invalid_argument("DiscreteModel: ts must be > 0");
        p.validate();
        return {ts, ts / p.ld, ts / p.lq, p};
    }
};

struct CurrentRef {
    double id_ref = 0.0;  // [A]
    double iq_ref = 0.0;  // [A]
};

// Stage-cost configuration; `penalty` is the finite stand-in for the
// infinite current-limit term so the cost stays totally ordered.
struct CostConfig {
    double i_max = 10.0;
    double penalty = 1e9;
};

struct EvalCounter {
    long model_evals = 0;
    long cost_evals = 0;

    long total() const { return model_evals; }
    EvalCounter& operator+=(const EvalCounter& o) {
        model_evals += o.model_evals;
        cost_evals += o.cost_evals;
        return *this;
    }
};

// One forward-Euler step of the current prediction model.
inline Dq predict_step(const Dq& i, double omega_re, const Dq& u, const DiscreteModel& m) {
    const MachineParams& p = m.machine;
    return {(1.0 - p.rs * m.g) * i.d + p.lq * m.g * omega_re * i.q + m.g * u.d,
            -p.ld * m.h * omega_re * i.d + (1.0 - p.rs * m.h) * i.q + m.h * u.q -
                p.psi_f * m.h * omega_re};
}

// Advances the measured currents by one period under the vector already
// latched, so candidate evaluation targets the period in which the newly
// chosen vector acts.
inline Dq delay_compensate(const Dq& measured, double omega_re, const Dq& applied,
                           const DiscreteModel& m) {
    return predict_step(measured, omega_re, applied, m);
}

// Absolute dq tracking error plus the current-limit penalty. The limit
// check is on per-axis magnitudes.
inline double stage_cost(const Dq& pred, const CurrentRef& ref, const CostConfig& c) {
    double g = std::abs(ref.id_ref - pred.d) + std::abs(ref.iq_ref - pred.q);
    if (std::abs(pred.d) > c.i_max || std::abs(pred.q) > c.i_max) g += c.penalty;
    return g;
}

struct SelectResult {
    SwitchState vector{};
    double cost = 0.0;
    EvalCounter evals{};
    bool feasible = true;  // false when every candidate hits the limit penalty
};

// Single-step FCS-MPCC over precomputed candidate dq voltages (one per
// switch state, at the current rotor angle): evaluate all 8 vectors and
// keep the argmin. Ties break toward the lower index.
inline SelectResult single_step_select(const Dq& state_k1, double omega_re,
                                       const CurrentRef& ref,
                                       const std::array<Dq, 8>& candidate_u,
                                       const VectorSet& vs, const DiscreteModel& m,
                                       const CostConfig& c) {
    SelectResult out;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
        const Dq pred = predict_step(state_k1, omega_re, candidate_u[i], m);
        ++out.evals.model_evals;
        const double g = stage_cost(pred, ref, c);
        ++out.evals.cost_evals;
        if (g < best) {
            best = g;
            out.vector = vs[i];
        }
    }
    out.cost = best;
    out.feasible = best < c.penalty;
    return out;
}

inline std::array<Dq, 8> candidate_voltages(double vdc, double theta_e) {
    std::array<Dq, 8> u{};
    for (int i = 0; i < 8; ++i) u[i] = dq_voltage(vector_set()[i], vdc, theta_e);
    return u;
}

// Convenience wrapper evaluating candidates at rotor angle theta_e.
inline SelectResult single_step_select(const Dq& state_k1, double omega_re,
                                       const CurrentRef& ref, double theta_e,
                                       const DiscreteModel& m, const CostConfig& c) {
    return single_step_select(state_k1, omega_re, ref,
                              candidate_voltages(m.machine.vdc, theta_e), vector_set(), m, c);
}

}  // namespace fcsmpcc
