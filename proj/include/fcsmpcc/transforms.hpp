#pragma once

#include <cmath>
#include <numbers>

namespace fcsmpcc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Abc {
    double a{};
    double b{};
    double c{};
};

struct AlphaBeta {
    double alpha{};
    double beta{};
};

struct Dq {
    double d{};
    double q{};
};

// Wraps an angle into [0, 2*pi).
inline double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return t;
}

// Amplitude-invariant Clarke transform: alpha carries the peak amplitude
// of phase a for a balanced set.
inline AlphaBeta clarke(const Abc& x) {
    return {(2.0 * x.a - x.b - x.c) / 3.0, (x.b - x.c) / std::numbers::sqrt3};
}

inline Abc inverse_clarke(const AlphaBeta& x) {
    const double half = 0.5 * x.alpha;
    const double s = 0.5 * std::numbers::sqrt3 * x.beta;
    return {x.alpha, -half + s, -half - s};
}

// Rotation from the stationary alpha-beta frame into the rotor frame.
inline Dq park(const AlphaBeta& x, double theta_e) {
    const double c = std::cos(theta_e);
    const double s = std::sin(theta_e);
    return {c * x.alpha + s * x.beta, -s * x.alpha + c * x.beta};
}

inline AlphaBeta inverse_park(const Dq& x, double theta_e) {
    const double c = std::cos(theta_e);
    const double s = std::sin(theta_e);
    return {c * x.d - s * x.q, s * x.d + c * x.q};
}

inline Abc dq_to_abc(const Dq& x, double theta_e) {
    return inverse_clarke(inverse_park(x, theta_e));
}

inline Dq abc_to_dq(const Abc& x, double theta_e) {
    return park(clarke(x), theta_e);
}

inline double rpm_to_rad_s(double rpm) { return rpm * kTwoPi / 60.0; }
inline double rad_s_to_rpm(double w) { return w * 60.0 / kTwoPi; }

}  // namespace fcsmpcc
