#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fcsmpcc/trace.hpp"
#include "fcsmpcc/transforms.hpp"

namespace fcsmpcc {

struct ThdReport {
    double thd_pct = 0.0;
    double fundamental_hz = 0.0;
    double window_begin = 0.0;
    double window_end = 0.0;
    int harmonic_count = 0;
};

// THD by discrete Fourier decomposition at integer multiples of the
// fundamental, rectangular window over an integer number of fundamental
// periods, all harmonics up to Nyquist.
inline ThdReport thd(std::span<const double> samples, double sample_rate, double fundamental) {
    if (!(sample_rate > 0.0) || !(fundamental > 0.0))
        throw std::invalid_argument("thd: sample_rate and fundamental must be > 0");
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("thd: window too short");
    const double periods = n * fundamental / sample_rate;
    if (std::abs(periods - std::round(periods)) > 0.01 || std::round(periods) < 1.0)
        throw std::invalid_argument(
            "thd: window must span an integer number of fundamental periods");

    const int harmonics = static_cast<int>(std::floor(0.5 * sample_rate / fundamental));
    if (harmonics < 1) throw std::invalid_argument("thd: fundamental above Nyquist");

    double full_scale = 0.0;
    for (double v : samples) full_scale = std::max(full_scale, std::abs(v));

    double harmonic_power = 0.0;
    double c1 = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
        const double w = kTwoPi * h * fundamental / sample_rate;
        std::complex<double> acc{0.0, 0.0};
        for (std::size_t i = 0; i < n; ++i)
            acc += samples[i] * std::complex<double>(std::cos(w * i), -std::sin(w * i));
        const double amplitude = 2.0 * std::abs(acc) / static_cast<double>(n);
        if (h == 1) c1 = amplitude;
        else harmonic_power += amplitude * amplitude;
    }
    if (c1 < 1e-12 * full_scale || c1 == 0.0)
        throw std::invalid_argument("thd: fundamental amplitude below resolvable scale");

    ThdReport r;
    r.thd_pct = 100.0 * std::sqrt(harmonic_power) / c1;
    r.fundamental_hz = fundamental;
    r.harmonic_count = harmonics;
    return r;
}

struct RippleReport {
    double peak_to_peak = 0.0;
    double rms_dev = 0.0;
};

// Peak-to-peak excursion and RMS deviation about the window mean.
inline RippleReport ripple(std::span<const double> series) {
    if (series.empty()) throw std::invalid_argument("ripple: empty window");
    const double mean =
        std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    double lo = series[0], hi = series[0], sq = 0.0;
    for (double v : series) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sq += (v - mean) * (v - mean);
    }
    return {hi - lo, std::sqrt(sq / static_cast<double>(series.size()))};
}

struct StepMetrics {
    double e_max = 0.0;  // signed peak deviation after the disturbance
    double t_c = 0.0;    // time to enter and hold the tolerance band [s]
    bool recovered = true;
};

// Load-step response indicators. e_max is the signed extremum of
// (signal - ref) after t_disturb; t_c is the time from t_disturb until the
// error enters and remains within +/- band_fraction * |ref| for the rest
// of the window.
inline StepMetrics step_metrics(std::span<const double> time, std::span<const double> signal,
                                std::span<const double> ref, double t_disturb,
                                double band_fraction = 0.01) {
    if (time.size() != signal.size() || time.size() != ref.size() || time.empty())
        throw std::invalid_argument("step_metrics: mismatched or empty series");
    if (t_disturb < time.front() || t_disturb > time.back())
        throw std::invalid_argument("step_metrics: t_disturb outside the trace");

    std::size_t start = 0;
    while (start < time.size() && time[start] < t_disturb) ++start;

    StepMetrics m;
    double worst = 0.0;
    std::size_t last_violation = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = start; i < time.size(); ++i) {
        const double e = signal[i] - ref[i];
        if (std::abs(e) > std::abs(worst)) worst = e;
        if (std::abs(e) > band_fraction * std::abs(ref[i])) last_violation = i;
    }
    m.e_max = worst;
    if (last_violation == std::numeric_limits<std::size_t>::max()) {
        m.t_c = 0.0;
    } else if (last_violation + 1 >= time.size()) {
        m.recovered = false;
        m.t_c = std::numeric_limits<double>::quiet_NaN();
    } else {
        m.t_c = time[last_violation + 1] - t_disturb;
    }
    return m;
}

// ---- Trace-level metric extraction ----------------------------------

inline std::vector<double> column(const Trace& t, double TraceRow::* field, double t0,
                                  double t1) {
    std::vector<double> out;
    for (const TraceRow& r : t.rows)
        if (r.t >= t0 && r.t <= t1) out.push_back(r.*field);
    return out;
}

// Fundamental electrical frequency implied by the mean speed over a window.
inline double fundamental_from_speed(const Trace& t, double t0, double t1) {
    const std::vector<double> rpm = column(t, &TraceRow::omega_rpm, t0, t1);
    if (rpm.empty()) throw std::invalid_argument("fundamental_from_speed: empty window");
    const double mean = std::accumulate(rpm.begin(), rpm.end(), 0.0) / rpm.size();
    return t.pole_pairs * mean / 60.0;
}

struct TraceThd {
    ThdReport ia, ib, ic;
    double average_pct = 0.0;
};

// Per-phase THD over the largest integer-period window that ends at the
// trace end and starts no earlier than window_start.
inline TraceThd trace_thd(const Trace& t, double window_start) {
    if (t.rows.size() < 2) throw std::invalid_argument("trace_thd: trace too short");
    const double fs = 1.0 / t.ts;
    const double end = t.rows.back().t;
    const double f0 = fundamental_from_speed(t, window_start, end);
    if (!(f0 > 0.0)) throw std::invalid_argument("trace_thd: nonpositive fundamental");
    const double span = end - window_start;
    const int periods = static_cast<int>(std::floor(span * f0));
    if (periods < 1)
        throw std::invalid_argument("trace_thd: window shorter than one fundamental period");
    const std::size_t n =
        static_cast<std::size_t>(std::llround(periods * fs / f0));
    if (n + 1 > t.rows.size()) throw std::invalid_argument("trace_thd: window exceeds trace");
    const std::size_t begin = t.rows.size() - n;

    auto slice = [&](double TraceRow::* field) {
        std::vector<double> v;
        v.reserve(n);
        for (std::size_t i = begin; i < t.rows.size(); ++i) v.push_back(t.rows[i].*field);
        return v;
    };
    const std::vector<double> a = slice(&TraceRow::ia);
    const std::vector<double> b = slice(&TraceRow::ib);
    const std::vector<double> c = slice(&TraceRow::ic);

    TraceThd out;
    out.ia = thd(a, fs, f0);
    out.ib = thd(b, fs, f0);
    out.ic = thd(c, fs, f0);
    const double w0 = t.rows[begin].t;
    for (ThdReport* r : {&out.ia, &out.ib, &out.ic}) {
        r->window_begin = w0;
        r->window_end = end;
    }
    out.average_pct = (out.ia.thd_pct + out.ib.thd_pct + out.ic.thd_pct) / 3.0;
    return out;
}

struct TraceRipple {
    RippleReport speed_rpm, torque, phase_a;
};

inline TraceRipple trace_ripple(const Trace& t, double t0, double t1) {
    TraceRipple r;
    r.speed_rpm = ripple(column(t, &TraceRow::omega_rpm, t0, t1));
    r.torque = ripple(column(t, &TraceRow::te, t0, t1));
    r.phase_a = ripple(column(t, &TraceRow::ia, t0, t1));
    return r;
}

struct TraceStep {
    StepMetrics speed;   // against the recorded reference, band of |ref|
    StepMetrics torque;  // against its post-step steady value
};

inline TraceStep trace_step(const Trace& t, double t_disturb, double speed_band = 0.01,
                            double torque_band = 0.02) {
    std::vector<double> time, speed, ref, torque;
    time.reserve(t.rows.size());
    for (const TraceRow& r : t.rows) {
        time.push_back(r.t);
        speed.push_back(r.omega_rpm);
        ref.push_back(r.omega_ref_rpm);
        torque.push_back(r.te);
    }
    TraceStep out;
    out.speed = step_metrics(time, speed, ref, t_disturb, speed_band);

    // Post-step steady torque: mean of the final 20% of the window.
    std::size_t start = 0;
    while (start < time.size() && time[start] < t_disturb) ++start;
    const std::size_t tail = start + (time.size() - start) * 4 / 5;
    double steady = 0.0;
    std::size_t count = 0;
    for (std::size_t i = tail; i < time.size(); ++i, ++count) steady += torque[i];
    if (count == 0) throw std::invalid_argument("trace_step: no samples after t_disturb");
    steady /= static_cast<double>(count);
    const std::vector<double> torque_ref(time.size(), steady);
    out.torque = step_metrics(time, torque, torque_ref, t_disturb, torque_band);
    return out;
}

// ---- Comparison report (mirrors the tabular evaluation layout) -------

struct MetricSpec {
    double thd_window_start = 0.04;   // [s]; also the startup exclusion
    double ripple_window = 0.05;      // final span used for ripple [s]
    std::optional<double> t_disturb;  // enables step metrics when set
    double speed_band = 0.01;
    double torque_band = 0.02;
};

struct TraceMetrics {
    std::string label;
    std::string controller;
    TraceThd thd;
    TraceRipple ripple;
    std::optional<TraceStep> step;
};

struct CompareReport {
    std::vector<TraceMetrics> entries;
    // Relative reductions (percent) of each non-baseline entry's average
    // THD versus the first entry.
    std::vector<double> thd_reduction_pct;
};

inline CompareReport compare_report(const std::vector<Trace>& traces, const MetricSpec& spec) {
    if (traces.size() < 2) throw std::invalid_argument("compare_report: need >= 2 traces");
    for (std::size_t i = 1; i < traces.size(); ++i) {
        if (std::abs(traces[i].ts - traces[0].ts) > 1e-15 ||
            traces[i].rows.size() != traces[0].rows.size())
            throw std::invalid_argument("compare_report: traces must share Ts and time grid");
    }

    CompareReport rep;
    for (const Trace& t : traces) {
        TraceMetrics m;
        m.label = t.label;
        m.controller = t.controller;
        m.thd = trace_thd(t, spec.thd_window_start);
        const double end = t.rows.back().t;
        m.ripple = trace_ripple(t, end - spec.ripple_window, end);
        if (spec.t_disturb)
            m.step = trace_step(t, *spec.t_disturb, spec.speed_band, spec.torque_band);
        rep.entries.push_back(std::move(m));
    }
    const double base = rep.entries.front().thd.average_pct;
    for (const TraceMetrics& m : rep.entries)
        rep.thd_reduction_pct.push_back(base > 0.0 ? 100.0 * (base - m.thd.average_pct) / base
                                                   : 0.0);
    return rep;
}

inline std::string format_report_text(const CompareReport& rep) {
    char buf[256];
    std::string out;
    out += "label              controller   THD_ia%   THD_ib%   THD_ic%   THD_avg%  dTHD%"
           "    pp_speed   pp_torque  pp_ia\n";
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        const TraceMetrics& m = rep.entries[i];
        std::snprintf(buf, sizeof buf,
                      "%-18s %-12s %-9.4f %-9.4f %-9.4f %-9.4f %-8.2f %-10.5g %-10.5g %-10.5g\n",
                      m.label.c_str(), m.controller.c_str(), m.thd.ia.thd_pct, m.thd.ib.thd_pct,
                      m.thd.ic.thd_pct, m.thd.average_pct, rep.thd_reduction_pct[i],
                      m.ripple.speed_rpm.peak_to_peak, m.ripple.torque.peak_to_peak,
                      m.ripple.phase_a.peak_to_peak);
        out += buf;
    }
    bool any_step = false;
    for (const TraceMetrics& m : rep.entries) any_step |= m.step.has_value();
    if (any_step) {
        out += "\nlabel              e_max_rpm  t_c_speed_s  t_c_torque_s\n";
        for (const TraceMetrics& m : rep.entries) {
            if (!m.step) continue;
            std::snprintf(buf, sizeof buf, "%-18s %-10.4g %-12.5g %-12.5g\n", m.label.c_str(),
                          m.step->speed.e_max, m.step->speed.t_c, m.step->torque.t_c);
            out += buf;
        }
    }
    return out;
}

}  // namespace fcsmpcc
