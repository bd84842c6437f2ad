#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "fcsmpcc/transforms.hpp"

namespace fcsmpcc {

// One of the 8 switch combinations of a two-level three-phase inverter.
// index encodes (Sa Sb Sc) as bits with Sa the MSB; 0 and 7 are the zero
// vectors.
struct SwitchState {
    std::uint8_t sa = 0;
    std::uint8_t sb = 0;
    std::uint8_t sc = 0;
    int index = 0;

    static SwitchState from_index(int i) {
        if (i < 0 || i > 7) throw std::out_of_range("SwitchState: index must be in [0,7]");
        return {static_cast<std::uint8_t>((i >> 2) & 1), static_cast<std::uint8_t>((i >> 1) & 1),
                static_cast<std::uint8_t>(i & 1), i};
    }

    bool is_zero_vector() const { return index == 0 || index == 7; }
    friend bool operator==(const SwitchState&, const SwitchState&) = default;
};

using VectorSet = std::array<SwitchState, 8>;

inline const VectorSet& vector_set() {
    static const VectorSet set = [] {
        VectorSet s{};
        for (int i = 0; i < 8; ++i) s[i] = SwitchState::from_index(i);
        return s;
    }();
    return set;
}

// Line-to-neutral phase voltages for a star-connected machine. Their sum
// is zero for every switch state.
inline Abc phase_voltages(const SwitchState& s, double vdc) {
    if (!(vdc > 0.0)) throw std::invalid_argument("phase_voltages: vdc must be > 0");
    const double a = s.sa, b = s.sb, c = s.sc;
    return {vdc * (2.0 * a - b - c) / 3.0, vdc * (2.0 * b - c - a) / 3.0,
            vdc * (2.0 * c - a - b) / 3.0};
}

// Rotor-frame image of a switch state. Magnitude is (2/3)*vdc for every
// active vector, independent of theta_e.
inline Dq dq_voltage(const SwitchState& s, double vdc, double theta_e) {
    return park(clarke(phase_voltages(s, vdc)), theta_e);
}

}  // namespace fcsmpcc
