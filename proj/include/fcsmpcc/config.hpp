#pragma once

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fcsmpcc/sim.hpp"

namespace fcsmpcc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return d;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline long to_long(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long n = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return n;
    } catch (...) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
    }
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

inline Profile to_profile(const std::string& key, const std::string& v) {
    Profile p;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("config key '" + key + "': expected 'time:value' pairs, got '" +
                              item + "'");
        p.points.emplace_back(to_double(key, trim(item.substr(0, colon))),
                              to_double(key, trim(item.substr(colon + 1))));
    }
    if (p.points.empty())
        throw ConfigError("config key '" + key + "': empty profile");
    return p;
}

inline ControllerType to_controller(const std::string& key, const std::string& v) {
    if (v == "PI+MPCC") return ControllerType::pi_mpcc;
    if (v == "PI+ConvN") return ControllerType::pi_conv_n;
    if (v == "PI+IMMPCC") return ControllerType::pi_im_mpcc;
    if (v == "DC+IMMPCC") return ControllerType::dc_im_mpcc;
    throw ConfigError("config key '" + key + "': unknown controller '" + v +
                      "' (expected PI+MPCC, PI+ConvN, PI+IMMPCC or DC+IMMPCC)");
}

inline DelayModel to_delay(const std::string& key, const std::string& v) {
    if (v == "none") return DelayModel::none;
    if (v == "one_step") return DelayModel::one_step;
    throw ConfigError("config key '" + key + "': unknown delay model '" + v +
                      "' (expected none or one_step)");
}

// Applies one dotted key to the scenario; throws on unknown keys.
inline void apply_key(ScenarioConfig& c, const std::string& key, const std::string& value) {
    if (key == "machine.rs_ohm") c.machine.rs = to_double(key, value);
    else if (key == "machine.ld_h") c.machine.ld = to_double(key, value);
    else if (key == "machine.lq_h") c.machine.lq = to_double(key, value);
    else if (key == "machine.psi_f_wb") c.machine.psi_f = to_double(key, value);
    else if (key == "machine.pole_pairs") c.machine.pole_pairs = static_cast<int>(to_long(key, value));
    else if (key == "machine.j_kgm2") c.machine.inertia = to_double(key, value);
    else if (key == "machine.b_nms") c.machine.friction = to_double(key, value);
    else if (key == "machine.vdc_v") c.machine.vdc = to_double(key, value);
    else if (key == "sim.duration_s") c.duration = to_double(key, value);
    else if (key == "sim.ts_us") c.ts = to_double(key, value) * 1e-6;
    else if (key == "sim.substeps") c.substeps = static_cast<int>(to_long(key, value));
    else if (key == "sim.delay_model") c.delay = to_delay(key, value);
    else if (key == "sim.id_ref_a") c.id_ref = to_double(key, value);
    else if (key == "sim.noise_amp_a") c.noise_amp = to_double(key, value);
    else if (key == "sim.seed") c.seed = static_cast<std::uint64_t>(to_long(key, value));
    else if (key == "controller.type") c.controller = to_controller(key, value);
    else if (key == "controller.horizon") c.horizon = static_cast<int>(to_long(key, value));
    else if (key == "controller.i_max_a") c.cost.i_max = to_double(key, value);
    else if (key == "controller.penalty") c.cost.penalty = to_double(key, value);
    else if (key == "controller.accumulate_cost") c.accumulate_cost = to_bool(key, value);
    else if (key == "pi.kp") c.pi.kp = to_double(key, value);
    else if (key == "pi.ki") c.pi.ki = to_double(key, value);
    else if (key == "pi.limit_a") c.pi.limit = to_double(key, value);
    else if (key == "eso.beta1") c.eso_beta1 = to_double(key, value);
    else if (key == "eso.beta2") c.eso_beta2 = to_double(key, value);
    else if (key == "eso.kp") c.eso_kp = to_double(key, value);
    else if (key == "eso.limit_a") c.eso_limit = to_double(key, value);
    else if (key == "eso.j_n_kgm2") c.nominal_inertia = to_double(key, value);
    else if (key == "speed_ref.profile") c.speed_ref_rpm = to_profile(key, value);
    else if (key == "load.profile") c.load_torque = to_profile(key, value);
    else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace detail

// An override as given on the command line: `key=value`, dotted key.
// `controller=` is accepted as shorthand for `controller.type=`.
inline std::pair<std::string, std::string> parse_override(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + s + "': expected key=value");
    std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key == "controller") key = "controller.type";
    if (key.empty() || value.empty())
        throw ConfigError("override '" + s + "': expected key=value");
    return {key, value};
}

// Parses a flat INI-style scenario file. Sections hold typed keys with
// units in the key names; optional `[scenario <label>]` sections define
// variants that override the shared base (keys there are dotted).
inline std::vector<ScenarioConfig> load_scenarios(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);

    std::vector<std::pair<std::string, std::string>> base;  // dotted key, value
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>
        variants;  // label -> dotted overrides
    std::string section;
    std::string variant_label;
    bool in_variant = false;

    std::string line;
    int line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed section");
            std::string name = detail::trim(line.substr(1, line.size() - 2));
            if (name.rfind("scenario", 0) == 0 &&
                (name.size() == 8 || std::isspace(static_cast<unsigned char>(name[8])))) {
                variant_label = detail::trim(name.substr(8));
                if (variant_label.empty())
                    throw ConfigError(path + ":" + std::to_string(line_no) +
                                      ": scenario section needs a label");
                variants.push_back({variant_label, {}});
                in_variant = true;
            } else {
                section = name;
                in_variant = false;
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (in_variant) {
            if (key == "controller") key = "controller.type";
            variants.back().second.emplace_back(key, value);
        } else {
            if (section.empty())
                throw ConfigError(path + ":" + std::to_string(line_no) +
                                  ": key outside any section");
            base.emplace_back(section + "." + key, value);
        }
    }

    const std::string stem = std::filesystem::path(path).stem().string();
    std::vector<ScenarioConfig> out;
    auto build = [&](const std::string& label,
                     const std::vector<std::pair<std::string, std::string>>& extra) {
        ScenarioConfig c;
        c.label = label;
        for (const auto& [k, v] : base) detail::apply_key(c, k, v);
        for (const auto& [k, v] : extra) detail::apply_key(c, k, v);
        for (const auto& [k, v] : overrides) detail::apply_key(c, k, v);
        c.validate();
        return c;
    };
    if (variants.empty()) {
        out.push_back(build(stem, {}));
    } else {
        for (const auto& [label, extra] : variants) out.push_back(build(label, extra));
    }
    return out;
}

}  // namespace fcsmpcc
