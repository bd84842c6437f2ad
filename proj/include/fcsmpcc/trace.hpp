#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fcsmpcc {

// One control-period sample of the closed loop.
struct TraceRow {
    double t = 0.0;
    double id = 0.0;
    double iq = 0.0;
    double ia = 0.0;
    double ib = 0.0;
    double ic = 0.0;
    double omega_rpm = 0.0;
    double omega_ref_rpm = 0.0;
    double te = 0.0;
    double t_load = 0.0;
    int vector_index = 0;
    long model_evals = 0;
    long cost_evals = 0;
    double z1 = 0.0;
    double z2 = 0.0;
};

// Time-indexed record of a closed-loop run; the substrate of all
// analysis. Serialized as CSV with a '#'-prefixed metadata header.
struct Trace {
    std::string label;
    std::string controller;
    std::string config_hash;
    double ts = 0.0;
    int pole_pairs = 0;
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows;

    static constexpr const char* kColumns =
        "t,id,iq,ia,ib,ic,omega_rpm,omega_ref_rpm,te,t_load,"
        "vector_index,model_evals,cost_evals,z1,z2";

    std::string to_csv() const {
        std::string out;
        out.reserve(rows.size() * 160 + 256);
        char buf[512];
        auto meta = [&](const char* key, const std::string& value) {
            out += "# ";
            out += key;
            out += " = ";
            out += value;
            out += '\n';
        };
        meta("label", label);
        meta("controller", controller);
        meta("config_hash", config_hash);
        std::snprintf(buf, sizeof buf, "%.9g", ts);
        meta("ts", buf);
        meta("pole_pairs", std::to_string(pole_pairs));
        meta("seed", std::to_string(seed));
        out += kColumns;
        out += '\n';
        for (const TraceRow& r : rows) {
            std::snprintf(buf, sizeof buf,
                          "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,"
                          "%d,%ld,%ld,%.9g,%.9g\n",
                          r.t, r.id, r.iq, r.ia, r.ib, r.ic, r.omega_rpm, r.omega_ref_rpm,
                          r.te, r.t_load, r.vector_index, r.model_evals, r.cost_evals, r.z1,
                          r.z2);
            out += buf;
        }
        return out;
    }

    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open trace file for writing: " + path);
        f << to_csv();
    }

    static Trace from_csv(std::istream& in) {
        Trace t;
        std::string line;
        bool header_seen = false;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                const auto eq = line.find('=');
                if (eq == std::string::npos) continue;
                std::string key = line.substr(1, eq - 1);
                std::string value = line.substr(eq + 1);
                auto trim = [](std::string& s) {
                    const auto b = s.find_first_not_of(" \t");
                    const auto e = s.find_last_not_of(" \t\r");
                    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
                };
                trim(key);
                trim(value);
                if (key == "label") t.label = value;
                else if (key == "controller") t.controller = value;
                else if (key == "config_hash") t.config_hash = value;
                else if (key == "ts") t.ts = std::stod(value);
                else if (key == "pole_pairs") t.pole_pairs = std::stoi(value);
                else if (key == "seed") t.seed = std::stoull(value);
                continue;
            }
            if (!header_seen) {
                if (line.rfind("t,", 0) != 0)
                    throw std::runtime_error("trace: missing column header");
                header_seen = true;
                continue;
            }
            TraceRow r;
            const int n = std::sscanf(line.c_str(),
                                      "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,"
                                      "%d,%ld,%ld,%lf,%lf",
                                      &r.t, &r.id, &r.iq, &r.ia, &r.ib, &r.ic, &r.omega_rpm,
                                      &r.omega_ref_rpm, &r.te, &r.t_load, &r.vector_index,
                                      &r.model_evals, &r.cost_evals, &r.z1, &r.z2);
            if (n != 15) throw std::runtime_error("trace: malformed row: " + line);
            t.rows.push_back(r);
        }
        if (!header_seen) throw std::runtime_error("trace: empty or headerless file");
        return t;
    }

    static Trace load(const std::string& path) {
        std::ifstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open trace file: " + path);
        return from_csv(f);
    }
};

}  // namespace fcsmpcc
