#pragma once

#include <array>
#include <limits>
#include <stdexcept>
#include <vector>

#include "fcsmpcc/mpcc.hpp"

namespace fcsmpcc {

struct ScoredVector {
    SwitchState vector{};
    double cost = 0.0;
    Dq state{};  // predicted currents one step ahead under this vector
};

// Best and second-best first-step vectors.
struct CandidatePair {
    ScoredVector min1{};
    ScoredVector min2{};
};

// Branch-labelled final-step cost rows; 2 rows for a two-step search,
// 2^(N-1) rows in general. The first half of the rows descends from min1.
struct CostMatrix {
    std::vector<std::array<double, 8>> rows;
};

struct ConventionalResult {
    SwitchState vector{};  // first vector of the best sequence
    double cost = 0.0;     // summed per-step cost of that sequence
    EvalCounter evals{};
};

struct ImResult {
    SwitchState vector{};  // vector applied at (k+1)
    CandidatePair pair{};
    CostMatrix g_sum{};
    double best_cost = 0.0;
    EvalCounter evals{};
};

namespace detail {

struct NodeEval {
    Dq state{};
    double cost = 0.0;
};

inline NodeEval eval_node(const Dq& state, double omega_re, const Dq& u, const CurrentRef& ref,
                          const DiscreteModel& m, const CostConfig& c, EvalCounter& evals) {
    NodeEval n;
    n.state = predict_step(state, omega_re, u, m);
    ++evals.model_evals;
    n.cost = stage_cost(n.state, ref, c);
    ++evals.cost_evals;
    return n;
}

}  // namespace detail

// Exhaustive N-step search over all 8^N vector sequences, scoring each
// sequence by its summed per-step cost. Each distinct tree node is
// evaluated once, so the evaluation count is 8 + 8^2 + ... + 8^N.
inline ConventionalResult conventional_nstep(const Dq& state_k1, double omega_re,
                                             const CurrentRef& ref, int horizon,
                                             const std::array<Dq, 8>& candidate_u,
                                             const VectorSet& vs, const DiscreteModel& m,
                                             const CostConfig& c) {
    if (horizon < 1 || horizon > 3)
        throw std::invalid_argument("conventional_nstep: horizon must be in [1,3]");

    ConventionalResult out;
    double best = std::numeric_limits<double>::infinity();
    int best_first = 0;

    // Depth-first in index order; strict < keeps the lexicographically
    // smallest tying sequence.
    auto dfs = [&](auto&& self, const Dq& state, int depth, double acc, int first) -> void {
        for (int i = 0; i < 8; ++i) {
            const detail::NodeEval n =
                detail::eval_node(state, omega_re, candidate_u[i], ref, m, c, out.evals);
            const double total = acc + n.cost;
            const int f = depth == 1 ? i : first;
            if (depth == horizon) {
                if (total < best) {
                    best = total;
                    best_first = f;
                }
            } else {
                self(self, n.state, depth + 1, total, f);
            }
        }
    };
    dfs(dfs, state_k1, 1, 0.0, 0);

    out.vector = vs[best_first];
    out.cost = best;
    return out;
}

inline ConventionalResult conventional_nstep(const Dq& state_k1, double omega_re,
                                             const CurrentRef& ref, int horizon,
                                             const DiscreteModel& m, const CostConfig& c,
                                             double theta_e = 0.0) {
    return conventional_nstep(state_k1, omega_re, ref, horizon,
                              candidate_voltages(m.machine.vdc, theta_e), vector_set(), m, c);
}

// Picks the two lowest-cost first-step vectors; ties break toward the
// lower index.
inline CandidatePair im_candidates(const std::array<double, 8>& costs,
                                   const std::array<Dq, 8>& states, const VectorSet& vs) {
    int i1 = 0;
    for (int i = 1; i < 8; ++i)
        if (costs[i] < costs[i1]) i1 = i;
    int i2 = i1 == 0 ? 1 : 0;
    for (int i = 0; i < 8; ++i) {
        if (i == i1) continue;
        if (costs[i] < costs[i2]) i2 = i;
    }
    return {{vs[i1], costs[i1], states[i1]}, {vs[i2], costs[i2], states[i2]}};
}

// Branch-limited N-step search: keep only the best and second-best
// first-step vectors, expand two best children per surviving branch at
// each deeper level, and stack the final-level cost rows (min1's branches
// first). The applied vector is min1's if the global minimum of the cost
// matrix lies in the first half of the rows, min2's otherwise; exact
// cross-half ties prefer min1.
//
// By default each row holds the stage cost at the final step only; with
// accumulate_cost the path cost is carried into the rows.
inline ImResult im_n_step(const Dq& state_k1, double omega_re, const CurrentRef& ref,
                          int horizon, const std::array<Dq, 8>& candidate_u,
                          const VectorSet& vs, const DiscreteModel& m, const CostConfig& c,
                          bool accumulate_cost = false) {
    if (horizon < 2 || horizon > 3)
        throw std::invalid_argument("im_n_step: horizon must be 2 or 3");

    ImResult out;

    // First step: all 8 candidates.
    std::array<double, 8> g1{};
    std::array<Dq, 8> s1{};
    for (int i = 0; i < 8; ++i) {
        const detail::NodeEval n =
            detail::eval_node(state_k1, omega_re, candidate_u[i], ref, m, c, out.evals);
        g1[i] = n.cost;
        s1[i] = n.state;
    }
    out.pair = im_candidates(g1, s1, vs);

    struct Branch {
        Dq state{};
        double acc = 0.0;
    };
    std::vector<Branch> branches = {
        {out.pair.min1.state, accumulate_cost ? out.pair.min1.cost : 0.0},
        {out.pair.min2.state, accumulate_cost ? out.pair.min2.cost : 0.0}};

    // Intermediate levels (only level 2 when horizon == 3): each branch
    // spawns its two best children.
    for (int level = 2; level < horizon; ++level) {
        std::vector<Branch> next;
        next.reserve(branches.size() * 2);
        for (const Branch& b : branches) {
            std::array<double, 8> g{};
            std::array<Dq, 8> s{};
            for (int i = 0; i < 8; ++i) {
                const detail::NodeEval n =
                    detail::eval_node(b.state, omega_re, candidate_u[i], ref, m, c, out.evals);
                g[i] = n.cost;
                s[i] = n.state;
            }
            const CandidatePair kids = im_candidates(g, s, vs);
            next.push_back({kids.min1.state, b.acc + (accumulate_cost ? kids.min1.cost : 0.0)});
            next.push_back({kids.min2.state, b.acc + (accumulate_cost ? kids.min2.cost : 0.0)});
        }
        branches = std::move(next);
    }

    // Final level: one 8-entry cost row per surviving branch.
    out.g_sum.rows.reserve(branches.size());
    for (const Branch& b : branches) {
        std::array<double, 8> row{};
        for (int i = 0; i < 8; ++i) {
            const detail::NodeEval n =
                detail::eval_node(b.state, omega_re, candidate_u[i], ref, m, c, out.evals);
            row[i] = b.acc + n.cost;
        }
        out.g_sum.rows.push_back(row);
    }

    // Global argmin in row-major order; strict < gives min1 (first-half)
    // precedence on exact ties.
    std::size_t best_row = 0;
    int best_col = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < out.g_sum.rows.size(); ++r) {
        for (int j = 0; j < 8; ++j) {
            if (out.g_sum.rows[r][j] < best) {
                best = out.g_sum.rows[r][j];
                best_row = r;
                best_col = j;
            }
        }
    }
    (void)best_col;
    out.best_cost = best;
    out.vector =
        best_row < out.g_sum.rows.size() / 2 ? out.pair.min1.vector : out.pair.min2.vector;
    return out;
}

// Two-step specialization (the usual operating horizon).
inline ImResult im_two_step(const Dq& state_k1, double omega_re, const CurrentRef& ref,
                            const std::array<Dq, 8>& candidate_u, const VectorSet& vs,
                            const DiscreteModel& m, const CostConfig& c,
                            bool accumulate_cost = false) {
    return im_n_step(state_k1, omega_re, ref, 2, candidate_u, vs, m, c, accumulate_cost);
}

inline ImResult im_two_step(const Dq& state_k1, double omega_re, const CurrentRef& ref,
                            const DiscreteModel& m, const CostConfig& c, double theta_e = 0.0) {
    return im_two_step(state_k1, omega_re, ref, candidate_voltages(m.machine.vdc, theta_e),
                       vector_set(), m, c);
}

}  // namespace fcsmpcc
