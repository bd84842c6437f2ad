#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fcsmpcc/multistep.hpp"

using namespace fcsmpcc;

namespace {

const MachineParams params{};
const DiscreteModel model = DiscreteModel::from(params, 50e-6);
const CostConfig cost_cfg{};

struct RandomState {
    Dq state;
    double omega_re;
    CurrentRef ref;
    double theta;
};

RandomState draw(std::mt19937& rng) {
    std::uniform_real_distribution<double> cur(-8.0, 8.0);
    std::uniform_real_distribution<double> spd(-600.0, 600.0);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    return {{cur(rng), cur(rng)}, spd(rng), {0.5 * cur(rng), cur(rng)}, ang(rng)};
}

// Independent restricted enumerator: first vector limited to {min1,min2}
// of the single-step costs, all 8 second vectors, scored by the
// second-step stage cost alone (row-A precedence on exact ties).
int restricted_two_branch_optimum(const Dq& state, double omega_re, const CurrentRef& ref,
                                  const std::array<Dq, 8>& cand) {
    std::array<double, 8> g1{};
    std::array<Dq, 8> s1{};
    for (int i = 0; i < 8; ++i) {
        s1[i] = predict_step(state, omega_re, cand[i], model);
        g1[i] = stage_cost(s1[i], ref, cost_cfg);
    }
    std::array<int, 8> order{};
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g1[a] < g1[b]; });
    const int first[2] = {order[0], order[1]};

    int best_first = first[0];
    double best = std::numeric_limits<double>::infinity();
    for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < 8; ++j) {
            const Dq s2 = predict_step(s1[first[f]], omega_re, cand[j], model);
            const double g2 = stage_cost(s2, ref, cost_cfg);
            if (g2 < best) {
                best = g2;
                best_first = first[f];
            }
        }
    }
    return best_first;
}

}  // namespace

TEST_CASE("conventional N=1 reduces to single-step selection") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ConventionalResult c = conventional_nstep(r.state, r.omega_re, r.ref, 1, cand,
                                                        vector_set(), model, cost_cfg);
        const SelectResult s =
            single_step_select(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        CHECK(c.vector.index == s.vector.index);
        CHECK(c.cost == s.cost);
        CHECK(c.evals.model_evals == 8);
    }
}

TEST_CASE("conventional evaluation counts: 72 at N=2, 584 at N=3") {
    std::mt19937 rng(6);
    const RandomState r = draw(rng);
    const auto cand = candidate_voltages(params.vdc, r.theta);
    const ConventionalResult n2 =
        conventional_nstep(r.state, r.omega_re, r.ref, 2, cand, vector_set(), model, cost_cfg);
    CHECK(n2.evals.model_evals == 72);
    CHECK(n2.evals.cost_evals == 72);
    const ConventionalResult n3 =
        conventional_nstep(r.state, r.omega_re, r.ref, 3, cand, vector_set(), model, cost_cfg);
    CHECK(n3.evals.model_evals == 584);
    CHECK(n3.evals.cost_evals == 584);
}

TEST_CASE("conventional rejects unsupported horizons") {
    CHECK_THROWS_AS(conventional_nstep({}, 0.0, {}, 0, model, cost_cfg), std::invalid_argument);
    CHECK_THROWS_AS(conventional_nstep({}, 0.0, {}, 4, model, cost_cfg), std::invalid_argument);
}

TEST_CASE("im_candidates returns the two lowest costs, ties to lower index") {
    const VectorSet& vs = vector_set();
    std::array<Dq, 8> states{};
    SECTION("ascending costs") {
        std::array<double, 8> costs{0, 1, 2, 3, 4, 5, 6, 7};
        const CandidatePair p = im_candidates(costs, states, vs);
        CHECK(p.min1.vector.index == 0);
        CHECK(p.min2.vector.index == 1);
    }
    SECTION("all equal costs") {
        std::array<double, 8> costs{};
        costs.fill(3.5);
        const CandidatePair p = im_candidates(costs, states, vs);
        CHECK(p.min1.vector.index == 0);
        CHECK(p.min2.vector.index == 1);
    }
    SECTION("random costs match a sort-based oracle") {
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> d(0.0, 10.0);
        for (int trial = 0; trial < 500; ++trial) {
            std::array<double, 8> costs{};
            for (double& c : costs) c = d(rng);
            std::array<int, 8> order{};
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return costs[a] < costs[b]; });
            const CandidatePair p = im_candidates(costs, states, vs);
            CHECK(p.min1.vector.index == order[0]);
            CHECK(p.min2.vector.index == order[1]);
            CHECK(p.min1.cost <= p.min2.cost);
        }
    }
}

TEST_CASE("im_two_step evaluates exactly 24 nodes and builds a 2x8 matrix") {
    std::mt19937 rng(10);
    const RandomState r = draw(rng);
    const auto cand = candidate_voltages(params.vdc, r.theta);
    const ImResult im =
        im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
    CHECK(im.evals.model_evals == 24);
    CHECK(im.evals.cost_evals == 24);
    REQUIRE(im.g_sum.rows.size() == 2);
    for (const auto& row : im.g_sum.rows)
        for (double g : row) CHECK(g >= 0.0);
}

TEST_CASE("im_two_step finds an exactly reachable reference in a surviving branch") {
    std::mt19937 rng(12);
    int exercised = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        // First find min1, then place the reference at a state reachable
        // from min1's k+1 state.
        std::array<double, 8> g1{};
        std::array<Dq, 8> s1{};
        for (int i = 0; i < 8; ++i) {
            s1[i] = predict_step(r.state, r.omega_re, cand[i], model);
            g1[i] = stage_cost(s1[i], r.ref, cost_cfg);
        }
        const CandidatePair p = im_candidates(g1, s1, vector_set());
        const Dq target = predict_step(p.min1.state, r.omega_re, cand[3], model);
        if (std::abs(target.d) > cost_cfg.i_max || std::abs(target.q) > cost_cfg.i_max)
            continue;
        // moving the reference re-ranks the first step, so only assert
        // when the branch holding the target survives the cut
        const CurrentRef ref2{target.d, target.q};
        std::array<double, 8> g1b{};
        for (int i = 0; i < 8; ++i) g1b[i] = stage_cost(s1[i], ref2, cost_cfg);
        const CandidatePair p2 = im_candidates(g1b, s1, vector_set());
        const int branch_vec = p.min1.vector.index;
        if (p2.min1.vector.index != branch_vec && p2.min2.vector.index != branch_vec) continue;

        const ImResult im =
            im_two_step(r.state, r.omega_re, ref2, cand, vector_set(), model, cost_cfg);
        ++exercised;
        CHECK(im.best_cost == 0.0);
        CHECK((im.vector.index == p2.min1.vector.index ||
               im.vector.index == p2.min2.vector.index));
        // zero cost in the min1 row wins on precedence
        if (p2.min1.vector.index == branch_vec) CHECK(im.vector.index == branch_vec);
    }
    CHECK(exercised > 10);
}

TEST_CASE("im_two_step agrees with the independent restricted enumerator on 1000 states") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ImResult im =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        const int oracle = restricted_two_branch_optimum(r.state, r.omega_re, r.ref, cand);
        REQUIRE(im.vector.index == oracle);
        const bool in_pair = im.vector.index == im.pair.min1.vector.index ||
                             im.vector.index == im.pair.min2.vector.index;
        CHECK(in_pair);
    }
}

TEST_CASE("im_n_step(2) is identical to im_two_step") {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ImResult a =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        const ImResult b =
            im_n_step(r.state, r.omega_re, r.ref, 2, cand, vector_set(), model, cost_cfg);
        CHECK(a.vector.index == b.vector.index);
        CHECK(a.best_cost == b.best_cost);
        CHECK(a.g_sum.rows == b.g_sum.rows);
    }
}

TEST_CASE("im_n_step(3) evaluates exactly 56 nodes with 4 final rows") {
    std::mt19937 rng(18);
    const RandomState r = draw(rng);
    const auto cand = candidate_voltages(params.vdc, r.theta);
    const ImResult im =
        im_n_step(r.state, r.omega_re, r.ref, 3, cand, vector_set(), model, cost_cfg);
    CHECK(im.evals.model_evals == 56);
    CHECK(im.evals.cost_evals == 56);
    CHECK(im.g_sum.rows.size() == 4);
}

TEST_CASE("first half of g_sum rows descends from min1") {
    // reconstruct the N=3 expansion by hand and compare the first two rows
    std::mt19937 rng(19);
    const RandomState r = draw(rng);
    const auto cand = candidate_voltages(params.vdc, r.theta);
    const ImResult im =
        im_n_step(r.state, r.omega_re, r.ref, 3, cand, vector_set(), model, cost_cfg);

    std::array<double, 8> g1{};
    std::array<Dq, 8> s1{};
    for (int i = 0; i < 8; ++i) {
        s1[i] = predict_step(r.state, r.omega_re, cand[i], model);
        g1[i] = stage_cost(s1[i], r.ref, cost_cfg);
    }
    const CandidatePair p = im_candidates(g1, s1, vector_set());
    // expand min1's branch only
    std::array<double, 8> g2{};
    std::array<Dq, 8> s2{};
    for (int i = 0; i < 8; ++i) {
        s2[i] = predict_step(p.min1.state, r.omega_re, cand[i], model);
        g2[i] = stage_cost(s2[i], r.ref, cost_cfg);
    }
    const CandidatePair kids = im_candidates(g2, s2, vector_set());
    for (int row = 0; row < 2; ++row) {
        const Dq& parent = row == 0 ? kids.min1.state : kids.min2.state;
        for (int j = 0; j < 8; ++j) {
            const Dq s3 = predict_step(parent, r.omega_re, cand[j], model);
            CHECK(im.g_sum.rows[row][j] == stage_cost(s3, r.ref, cost_cfg));
        }
    }
}

TEST_CASE("im_n_step rejects unsupported horizons") {
    CHECK_THROWS_AS(im_n_step({}, 0.0, {}, 1, candidate_voltages(params.vdc, 0.0), vector_set(),
                              model, cost_cfg),
                    std::invalid_argument);
    CHECK_THROWS_AS(im_n_step({}, 0.0, {}, 4, candidate_voltages(params.vdc, 0.0), vector_set(),
                              model, cost_cfg),
                    std::invalid_argument);
}

TEST_CASE("selection is invariant under a strictly increasing transform of g_sum") {
    // argmin location, hence the row half, is preserved by any strictly
    // increasing map applied uniformly to all entries
    std::mt19937 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ImResult im =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        std::size_t best_row = 0;
        int best_col = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t row = 0; row < im.g_sum.rows.size(); ++row)
            for (int j = 0; j < 8; ++j) {
                const double v = std::atan(im.g_sum.rows[row][j]);  // strictly increasing
                if (v < best) {
                    best = v;
                    best_row = row;
                    best_col = j;
                }
            }
        (void)best_col;
        const SwitchState expect =
            best_row == 0 ? im.pair.min1.vector : im.pair.min2.vector;
        CHECK(im.vector.index == expect.index);
    }
}

TEST_CASE("removing the limit penalty cannot change the selection when nothing violates") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> cur(-2.0, 2.0);
    int checked = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ImResult with_limit =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        CostConfig unlimited = cost_cfg;
        unlimited.i_max = 1e12;
        const ImResult without =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, unlimited);
        // applies only when no candidate anywhere in the tree violates
        bool any_violation = false;
        for (const auto& row : with_limit.g_sum.rows)
            for (double g : row) any_violation |= g >= cost_cfg.penalty;
        if (std::abs(with_limit.pair.min1.state.d) > cost_cfg.i_max ||
            std::abs(with_limit.pair.min1.state.q) > cost_cfg.i_max ||
            std::abs(with_limit.pair.min2.state.d) > cost_cfg.i_max ||
            std::abs(with_limit.pair.min2.state.q) > cost_cfg.i_max)
            any_violation = true;
        if (!any_violation) {
            CHECK(with_limit.vector.index == without.vector.index);
            ++checked;
        }
    }
    CHECK(checked > 50);  // the property must actually have been exercised
}

TEST_CASE("im_two_step matches conventional N=2 when the full optimum starts at min1 or min2") {
    std::mt19937 rng(31);
    int agreements = 0, applicable = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const RandomState r = draw(rng);
        const auto cand = candidate_voltages(params.vdc, r.theta);
        const ImResult im =
            im_two_step(r.state, r.omega_re, r.ref, cand, vector_set(), model, cost_cfg);
        const ConventionalResult conv = conventional_nstep(r.state, r.omega_re, r.ref, 2, cand,
                                                           vector_set(), model, cost_cfg);
        // The two searches score sequences differently (final-step cost vs
        // accumulated cost), so only the restricted-first-vector case is a
        // contract; count how often they coincide there.
        if (conv.vector.index == im.pair.min1.vector.index ||
            conv.vector.index == im.pair.min2.vector.index) {
            ++applicable;
            if (im.vector.index == conv.vector.index) ++agreements;
        }
    }
    CHECK(applicable > 300);
    // strong overlap expected; the scoring difference allows occasional splits
    CHECK(agreements > applicable * 8 / 10);
}
