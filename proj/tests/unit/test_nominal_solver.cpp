#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "riskroute/convolution.hpp"
#include "riskroute/errors.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/policy_eval.hpp"

using namespace riskroute;
using riskroute::testing::ExhaustiveDp;

namespace {

double max_table_gap(const ValueTable& a, const ValueTable& b) {
    double gap = 0.0;
    for (std::size_t i = 0; i < a.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        REQUIRE(a.first_index(id) == b.first_index(id));
        REQUIRE(a.last_index(id) == b.last_index(id));
        for (GridIndex k = a.first_index(id); k <= a.last_index(id); ++k) {
            gap = std::max(gap, std::abs(a.at(id, k) - b.at(id, k)));
        }
    }
    return gap;
}

// Largest violation of the Bellman equation over every stored (node, row) pair.
double bellman_residual(const Graph& g, const std::vector<GridDistribution>& pmfs, const NominalSolution& sol,
                        const RiskFunction& risk, double dt) {
    double worst = 0.0;
    const NodeId dest = g.destination();
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        const auto row = sol.values.row(id);
        const GridIndex first = sol.values.first_index(id);
        for (GridIndex k = first; k <= sol.values.last_index(id); ++k) {
            double expected = -std::numeric_limits<double>::infinity();
            if (id == dest) {
                expected = risk.at_grid(k, dt);
            } else {
                for (ArcId a : g.out_arcs(id)) {
                    const NodeId j = g.arc(a).head;
                    if (k < sol.tree.threshold_index && j != sol.tree.tree_parent[i]) continue;
                    const ValueTable& v = sol.values;
                    const GridWindow w{v.first_index(j), v.row(j)};
                    if (k - pmfs[a].max_support() < w.first) continue;
                    expected = std::max(expected, convolve_pointwise(w, pmfs[a], k));
                }
                if (!std::isfinite(expected)) continue;
            }
            worst = std::max(worst, std::abs(row[static_cast<std::size_t>(k - first)] - expected));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("single deterministic arc") {
    const Graph g({"s", "d"}, {{0, 1, 3.0, 3.0}}, 0, 1);
    const std::vector<GridDistribution> pmfs{GridDistribution::point_mass(1.0, 3)};
    const auto sol = solve_nominal(g, pmfs, RiskFunction::on_time(), BudgetGrid(1.0, 10.0));
    for (GridIndex k = 0; k <= 10; ++k) {
        CHECK(sol.values.at(0, k) == (k >= 3 ? 1.0 : 0.0));
        CHECK(sol.policy.action(0, k) == 1);
    }
    CHECK(sol.values.value(0, 2.5) == 0.0);
}

TEST_CASE("hopeless budget still yields a policy") {
    const Graph g({"s", "d"}, {{0, 1, 3.0, 5.0}}, 0, 1);
    const std::vector<GridDistribution> pmfs{GridDistribution(1.0, 3, {0.5, 0.25, 0.25})};
    const auto sol = solve_nominal(g, pmfs, RiskFunction::on_time(), BudgetGrid(1.0, 2.0));
    CHECK(sol.values.value(0, 2.0) == 0.0);
    CHECK(sol.policy.action(0, 2) == 1);
}

TEST_CASE("loop instance returns to the source") {
    const Instance inst = loop_instance();
    const RiskFunction risk = RiskFunction::expected_overrun();
    const auto sol = solve_nominal(inst.graph, inst.pmfs, risk, BudgetGrid(1.0, 8.0));
    const NodeId s = 0;
    const NodeId a = 1;
    const NodeId d = 2;
    CHECK(sol.policy.action(s, 8) == a);
    // after drawing c_sa = 5 from 8, three units are left at a
    CHECK(sol.policy.action(a, 3) == s);
    CHECK(sol.policy.action(a, 7) == d);

    ExhaustiveDp oracle(inst.graph, inst.pmfs, risk, 1.0, sol.tree.threshold_index);
    CHECK(oracle.value(s, 8) == doctest::Approx(sol.values.at(s, 8)).epsilon(1e-12));
    CHECK(oracle.optimal_actions(a, 3) == std::vector<NodeId>{s});
    // via a the expected overrun is 0.01, direct it is 0.1
    CHECK(sol.values.at(s, 8) == doctest::Approx(-0.01).epsilon(1e-12));
    CHECK(oracle.expectation(inst.graph.arc_between(s, d), d, 8) == doctest::Approx(-0.1));
}

TEST_CASE("solver tables equal exhaustive backward induction") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<std::size_t> nodes(2, 6);
        auto net = riskroute::testing::random_network(rng, nodes(rng), 10, 8);
        const RiskFunction risk = trial % 2 ? RiskFunction::on_time() : RiskFunction::expected_overrun();
        const auto sol = solve_nominal(net.graph, net.pmfs, risk, BudgetGrid(1.0, 40.0));
        ExhaustiveDp oracle(net.graph, net.pmfs, risk, 1.0, sol.tree.threshold_index);
        for (std::size_t i = 0; i < net.graph.node_count(); ++i) {
            const auto id = static_cast<NodeId>(i);
            for (GridIndex k = sol.values.first_index(id); k <= 40; ++k) {
                CHECK(std::abs(sol.values.at(id, k) - oracle.value(id, k)) < 1e-9);
                if (id == net.graph.destination()) continue;
                const auto best = oracle.optimal_actions(id, k, 1e-9);
                CHECK(std::find(best.begin(), best.end(), sol.policy.action(id, k)) != best.end());
            }
        }
        CHECK(bellman_residual(net.graph, net.pmfs, sol, risk, 1.0) < 1e-9);
    }
}

TEST_CASE("convolution engines give the same tables") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 10; ++trial) {
        auto net = riskroute::testing::random_network(rng, 5, 9, 40, 0.5);
        const RiskFunction risk = RiskFunction::expected_overrun();
        const BudgetGrid grid(0.5, 60.0);
        NominalOptions opt;
        opt.engine = ConvolutionEngine::pointwise;
        const auto base = solve_nominal(net.graph, net.pmfs, risk, grid, opt);
        for (auto engine : {ConvolutionEngine::fft_block, ConvolutionEngine::streaming, ConvolutionEngine::automatic}) {
            opt.engine = engine;
            const auto other = solve_nominal(net.graph, net.pmfs, risk, grid, opt);
            CHECK(max_table_gap(base.values, other.values) < 1e-9);
        }
    }
}

TEST_CASE("on-time values are probabilities nondecreasing in the budget") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        auto net = riskroute::testing::random_network(rng, 6, 10, 6);
        const auto sol = solve_nominal(net.graph, net.pmfs, RiskFunction::on_time(), BudgetGrid(1.0, 30.0));
        for (std::size_t i = 0; i < net.graph.node_count(); ++i) {
            const auto row = sol.values.row(static_cast<NodeId>(i));
            for (std::size_t t = 0; t < row.size(); ++t) {
                CHECK(row[t] >= 0.0);
                CHECK(row[t] <= 1.0 + 1e-12);
                if (t > 0) CHECK(row[t] >= row[t - 1] - 1e-12);
            }
        }
    }
}

TEST_CASE("rows below the threshold follow the tree") {
    const Instance inst = loop_instance();
    const auto sol = solve_nominal(inst.graph, inst.pmfs, RiskFunction::squared_overrun(), BudgetGrid(1.0, 8.0));
    CHECK(sol.tree.threshold < 0.0);
    for (NodeId i : {0, 1}) {
        for (GridIndex k = sol.policy.first_index(i); k < sol.tree.threshold_index; ++k) {
            CHECK(sol.policy.action(i, k) == sol.tree.tree_parent[i]);
        }
    }
}

TEST_CASE("fixed-policy evaluation") {
    SUBCASE("optimal policy reproduces the solver's table") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 10; ++trial) {
            auto net = riskroute::testing::random_network(rng, 5, 8, 5);
            const RiskFunction risk = RiskFunction::on_time();
            const BudgetGrid grid(1.0, 25.0);
            const auto sol = solve_nominal(net.graph, net.pmfs, risk, grid);
            const ValueTable v = evaluate_policy_exact(net.graph, net.pmfs, sol.policy, risk, grid);
            for (std::size_t i = 0; i < net.graph.node_count(); ++i) {
                const auto id = static_cast<NodeId>(i);
                for (GridIndex k = sol.values.first_index(id); k <= 25; ++k) {
                    CHECK(v.at(id, k) == doctest::Approx(sol.values.at(id, k)).epsilon(1e-12));
                }
            }
        }
    }
    SUBCASE("never looping back is strictly worse on the loop instance") {
        const Instance inst = loop_instance();
        const RiskFunction risk = RiskFunction::expected_overrun();
        const BudgetGrid grid(1.0, 8.0);
        const auto sol = solve_nominal(inst.graph, inst.pmfs, risk, grid);
        std::vector<GridIndex> first;
        std::vector<std::vector<NodeId>> actions;
        for (NodeId i = 0; i < 3; ++i) {
            first.push_back(sol.policy.first_index(i));
            auto row = sol.policy.row(i);
            actions.emplace_back(row.begin(), row.end());
        }
        for (NodeId& j : actions[1]) j = 2;
        const PolicyTable no_loop(1.0, 2, sol.policy.threshold_index(),
                                  std::vector<NodeId>(sol.policy.tree_parent().begin(), sol.policy.tree_parent().end()),
                                  first, actions);
        const ValueTable v = evaluate_policy_exact(inst.graph, inst.pmfs, no_loop, risk, grid);
        CHECK(v.at(0, 8) < sol.values.at(0, 8) - 1e-6);
    }
    SUBCASE("policy on another grid is rejected") {
        const Instance inst = loop_instance();
        const auto sol = solve_nominal(inst.graph, inst.pmfs, RiskFunction::on_time(), BudgetGrid(1.0, 8.0));
        const std::vector<GridDistribution> pmfs = inst.pmfs;
        CHECK_THROWS_AS(evaluate_policy_exact(inst.graph, pmfs, sol.policy, RiskFunction::on_time(),
                                              BudgetGrid(0.5, 8.0)),
                        Error);
    }
}

TEST_CASE("invalid inputs") {
    const Graph g({"s", "d"}, {{0, 1, 1.0, 2.0}}, 0, 1);
    const std::vector<GridDistribution> pmfs{GridDistribution(1.0, 1, {0.5, 0.5})};
    CHECK_THROWS_AS(solve_nominal(g, pmfs, RiskFunction::on_time(), BudgetGrid(2.0, 4.0)), Error);
    CHECK_THROWS_AS(solve_nominal(g, pmfs, RiskFunction::exp_utility(), BudgetGrid(1.0, 4.0)), Error);
    CHECK_THROWS_AS(solve_nominal(g, {}, RiskFunction::on_time(), BudgetGrid(1.0, 4.0)), Error);
    CHECK_THROWS_AS(BudgetGrid(1.0, -1.0), Error);
}
