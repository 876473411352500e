#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "riskroute/errors.hpp"
#include "riskroute/io.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/policy_eval.hpp"

using namespace riskroute;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.lambda_fractions = {0.01};
    cfg.replications = 4;
    cfg.budget_points = 5;
    cfg.record_timing = false;
    cfg.preset.replicates = 200;
    cfg.threads = 1;
    return cfg;
}

std::string csv_of(const ExperimentReport& r) {
    std::ostringstream out;
    write_report_csv(out, r);
    return out.str();
}

}  // namespace

TEST_CASE("deterministic chain has no variance") {
    const Graph g({"s", "a", "d"}, {{0, 1, 2.0, 2.0}, {1, 2, 3.0, 3.0}}, 0, 2);
    const std::vector<GridDistribution> pmfs{GridDistribution::point_mass(1.0, 2), GridDistribution::point_mass(1.0, 3)};
    const auto risk = RiskFunction::expected_overrun();
    const auto sol = solve_nominal(g, pmfs, risk, BudgetGrid(1.0, 4.0));
    const auto sim = simulate_policy(g, pmfs, sol.policy, risk, 4.0, 100, 1);
    CHECK(sim.mean == doctest::Approx(-1.0));
    CHECK(sim.std_error == 0.0);
    CHECK(sim.max_arcs == 2);
    CHECK(sim.looping_runs == 0);
}

TEST_CASE("simulation matches the exact evaluation") {
    for (const auto& [inst, budget] : {std::pair{loop_instance(), 8.0}, std::pair{synthetic_two_route_network(), 45.0}}) {
        const auto risk = RiskFunction::on_time();
        const BudgetGrid grid(inst.delta_t, budget);
        const auto sol = solve_nominal(inst.graph, inst.pmfs, risk, grid);
        const ValueTable exact = evaluate_policy_exact(inst.graph, inst.pmfs, sol.policy, risk, grid);
        const auto sim = simulate_policy(inst.graph, inst.pmfs, sol.policy, risk, budget, 100000, 9);
        CHECK(std::abs(sim.mean - exact.value(inst.graph.source(), budget)) <= 3.0 * sim.std_error + 1e-12);
        CHECK(sim.runs == 100000);
    }
}

TEST_CASE("loop instance trajectories revisit the source") {
    const Instance inst = loop_instance();
    const auto risk = RiskFunction::expected_overrun();
    const auto sol = solve_nominal(inst.graph, inst.pmfs, risk, BudgetGrid(1.0, 8.0));
    const auto sim = simulate_policy(inst.graph, inst.pmfs, sol.policy, risk, 8.0, 20000, 3);
    CHECK(sim.looping_runs > 0);
    CHECK(sim.revisits >= sim.looping_runs);
    CHECK(sim.max_arcs >= 3);
}

TEST_CASE("simulation errors") {
    const Instance inst = loop_instance();
    const auto risk = RiskFunction::on_time();
    const auto sol = solve_nominal(inst.graph, inst.pmfs, risk, BudgetGrid(1.0, 8.0));
    try {
        simulate_policy(inst.graph, inst.pmfs, sol.policy, risk, 50.0, 10, 0);
        FAIL("expected an index error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::index);
    }
}

TEST_CASE("worst fraction and seeds") {
    CHECK(worst_fraction_mean({5, 1, 3, 2, 4}) == 1.0);
    std::vector<double> v(40);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
    CHECK(worst_fraction_mean(v) == doctest::Approx(0.5));
    CHECK(worst_fraction_mean(v, 0.5) == doctest::Approx(9.5));
    CHECK(replication_seed(0, 0, 0) != replication_seed(0, 0, 1));
    CHECK(replication_seed(0, 1, 0) != replication_seed(0, 0, 1));
    CHECK(replication_seed(4, 2, 7) == replication_seed(4, 2, 7));
    CHECK(method_from_name("robustmd") == Method::robust_md);
    CHECK(std::string(to_string(Method::let)) == "LET");
    CHECK_THROWS_AS(method_from_name("oracle"), Error);
}

TEST_CASE("instances") {
    const Instance two = synthetic_two_route_network();
    CHECK(two.graph.node_count() == 30);
    CHECK(two.graph.arc_count() == 34);
    const auto samples = draw_samples(two.pmfs, 500, 1);
    REQUIRE(samples.size() == 34);
    for (std::size_t a = 0; a < samples.size(); ++a) {
        double mean = 0.0;
        for (double x : samples[a]) mean += x / 500.0;
        CHECK(mean == doctest::Approx(two.pmfs[a].mean()).epsilon(0.1));
    }
    CHECK(draw_samples(two.pmfs, 10, 1) == draw_samples(two.pmfs, 10, 1));
}

TEST_CASE("experiment") {
    const Instance inst = synthetic_two_route_network();
    const auto samples = draw_samples(inst.pmfs, 1000, 2);

    SUBCASE("reports are reproducible and thread-independent") {
        ExperimentConfig cfg = small_config();
        const auto one = run_experiment(inst.graph, samples, cfg);
        cfg.threads = 4;
        const auto four = run_experiment(inst.graph, samples, cfg);
        CHECK(csv_of(one) == csv_of(four));
        CHECK(one.failures == 0);
        CHECK(one.rows.size() == 4 * 5);
        CHECK(one.budget_low < one.budget_high);
        for (const auto& row : one.rows) {
            CHECK(row.worst5_p <= row.mean_p);
            CHECK(row.mean_p >= 0.0);
            CHECK(row.mean_p <= 1.0 + 1e-12);
            CHECK(row.runtime_ms == 0.0);
            CHECK(row.replications == 4);
        }
        CHECK(csv_of(one).rfind("method,lambda,budget,mean_p,worst5_p,runtime_ms\n", 0) == 0);
    }
    SUBCASE("with all the data the empirical policy is optimal under the truth") {
        ExperimentConfig cfg = small_config();
        cfg.lambda_fractions = {1.0};
        cfg.replications = 1;
        const auto report = run_experiment(inst.graph, samples, cfg);
        std::map<double, double> empirical;
        for (const auto& row : report.rows) {
            if (row.method == Method::empirical) empirical[row.budget] = row.mean_p;
        }
        for (const auto& row : report.rows) CHECK(row.mean_p <= empirical.at(row.budget) + 1e-9);
    }
    SUBCASE("mismatched samples are rejected") {
        const std::vector<std::vector<double>> few(3);
        CHECK_THROWS_AS(run_experiment(inst.graph, few, small_config()), Error);
    }
}
