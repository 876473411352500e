#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "riskroute/errors.hpp"
#include "riskroute/io.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/policy_eval.hpp"
#include "riskroute/robust_solver.hpp"

using namespace riskroute;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::numeric;
}

const char* kChain = R"({
  "delta_t": "0.1",
  "nodes": ["s", "a", "d"],
  "source": "s",
  "destination": "d",
  "arcs": [
    {"tail": "s", "head": "a", "delta_inf": "0.2", "delta_sup": 0.5,
     "pmf": [{"offset_k": 2, "weight": 0.25}, {"offset_k": 5, "weight": 0.75}]},
    {"tail": "a", "head": "d", "delta_inf": "0.1", "delta_sup": "0.3", "samples_ref": "a-d"}
  ]
})";

GraphDocument chain_doc() {
    std::istringstream in(kChain);
    return parse_graph(in);
}

}  // namespace

TEST_CASE("graph documents") {
    const GraphDocument doc = chain_doc();
    CHECK(doc.delta_t == 0.1);
    CHECK(doc.graph.node_count() == 3);
    CHECK(doc.graph.arcs()[0].delta_sup == 0.5);
    REQUIRE(doc.pmfs[0]);
    CHECK(doc.pmfs[0]->weight(5) == 0.75);
    CHECK(doc.pmfs[0]->mean() == doctest::Approx(0.425));
    CHECK_FALSE(doc.pmfs[1]);
    CHECK(doc.samples_refs[1] == "a-d");
    CHECK(code_of([&] { doc.distributions(); }) == ErrorCode::configuration);

    std::ostringstream out;
    write_graph(out, doc);
    std::istringstream back(out.str());
    const GraphDocument again = parse_graph(back);
    CHECK(again.delta_t == doc.delta_t);
    CHECK(std::ranges::equal(again.graph.labels(), doc.graph.labels()));
    for (std::size_t a = 0; a < 2; ++a) {
        CHECK(again.graph.arcs()[a].delta_inf == doc.graph.arcs()[a].delta_inf);
        CHECK(again.graph.arcs()[a].delta_sup == doc.graph.arcs()[a].delta_sup);
    }
    CHECK(again.pmfs[0]->weights().size() == doc.pmfs[0]->weights().size());
    CHECK(again.samples_refs == doc.samples_refs);
}

TEST_CASE("malformed graph documents") {
    const auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_graph(in);
    };
    CHECK(code_of([&] { parse("{not json"); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse(R"({"nodes": []})"); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse(R"({"delta_t": "x", "nodes": [], "arcs": []})"); }) == ErrorCode::parse);
    std::string off_grid = kChain;
    off_grid.replace(off_grid.find("\"0.2\""), 5, "\"0.25\"");
    CHECK(code_of([&] { parse(off_grid); }) == ErrorCode::configuration);
    std::string escaping = kChain;
    escaping.replace(escaping.find("\"offset_k\": 5"), 13, "\"offset_k\": 6");
    CHECK(code_of([&] { parse(escaping); }) == ErrorCode::configuration);
    std::string unknown = kChain;
    unknown.replace(unknown.find("\"head\": \"a\""), 11, "\"head\": \"q\"");
    CHECK(code_of([&] { parse(unknown); }) == ErrorCode::configuration);
}

TEST_CASE("samples files") {
    const GraphDocument doc = chain_doc();
    std::istringstream in("cost,arc_head,arc_tail\n0.2,a,s\n0.31,d,a\n\n0.5,a,s\n");
    const auto samples = parse_samples(in, doc.graph);
    CHECK(samples[0] == std::vector<double>{0.2, 0.5});
    CHECK(samples[1] == std::vector<double>{0.31});

    std::ostringstream out;
    write_samples(out, doc.graph, samples);
    std::istringstream back(out.str());
    CHECK(parse_samples(back, doc.graph) == samples);

    const auto parse = [&](const std::string& text) {
        std::istringstream s(text);
        return parse_samples(s, doc.graph);
    };
    CHECK(code_of([&] { parse(""); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse("arc_tail,arc_head\ns,a\n"); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse("arc_tail,arc_head,cost\ns,a\n"); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse("arc_tail,arc_head,cost\ns,a,fast\n"); }) == ErrorCode::parse);
    CHECK(code_of([&] { parse("arc_tail,arc_head,cost\ns,a,-1\n"); }) == ErrorCode::configuration);
    CHECK(code_of([&] { parse("arc_tail,arc_head,cost\ns,d,1\n"); }) == ErrorCode::configuration);
}

TEST_CASE("binning") {
    const std::vector<double> near{1.26, 1.34};
    const GridDistribution p = bin_samples(near, 0.1);
    CHECK(p.first_index() == 13);
    CHECK(p.last_index() == 13);
    CHECK(p.weight(13) == 1.0);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> cost(0.5, 4.0);
    std::vector<double> xs(5000);
    for (double& x : xs) x = cost(rng);
    const GridDistribution h = bin_samples(xs, 0.25, 3, 14);
    std::map<GridIndex, double> counts;
    for (double x : xs) counts[std::clamp<GridIndex>(static_cast<GridIndex>(std::floor(x / 0.25 + 0.5)), 3, 14)] += 1;
    for (GridIndex k = 3; k <= 14; ++k) CHECK(h.weight(k) == doctest::Approx(counts[k] / 5000.0));
    CHECK(code_of([] { bin_samples(std::vector<double>{}, 1.0); }) == ErrorCode::configuration);
}

TEST_CASE("policy documents") {
    const Instance inst = loop_instance();
    SUBCASE("nominal") {
        const auto sol = solve_nominal(inst.graph, inst.pmfs, RiskFunction::expected_overrun(), BudgetGrid(1.0, 8.0));
        std::ostringstream out;
        write_policy(out, inst.graph, {8.0, sol.policy, sol.values});
        std::istringstream in(out.str());
        const PolicyDocument doc = parse_policy(in, inst.graph);
        CHECK(doc.total_budget == 8.0);
        CHECK(doc.policy == sol.policy);
        REQUIRE(doc.values);
        CHECK(doc.values->interpolation() == Interpolation::piecewise_constant);
        for (NodeId i = 0; i < 3; ++i) {
            CHECK(std::vector<double>(doc.values->row(i).begin(), doc.values->row(i).end()) ==
                  std::vector<double>(sol.values.row(i).begin(), sol.values.row(i).end()));
        }
    }
    SUBCASE("robust") {
        std::vector<AmbiguitySet> sets;
        for (std::size_t a = 0; a < inst.pmfs.size(); ++a) {
            const Arc& arc = inst.graph.arcs()[a];
            sets.push_back(pinned_set(inst.pmfs[a], static_cast<GridIndex>(arc.delta_inf),
                                      static_cast<GridIndex>(arc.delta_sup)));
        }
        const auto sol = solve_robust(inst.graph, sets, RiskFunction::on_time(), BudgetGrid(1.0, 8.0));
        std::ostringstream out;
        write_policy(out, inst.graph, {8.0, sol.policy, sol.values});
        std::istringstream in(out.str());
        const PolicyDocument doc = parse_policy(in, inst.graph);
        CHECK(doc.policy == sol.policy);
        CHECK(doc.values->interpolation() == Interpolation::piecewise_linear);
        CHECK(doc.values->value(0, 7.5) == sol.values.value(0, 7.5));
    }
    SUBCASE("malformed") {
        std::istringstream bad(R"({"delta_t": 1, "T": 8, "destination": "d", "threshold_index": 0, "nodes": []})");
        CHECK(code_of([&] { parse_policy(bad, inst.graph); }) == ErrorCode::parse);
    }
}

TEST_CASE("statistics documents") {
    const Instance inst = loop_instance();
    std::vector<AmbiguitySet> sets;
    for (const Arc& arc : inst.graph.arcs()) {
        const auto first = static_cast<GridIndex>(arc.delta_inf);
        const auto last = static_cast<GridIndex>(arc.delta_sup);
        const double mid = 0.5 * (arc.delta_inf + arc.delta_sup);
        std::vector<BoundedStatistic> stats{
            {PiecewiseAffineStatistic::identity(arc.delta_inf, arc.delta_sup), {arc.delta_inf, mid}}};
        if (last > first) {
            stats.push_back({PiecewiseAffineStatistic::absolute_deviation(arc.delta_inf, arc.delta_sup, mid, 1.0),
                             {-std::numeric_limits<double>::infinity(), arc.delta_sup - arc.delta_inf}});
        }
        sets.emplace_back(1.0, first, last, std::move(stats));
    }
    std::ostringstream out;
    write_statistics(out, inst.graph, sets);
    std::istringstream in(out.str());
    const auto back = parse_statistics(in, inst.graph, 1.0);
    REQUIRE(back.size() == sets.size());
    for (std::size_t a = 0; a < sets.size(); ++a) {
        REQUIRE(back[a].statistics().size() == sets[a].statistics().size());
        for (std::size_t q = 0; q < sets[a].statistics().size(); ++q) {
            CHECK(back[a].statistics()[q].bound.alpha == sets[a].statistics()[q].bound.alpha);
            CHECK(back[a].statistics()[q].bound.beta == sets[a].statistics()[q].bound.beta);
            for (GridIndex l = sets[a].support_first(); l <= sets[a].support_last(); ++l) {
                CHECK(back[a].statistic_at(q, l) == sets[a].statistic_at(q, l));
            }
        }
    }
    std::istringstream partial(R"({"arcs": []})");
    CHECK(code_of([&] { parse_statistics(partial, inst.graph, 1.0); }) == ErrorCode::configuration);
}

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -2.5}) CHECK(std::stod(format_number(v)) == v);
    CHECK(format_number(0.5) == "0.5");
}
