#include "riskroute/robust_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "riskroute/errors.hpp"
#include "riskroute/nominal_solver.hpp"
#include "row_store.hpp"

namespace riskroute {

namespace {

using detail::RowStore;

// Inner problems of every arc, each queried at increasing rows.
class ArcInnerProblems {
public:
    ArcInnerProblems(const Graph& graph, std::span<const AmbiguitySet> sets, const RobustOptions& options)
        : graph_(graph) {
        problems_.reserve(sets.size());
        for (const AmbiguitySet& set : sets) problems_.emplace_back(set, options.method, options.inner);
    }

    double operator()(ArcId a, GridIndex k, const RowStore& store) {
        const Arc& arc = graph_.arcs()[a];
        try {
            return problems_[a].evaluate(k, store.window(arc.head));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::nonconvergence) throw;
            std::ostringstream msg;
            msg << "arc " << graph_.label(arc.tail) << "->" << graph_.label(arc.head) << " at row " << k << ": "
                << e.what();
            throw Error(ErrorCode::nonconvergence, msg.str());
        }
    }

    std::size_t iterations() const {
        std::size_t total = 0;
        for (const auto& p : problems_) total += p.total_iterations();
        return total;
    }

private:
    const Graph& graph_;
    std::vector<InnerProblem> problems_;
};

std::vector<double> worst_case_means(const Graph& graph, std::span<const AmbiguitySet> sets) {
    std::vector<double> means(graph.arc_count());
    for (std::size_t a = 0; a < means.size(); ++a) means[a] = worst_case_mean(sets[a]);
    return means;
}

}  // namespace

double worst_case_mean(const AmbiguitySet& set) {
    std::vector<double> cost(set.support_size());
    for (std::size_t j = 0; j < cost.size(); ++j) {
        cost[j] = -static_cast<double>(set.support_first() + static_cast<GridIndex>(j)) * set.delta_t();
    }
    const GridLinearProgram lp = build_grid_program(set, cost);
    const LpResult res = solve_lp(lp.a, lp.b, lp.c);
    if (res.status != LpStatus::optimal) throw Error(ErrorCode::infeasible, "ambiguity set is empty");
    const double lo = static_cast<double>(set.support_first()) * set.delta_t();
    const double hi = static_cast<double>(set.support_last()) * set.delta_t();
    return std::clamp(-res.objective, lo, hi);
}

void validate_ambiguity(const Graph& graph, std::span<const AmbiguitySet> sets, double delta_t) {
    if (sets.size() != graph.arc_count()) {
        std::ostringstream msg;
        msg << "expected one ambiguity set per arc (" << graph.arc_count() << "), got " << sets.size();
        throw Error(ErrorCode::configuration, msg.str());
    }
    for (std::size_t a = 0; a < sets.size(); ++a) {
        const Arc& arc = graph.arcs()[a];
        const AmbiguitySet& set = sets[a];
        if (std::abs(set.delta_t() - delta_t) > 1e-12 * delta_t || set.support_first() != to_grid_units(arc.delta_inf, delta_t) ||
            set.support_last() != to_grid_units(arc.delta_sup, delta_t)) {
            std::ostringstream msg;
            msg << "ambiguity set of arc " << graph.label(arc.tail) << "->" << graph.label(arc.head)
                << " does not span the arc support on this grid";
            throw Error(ErrorCode::configuration, msg.str());
        }
    }
}

RobustSolution solve_robust(const Graph& graph, std::span<const AmbiguitySet> sets, const RiskFunction& risk,
                            const BudgetGrid& grid, const RobustOptions& options) {
    const double dt = grid.delta_t();
    validate_grid(graph, dt);
    validate_ambiguity(graph, sets, dt);

    RobustSolution sol;
    sol.worst_case_means = worst_case_means(graph, sets);
    sol.tree = preprocess(graph, sol.worst_case_means, risk, dt);
    const TreePreprocess& tree = sol.tree;
    const NodeId dest = graph.destination();
    const GridIndex last = grid.ceil_index();
    const GridIndex threshold = tree.threshold_index;
    const std::size_t n = graph.node_count();

    RowStore store(tree.k_min, last);
    std::vector<std::vector<NodeId>> actions(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<NodeId>(i) != dest) actions[i].assign(store.rows[i].size(), kNoNode);
    }
    for (GridIndex k = tree.k_min[dest]; k <= last; ++k) store.set(dest, k, risk.at_grid(k, dt));

    ArcInnerProblems inner(graph, sets, options);
    for (NodeId i : tree_bfs_order(tree.tree_parent, dest)) {
        if (i == dest) continue;
        const NodeId j = tree.tree_parent[i];
        const ArcId a = graph.arc_between(i, j);
        for (GridIndex k = tree.k_min[i]; k <= std::min(threshold - 1, last); ++k) {
            store.set(i, k, inner(a, k, store));
            actions[i][static_cast<std::size_t>(k - tree.k_min[i])] = j;
        }
    }

    const auto candidates = detail::ordered_candidates(graph, tree.cost_to_go);
    const GridIndex block = detail::block_length(graph, dt);
    std::vector<double> vals;
    for (GridIndex start = threshold; start <= last; start += block) {
        const GridIndex stop = std::min(start + block - 1, last);
        for (GridIndex k = start; k <= stop; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = static_cast<NodeId>(i);
                if (id == dest) continue;
                vals.clear();
                for (ArcId a : candidates[i]) vals.push_back(inner(a, k, store));
                const std::size_t pick = detail::pick_best(vals, options.tie_tolerance);
                store.set(id, k, vals[pick]);
                actions[i][static_cast<std::size_t>(k - tree.k_min[i])] = graph.arcs()[candidates[i][pick]].head;
            }
        }
    }

    sol.inner_iterations = inner.iterations();
    sol.values = ValueTable(dt, Interpolation::piecewise_linear, store.first, std::move(store.rows));
    sol.policy = PolicyTable(dt, dest, threshold, tree.tree_parent, tree.k_min, std::move(actions));
    return sol;
}

ValueTable robust_policy_guarantee(const Graph& graph, std::span<const AmbiguitySet> sets, const PolicyTable& policy,
                                   const RiskFunction& risk, const BudgetGrid& grid, const RobustOptions& options) {
    const double dt = grid.delta_t();
    validate_grid(graph, dt);
    validate_ambiguity(graph, sets, dt);
    if (std::abs(policy.delta_t() - dt) > 1e-12 * dt) {
        throw Error(ErrorCode::configuration, "policy was computed on a different delta_t");
    }
    const NodeId dest = graph.destination();
    if (policy.destination() != dest) throw Error(ErrorCode::configuration, "policy has a different destination");
    const GridIndex last = grid.ceil_index();
    const GridIndex threshold = policy.threshold_index();
    const std::size_t n = graph.node_count();

    RowStore store(policy_row_floor(graph, policy, dt), last);
    for (GridIndex k = store.first[dest]; k <= last; ++k) store.set(dest, k, risk.at_grid(k, dt));

    ArcInnerProblems inner(graph, sets, options);
    for (NodeId i : tree_bfs_order(policy.tree_parent(), dest)) {
        if (i == dest) continue;
        const ArcId a = graph.arc_between(i, policy.tree_parent()[i]);
        for (GridIndex k = store.first[i]; k <= std::min(threshold - 1, last); ++k) store.set(i, k, inner(a, k, store));
    }
    for (GridIndex k = threshold; k <= last; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            if (id == dest || k < store.first[i]) continue;
            const ArcId a = graph.arc_between(id, policy.action(id, k));
            store.set(id, k, inner(a, k, store));
        }
    }
    return ValueTable(dt, Interpolation::piecewise_linear, store.first, std::move(store.rows));
}

}  // namespace riskroute
