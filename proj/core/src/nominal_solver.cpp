#include "riskroute/nominal_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "riskroute/convolution.hpp"
#include "riskroute/errors.hpp"
#include "row_store.hpp"

namespace riskroute {

namespace {

using detail::RowStore;

class ArcEvaluator {
public:
    ArcEvaluator(const RowStore& store, NodeId head, const GridDistribution& pmf)
        : store_(store), head_(head), pmf_(pmf) {}
    virtual ~ArcEvaluator() = default;
    virtual double operator()(GridIndex k) = 0;

protected:
    const RowStore& store_;
    NodeId head_;
    const GridDistribution& pmf_;
};

class PointwiseEvaluator final : public ArcEvaluator {
public:
    using ArcEvaluator::ArcEvaluator;
    double operator()(GridIndex k) override { return convolve_pointwise(store_.window(head_), pmf_, k); }
};

class FftEvaluator final : public ArcEvaluator {
public:
    FftEvaluator(const RowStore& store, NodeId head, const GridDistribution& pmf, GridIndex last)
        : ArcEvaluator(store, head, pmf), last_(last) {}

    double operator()(GridIndex k) override {
        if (k < cache_first_ || k >= cache_first_ + static_cast<GridIndex>(cache_.size())) {
            // largest block whose inputs are all materialized
            const GridIndex avail = store_.ready[head_] + pmf_.min_support() - k + 1;
            const GridIndex count = std::clamp<GridIndex>(avail, 1, last_ - k + 1);
            cache_ = convolve_fft_block(store_.window(head_), pmf_, k, static_cast<std::size_t>(count));
            cache_first_ = k;
        }
        return cache_[static_cast<std::size_t>(k - cache_first_)];
    }

private:
    GridIndex last_;
    GridIndex cache_first_ = 0;
    std::vector<double> cache_;
};

class StreamEvaluator final : public ArcEvaluator {
public:
    StreamEvaluator(const RowStore& store, NodeId head, const GridDistribution& pmf)
        : ArcEvaluator(store, head, pmf), stream_(pmf, store.first[head]) {}

    double operator()(GridIndex k) override {
        while (stream_.next_output() < k) stream_.feed(stream_.next_input(), store_.at(head_, stream_.next_input()));
        if (stream_.next_output() != k) {
            std::ostringstream msg;
            msg << "streaming convolution already passed row " << k;
            throw Error(ErrorCode::state, msg.str());
        }
        const auto out = stream_.feed(stream_.next_input(), store_.at(head_, stream_.next_input()));
        if (!out.complete) throw Error(ErrorCode::index, "streaming convolution queried before its support is fed");
        return out.value;
    }

private:
    StreamConvolver stream_;
};

std::unique_ptr<ArcEvaluator> make_evaluator(ConvolutionEngine engine, const RowStore& store, NodeId head,
                                             const GridDistribution& pmf, GridIndex last) {
    if (engine == ConvolutionEngine::automatic) {
        const GridIndex cells = pmf.max_support() - pmf.min_support() + 1;
        engine = cells < 32 ? ConvolutionEngine::pointwise : ConvolutionEngine::streaming;
    }
    switch (engine) {
        case ConvolutionEngine::fft_block: return std::make_unique<FftEvaluator>(store, head, pmf, last);
        case ConvolutionEngine::streaming: return std::make_unique<StreamEvaluator>(store, head, pmf);
        default: return std::make_unique<PointwiseEvaluator>(store, head, pmf);
    }
}

}  // namespace

NominalSolution solve_nominal(const Graph& graph, std::span<const GridDistribution> distributions,
                              const RiskFunction& risk, const BudgetGrid& grid, const NominalOptions& options) {
    const double dt = grid.delta_t();
    validate_grid(graph, dt);
    validate_distributions(graph, distributions, dt);
    const std::vector<double> means = mean_costs(graph, distributions);

    NominalSolution sol;
    sol.tree = preprocess(graph, means, risk, dt);
    const TreePreprocess& tree = sol.tree;
    const NodeId dest = graph.destination();
    const GridIndex last = grid.last_index();
    const GridIndex threshold = tree.threshold_index;
    const std::size_t n = graph.node_count();

    RowStore store(tree.k_min, last);
    std::vector<std::vector<NodeId>> actions(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<NodeId>(i) != dest) actions[i].assign(store.rows[i].size(), kNoNode);
    }
    for (GridIndex k = tree.k_min[dest]; k <= last; ++k) store.set(dest, k, risk.at_grid(k, dt));

    std::vector<std::unique_ptr<ArcEvaluator>> eval(graph.arc_count());
    for (std::size_t a = 0; a < graph.arc_count(); ++a) {
        const Arc& arc = graph.arcs()[a];
        if (arc.tail == dest) continue;
        eval[a] = make_evaluator(options.engine, store, arc.head, distributions[a], last);
    }

    // rows with budget below the threshold: tree successor only, parents first
    for (NodeId i : tree_bfs_order(tree.tree_parent, dest)) {
        if (i == dest) continue;
        const NodeId j = tree.tree_parent[i];
        const ArcId a = graph.arc_between(i, j);
        for (GridIndex k = tree.k_min[i]; k <= std::min(threshold - 1, last); ++k) {
            store.set(i, k, (*eval[a])(k));
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
                if (static_cast<NodeId>(i) == dest) continue;
                vals.clear();
                for (ArcId a : candidates[i]) vals.push_back((*eval[a])(k));
                const std::size_t pick = detail::pick_best(vals, options.tie_tolerance);
                const auto id = static_cast<NodeId>(i);
                store.set(id, k, vals[pick]);
                actions[i][static_cast<std::size_t>(k - tree.k_min[i])] = graph.arcs()[candidates[i][pick]].head;
            }
        }
    }

    sol.values = ValueTable(dt, Interpolation::piecewise_constant, store.first, std::move(store.rows));
    sol.policy = PolicyTable(dt, dest, threshold, tree.tree_parent, tree.k_min, std::move(actions));
    return sol;
}

std::vector<GridIndex> policy_row_floor(const Graph& graph, const PolicyTable& policy, double delta_t) {
    const std::size_t n = graph.node_count();
    if (policy.node_count() != n) throw Error(ErrorCode::configuration, "policy does not match the graph");
    const NodeId dest = graph.destination();
    const std::vector<int> level = tree_levels(policy.tree_parent(), dest);
    const GridIndex sup = to_grid_units(graph.max_delta_sup(), delta_t);
    const auto depth = [&](std::size_t i) { return (static_cast<GridIndex>(n) - level[i] + 1) * sup; };
    GridIndex base = policy.threshold_index();
    for (std::size_t i = 0; i < n; ++i) {
        const auto id = static_cast<NodeId>(i);
        if (id == dest || policy.row(id).empty()) continue;
        base = std::min(base, policy.first_index(id) + depth(i));
    }
    std::vector<GridIndex> lower(n);
    for (std::size_t i = 0; i < n; ++i) lower[i] = base - depth(i);
    return lower;
}

ValueTable evaluate_policy_exact(const Graph& graph, std::span<const GridDistribution> distributions,
                                 const PolicyTable& policy, const RiskFunction& risk, const BudgetGrid& grid) {
    const double dt = grid.delta_t();
    validate_grid(graph, dt);
    validate_distributions(graph, distributions, dt);
    if (std::abs(policy.delta_t() - dt) > 1e-12 * dt) {
        throw Error(ErrorCode::configuration, "policy was computed on a different delta_t");
    }
    const NodeId dest = graph.destination();
    if (policy.destination() != dest) throw Error(ErrorCode::configuration, "policy has a different destination");
    const GridIndex last = grid.last_index();
    const GridIndex threshold = policy.threshold_index();
    const std::size_t n = graph.node_count();

    RowStore store(policy_row_floor(graph, policy, dt), last);
    for (GridIndex k = store.first[dest]; k <= last; ++k) store.set(dest, k, risk.at_grid(k, dt));

    for (NodeId i : tree_bfs_order(policy.tree_parent(), dest)) {
        if (i == dest) continue;
        const NodeId j = policy.tree_parent()[i];
        const ArcId a = graph.arc_between(i, j);
        for (GridIndex k = store.first[i]; k <= std::min(threshold - 1, last); ++k) {
            store.set(i, k, convolve_pointwise(store.window(j), distributions[a], k));
        }
    }
    for (GridIndex k = threshold; k <= last; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto id = static_cast<NodeId>(i);
            if (id == dest || k < store.first[i]) continue;
            const NodeId j = policy.action(id, k);
            const ArcId a = graph.arc_between(id, j);
            store.set(id, k, convolve_pointwise(store.window(j), distributions[a], k));
        }
    }
    return ValueTable(dt, Interpolation::piecewise_constant, store.first, std::move(store.rows));
}

}  // namespace riskroute
