#include "riskroute/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double tie_slack(double value) { return 1e-12 * std::max(1.0, std::abs(value)); }

}  // namespace

TreePreprocess shortest_path_tree(const Graph& graph, std::span<const double> arc_means) {
    const std::size_t n = graph.node_count();
    if (arc_means.size() != graph.arc_count()) {
        throw Error(ErrorCode::configuration, "arc mean count does not match the graph");
    }
    for (double m : arc_means) {
        if (!(m > 0.0) || !std::isfinite(m)) throw Error(ErrorCode::configuration, "arc means must be positive");
    }

    std::vector<std::vector<ArcId>> incoming(n);
    for (std::size_t a = 0; a < graph.arc_count(); ++a) {
        const Arc& arc = graph.arcs()[a];
        if (arc.tail == graph.destination()) continue;
        incoming[arc.head].push_back(static_cast<ArcId>(a));
    }

    std::vector<double> dist(n, kInf);
    using Entry = std::pair<double, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    dist[graph.destination()] = 0.0;
    queue.push({0.0, graph.destination()});
    while (!queue.empty()) {
        auto [d, v] = queue.top();
        queue.pop();
        if (d > dist[v]) continue;
        for (ArcId a : incoming[v]) {
            const NodeId u = graph.arcs()[a].tail;
            const double cand = d + arc_means[a];
            if (cand < dist[u]) {
                dist[u] = cand;
                queue.push({cand, u});
            }
        }
    }

    std::vector<NodeId> unreachable;
    for (std::size_t v = 0; v < n; ++v) {
        if (!std::isfinite(dist[v])) unreachable.push_back(static_cast<NodeId>(v));
    }
    if (!unreachable.empty()) {
        std::ostringstream msg;
        msg << "no path to destination '" << graph.label(graph.destination()) << "' from:";
        for (NodeId v : unreachable) msg << ' ' << graph.label(v);
        throw Error(ErrorCode::unreachable, msg.str());
    }

    TreePreprocess tree;
    tree.cost_to_go = dist;
    tree.tree_parent.assign(n, kNoNode);
    for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<NodeId>(v) == graph.destination()) continue;
        // out arcs are sorted by head, so the first arc within slack is the smallest id
        for (ArcId a : graph.out_arcs(static_cast<NodeId>(v))) {
            const NodeId head = graph.arcs()[a].head;
            if (arc_means[a] + dist[head] <= dist[v] + tie_slack(dist[v])) {
                tree.tree_parent[v] = head;
                break;
            }
        }
    }
    tree.level = tree_levels(tree.tree_parent, graph.destination());
    return tree;
}

std::vector<int> tree_levels(std::span<const NodeId> tree_parent, NodeId destination) {
    const std::size_t n = tree_parent.size();
    std::vector<int> level(n, 0);
    level[destination] = 1;
    for (std::size_t v = 0; v < n; ++v) {
        std::vector<NodeId> chain;
        NodeId cur = static_cast<NodeId>(v);
        while (level[cur] == 0) {
            chain.push_back(cur);
            cur = tree_parent[cur];
            if (cur == kNoNode || chain.size() > n) {
                throw Error(ErrorCode::configuration, "tree parent array is not a tree rooted at the destination");
            }
        }
        for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
            level[*it] = level[tree_parent[*it]] + 1;
        }
    }
    return level;
}

std::vector<NodeId> tree_bfs_order(std::span<const NodeId> tree_parent, NodeId destination) {
    std::vector<std::vector<NodeId>> children(tree_parent.size());
    for (std::size_t v = 0; v < tree_parent.size(); ++v) {
        if (tree_parent[v] != kNoNode) children[tree_parent[v]].push_back(static_cast<NodeId>(v));
    }
    std::vector<NodeId> order{destination};
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (NodeId c : children[order[head]]) order.push_back(c);
    }
    return order;
}

double compute_threshold(const RiskFunction& risk, const Graph& graph, const TreePreprocess& tree,
                         std::span<const double> arc_means) {
    switch (risk.kind()) {
        case RiskKind::on_time:
        case RiskKind::expected_overrun:
            return 0.0;
        case RiskKind::exp_utility:
            throw Error(ErrorCode::configuration,
                        "exp-utility risk follows a different anti-cycling tree and is not supported by the solvers");
        case RiskKind::tabulated:
            if (!risk.tabulated_threshold()) {
                throw Error(ErrorCode::configuration, "tabulated risk requires an explicit threshold");
            }
            return *risk.tabulated_threshold();
        case RiskKind::squared_overrun:
            break;
    }

    double min_gap = kInf;
    for (std::size_t a = 0; a < graph.arc_count(); ++a) {
        const Arc& arc = graph.arcs()[a];
        if (arc.tail == graph.destination() || tree.tree_parent[arc.tail] == arc.head) continue;
        const double gap = arc_means[a] + tree.cost_to_go[arc.head] - tree.cost_to_go[arc.tail];
        min_gap = std::min(min_gap, gap);
    }
    if (!std::isfinite(min_gap)) return 0.0;
    const double max_cost = *std::max_element(tree.cost_to_go.begin(), tree.cost_to_go.end());
    if (min_gap <= tie_slack(max_cost)) {
        throw Error(ErrorCode::configuration,
                    "a non-tree arc ties the shortest path; squared-overrun threshold is not finite");
    }
    const double n = static_cast<double>(graph.node_count());
    return -(n * graph.max_delta_sup() * max_cost) / (2.0 * min_gap);
}

std::vector<GridIndex> compute_k_min(const Graph& graph, std::span<const int> level, double threshold,
                                     double delta_t) {
    const GridIndex sup_units = to_grid_units(graph.max_delta_sup(), delta_t);
    const GridIndex threshold_index = floor_to_grid(threshold, delta_t);
    const auto n = static_cast<GridIndex>(graph.node_count());
    std::vector<GridIndex> k_min(graph.node_count());
    for (std::size_t v = 0; v < k_min.size(); ++v) {
        // floor((T_f - c * sup) / dt) == floor(T_f / dt) - c * sup / dt since sup is a grid multiple
        k_min[v] = threshold_index - (n - level[v] + 1) * sup_units;
    }
    return k_min;
}

TreePreprocess preprocess(const Graph& graph, std::span<const double> arc_means, const RiskFunction& risk,
                          double delta_t) {
    TreePreprocess tree = shortest_path_tree(graph, arc_means);
    tree.threshold = compute_threshold(risk, graph, tree, arc_means);
    tree.threshold_index = ceil_to_grid(tree.threshold, delta_t);
    tree.k_min = compute_k_min(graph, tree.level, tree.threshold, delta_t);
    return tree;
}

}  // namespace riskroute
