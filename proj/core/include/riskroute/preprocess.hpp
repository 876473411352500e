#pragma once

#include <span>
#include <vector>

#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/risk.hpp"

namespace riskroute {

/// Static preprocessing shared by every solver: the shortest-path tree toward the
/// destination with respect to (worst-case) mean arc costs, the anti-cycling
/// threshold and the first materialized grid row of every node.
struct TreePreprocess {
    /// Successor of each node in the tree; kNoNode for the destination.
    std::vector<NodeId> tree_parent;
    /// Number of ancestors in the tree plus one (the destination has level 1).
    std::vector<int> level;
    /// Minimum expected cost to the destination.
    std::vector<double> cost_to_go;
    /// Below this remaining budget every optimal policy follows the tree.
    double threshold = 0.0;
    /// First grid row materialized for each node.
    std::vector<GridIndex> k_min;
    /// ceil(threshold / delta_t): rows below it have budget strictly under the threshold.
    GridIndex threshold_index = 0;
};

/// Dijkstra toward the destination. Ties between successors are broken by the
/// smallest node id. Throws ErrorCode::unreachable listing nodes without a path.
TreePreprocess shortest_path_tree(const Graph& graph, std::span<const double> arc_means);

/// Anti-cycling threshold of a risk function for the given tree and means.
/// Rejects exp-utility and tabulated risks without a threshold.
double compute_threshold(const RiskFunction& risk, const Graph& graph, const TreePreprocess& tree,
                         std::span<const double> arc_means);

/// k_min_i = floor((T_f - (|V| - level(i) + 1) * max delta_sup) / delta_t).
std::vector<GridIndex> compute_k_min(const Graph& graph, std::span<const int> level, double threshold,
                                     double delta_t);

/// Levels implied by a parent array rooted at the destination.
std::vector<int> tree_levels(std::span<const NodeId> tree_parent, NodeId destination);

/// Nodes in breadth-first order from the destination; children by increasing id.
std::vector<NodeId> tree_bfs_order(std::span<const NodeId> tree_parent, NodeId destination);

/// Tree, threshold and k_min in one pass.
TreePreprocess preprocess(const Graph& graph, std::span<const double> arc_means, const RiskFunction& risk,
                          double delta_t);

}  // namespace riskroute
