#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskroute/grid.hpp"

namespace riskroute {

/// Nodes are identified by their position in Graph::labels(). Ties between nodes
/// are always broken in favor of the smaller NodeId.
using NodeId = std::int32_t;
using ArcId = std::int32_t;

inline constexpr NodeId kNoNode = -1;

/// Directed arc with compact cost support [delta_inf, delta_sup] in budget units.
struct Arc {
    NodeId tail = kNoNode;
    NodeId head = kNoNode;
    double delta_inf = 0.0;
    double delta_sup = 0.0;
};

/// Finite directed graph with per-arc cost support bounds, a source and a destination.
/// Immutable after construction.
class Graph {
public:
    Graph(std::vector<std::string> labels, std::vector<Arc> arcs, NodeId source, NodeId destination);

    std::size_t node_count() const noexcept { return labels_.size(); }
    std::size_t arc_count() const noexcept { return arcs_.size(); }
    std::span<const Arc> arcs() const noexcept { return arcs_; }
    const Arc& arc(ArcId id) const { return arcs_.at(static_cast<std::size_t>(id)); }

    /// Outgoing arcs of a node, sorted by head id.
    std::span<const ArcId> out_arcs(NodeId node) const;
    std::optional<ArcId> find_arc(NodeId tail, NodeId head) const;
    ArcId arc_between(NodeId tail, NodeId head) const;

    NodeId source() const noexcept { return source_; }
    NodeId destination() const noexcept { return destination_; }

    const std::string& label(NodeId node) const { return labels_.at(static_cast<std::size_t>(node)); }
    std::span<const std::string> labels() const noexcept { return labels_; }
    std::optional<NodeId> find_node(const std::string& label) const;

    double max_delta_sup() const noexcept { return max_sup_; }
    double min_delta_inf() const noexcept { return min_inf_; }

    /// Copy of this graph with the support bounds of every arc replaced.
    Graph with_bounds(std::span<const double> delta_inf, std::span<const double> delta_sup) const;

private:
    std::vector<std::string> labels_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<ArcId>> out_;
    NodeId source_;
    NodeId destination_;
    double max_sup_ = 0.0;
    double min_inf_ = 0.0;
};

/// Expected cost of every arc under its distribution, in budget units.
std::vector<double> mean_costs(const Graph& graph, std::span<const GridDistribution> distributions);

/// Checks that each distribution lives on the grid delta_t and inside its arc support.
void validate_distributions(const Graph& graph, std::span<const GridDistribution> distributions, double delta_t);

/// Checks delta_t <= every delta_inf and that all support bounds are grid multiples.
void validate_grid(const Graph& graph, double delta_t);

}  // namespace riskroute
