#pragma once

#include <span>
#include <vector>

#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"

namespace riskroute {

/// How a value table is read between grid points.
enum class Interpolation {
    piecewise_constant,  ///< u(t) = u(floor(t / delta_t) * delta_t)
    piecewise_linear,    ///< linear blend of the two neighbouring grid values
};

/// u_i(k * delta_t) for k in [first_index(i), last_index(i)], per node.
class ValueTable {
public:
    ValueTable() = default;
    ValueTable(double delta_t, Interpolation mode, std::vector<GridIndex> first, std::vector<std::vector<double>> rows);

    double delta_t() const noexcept { return delta_t_; }
    Interpolation interpolation() const noexcept { return mode_; }
    std::size_t node_count() const noexcept { return rows_.size(); }

    GridIndex first_index(NodeId node) const;
    GridIndex last_index(NodeId node) const;
    std::span<const double> row(NodeId node) const;

    /// Grid value; throws ErrorCode::index outside the materialized range.
    double at(NodeId node, GridIndex k) const;
    /// Budget query using the table's interpolation mode.
    double value(NodeId node, double budget) const;

private:
    double delta_t_ = 1.0;
    Interpolation mode_ = Interpolation::piecewise_constant;
    std::vector<GridIndex> first_;
    std::vector<std::vector<double>> rows_;
};

/// Successor choice per (node, grid row). Rows below the threshold index follow
/// the tree, so the table answers every k up to last_index(node).
class PolicyTable {
public:
    PolicyTable() = default;
    PolicyTable(double delta_t, NodeId destination, GridIndex threshold_index, std::vector<NodeId> tree_parent,
                std::vector<GridIndex> first, std::vector<std::vector<NodeId>> actions);

    double delta_t() const noexcept { return delta_t_; }
    NodeId destination() const noexcept { return destination_; }
    GridIndex threshold_index() const noexcept { return threshold_index_; }
    std::span<const NodeId> tree_parent() const noexcept { return tree_parent_; }
    std::size_t node_count() const noexcept { return actions_.size(); }

    GridIndex first_index(NodeId node) const;
    GridIndex last_index(NodeId node) const;
    std::span<const NodeId> row(NodeId node) const;

    /// kNoNode at the destination. Throws ErrorCode::index for rows at or above
    /// the threshold that are not stored.
    NodeId action(NodeId node, GridIndex k) const;

    friend bool operator==(const PolicyTable&, const PolicyTable&) = default;

private:
    double delta_t_ = 1.0;
    NodeId destination_ = kNoNode;
    GridIndex threshold_index_ = 0;
    std::vector<NodeId> tree_parent_;
    std::vector<GridIndex> first_;
    std::vector<std::vector<NodeId>> actions_;
};

/// Policy that follows a fixed tree at every budget, stored over [first, last].
PolicyTable static_tree_policy(double delta_t, NodeId destination, std::span<const NodeId> tree_parent,
                               GridIndex first, GridIndex last);

}  // namespace riskroute
