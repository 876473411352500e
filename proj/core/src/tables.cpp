#include "riskroute/tables.hpp"

#include <cmath>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

[[noreturn]] void out_of_range(NodeId node, GridIndex k, GridIndex lo, GridIndex hi) {
    std::ostringstream msg;
    msg << "row " << k << " of node " << node << " outside the stored range [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::index, msg.str());
}

void check_node(NodeId node, std::size_t count) {
    if (node < 0 || static_cast<std::size_t>(node) >= count) {
        throw Error(ErrorCode::index, "node id " + std::to_string(node) + " out of range");
    }
}

}  // namespace

ValueTable::ValueTable(double delta_t, Interpolation mode, std::vector<GridIndex> first,
                       std::vector<std::vector<double>> rows)
    : delta_t_(delta_t), mode_(mode), first_(std::move(first)), rows_(std::move(rows)) {
    if (first_.size() != rows_.size()) throw Error(ErrorCode::configuration, "value table shape mismatch");
}

GridIndex ValueTable::first_index(NodeId node) const {
    check_node(node, rows_.size());
    return first_[node];
}

GridIndex ValueTable::last_index(NodeId node) const {
    check_node(node, rows_.size());
    return first_[node] + static_cast<GridIndex>(rows_[node].size()) - 1;
}

std::span<const double> ValueTable::row(NodeId node) const {
    check_node(node, rows_.size());
    return rows_[node];
}

double ValueTable::at(NodeId node, GridIndex k) const {
    const GridIndex lo = first_index(node);
    const GridIndex hi = last_index(node);
    if (k < lo || k > hi) out_of_range(node, k, lo, hi);
    return rows_[node][static_cast<std::size_t>(k - lo)];
}

double ValueTable::value(NodeId node, double budget) const {
    const GridIndex k = floor_to_grid(budget, delta_t_);
    if (mode_ == Interpolation::piecewise_constant) return at(node, k);
    const double frac = budget / delta_t_ - static_cast<double>(k);
    if (frac <= 1e-12) return at(node, k);
    return (1.0 - frac) * at(node, k) + frac * at(node, k + 1);
}

PolicyTable::PolicyTable(double delta_t, NodeId destination, GridIndex threshold_index,
                         std::vector<NodeId> tree_parent, std::vector<GridIndex> first,
                         std::vector<std::vector<NodeId>> actions)
    : delta_t_(delta_t),
      destination_(destination),
      threshold_index_(threshold_index),
      tree_parent_(std::move(tree_parent)),
      first_(std::move(first)),
      actions_(std::move(actions)) {
    if (first_.size() != actions_.size() || tree_parent_.size() != actions_.size()) {
        throw Error(ErrorCode::configuration, "policy table shape mismatch");
    }
    check_node(destination_, actions_.size());
}

GridIndex PolicyTable::first_index(NodeId node) const {
    check_node(node, actions_.size());
    return first_[node];
}

GridIndex PolicyTable::last_index(NodeId node) const {
    check_node(node, actions_.size());
    return first_[node] + static_cast<GridIndex>(actions_[node].size()) - 1;
}

std::span<const NodeId> PolicyTable::row(NodeId node) const {
    check_node(node, actions_.size());
    return actions_[node];
}

NodeId PolicyTable::action(NodeId node, GridIndex k) const {
    check_node(node, actions_.size());
    if (node == destination_) return kNoNode;
    if (k < threshold_index_) return tree_parent_[node];
    const GridIndex lo = first_[node];
    const GridIndex hi = last_index(node);
    if (k < lo || k > hi) out_of_range(node, k, lo, hi);
    return actions_[node][static_cast<std::size_t>(k - lo)];
}

PolicyTable static_tree_policy(double delta_t, NodeId destination, std::span<const NodeId> tree_parent,
                               GridIndex first, GridIndex last) {
    const std::size_t n = tree_parent.size();
    std::vector<GridIndex> firsts(n, first);
    std::vector<std::vector<NodeId>> actions(n);
    for (std::size_t v = 0; v < n; ++v) {
        if (static_cast<NodeId>(v) == destination) continue;
        actions[v].assign(static_cast<std::size_t>(std::max<GridIndex>(last - first + 1, 0)), tree_parent[v]);
    }
    // the static policy follows its tree at every budget, so the threshold is unbounded
    return PolicyTable(delta_t, destination, last + 1, std::vector<NodeId>(tree_parent.begin(), tree_parent.end()),
                       std::move(firsts), std::move(actions));
}

}  // namespace riskroute
