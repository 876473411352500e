#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "riskroute/convolution.hpp"
#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"

namespace riskroute::detail {

// Value rows under construction; ready[i] is the last filled row of node i.
struct RowStore {
    std::vector<GridIndex> first;
    std::vector<std::vector<double>> rows;
    std::vector<GridIndex> ready;

    RowStore(std::vector<GridIndex> lower, GridIndex last) : first(std::move(lower)) {
        rows.resize(first.size());
        ready.resize(first.size());
        for (std::size_t i = 0; i < first.size(); ++i) {
            rows[i].assign(static_cast<std::size_t>(std::max<GridIndex>(last - first[i] + 1, 0)), 0.0);
            ready[i] = first[i] - 1;
        }
    }

    GridWindow window(NodeId j) const {
        return {first[j], std::span<const double>(rows[j]).first(static_cast<std::size_t>(ready[j] - first[j] + 1))};
    }

    double at(NodeId j, GridIndex k) const { return window(j).at(k); }

    void set(NodeId i, GridIndex k, double v) {
        rows[i][static_cast<std::size_t>(k - first[i])] = v;
        ready[i] = std::max(ready[i], k);
    }
};

// Out-arcs of every node ordered by the tie-break rule: smaller cost-to-go of the head, then smaller head id.
inline std::vector<std::vector<ArcId>> ordered_candidates(const Graph& graph, std::span<const double> cost_to_go) {
    std::vector<std::vector<ArcId>> candidates(graph.node_count());
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        if (id == graph.destination()) continue;
        auto out = graph.out_arcs(id);
        candidates[i].assign(out.begin(), out.end());
        std::stable_sort(candidates[i].begin(), candidates[i].end(), [&](ArcId x, ArcId y) {
            const NodeId hx = graph.arcs()[x].head;
            const NodeId hy = graph.arcs()[y].head;
            if (cost_to_go[hx] != cost_to_go[hy]) return cost_to_go[hx] < cost_to_go[hy];
            return hx < hy;
        });
    }
    return candidates;
}

// Position of the first value within the relative tolerance of the maximum.
inline std::size_t pick_best(std::span<const double> values, double tolerance) {
    double best = values[0];
    for (double v : values) best = std::max(best, v);
    const double floor = best - tolerance * std::max(1.0, std::abs(best));
    std::size_t pick = 0;
    while (values[pick] < floor) ++pick;
    return pick;
}

// Smallest delta_inf in grid units: rows of one block depend only on earlier blocks.
inline GridIndex block_length(const Graph& graph, double delta_t) {
    GridIndex b = 0;
    for (const Arc& arc : graph.arcs()) {
        const GridIndex v = to_grid_units(arc.delta_inf, delta_t);
        b = b == 0 ? v : std::min(b, v);
    }
    return std::max<GridIndex>(b, 1);
}

}  // namespace riskroute::detail
