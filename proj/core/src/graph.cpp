#include "riskroute/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

Graph::Graph(std::vector<std::string> labels, std::vector<Arc> arcs, NodeId source, NodeId destination)
    : labels_(std::move(labels)), arcs_(std::move(arcs)), source_(source), destination_(destination) {
    const auto n = static_cast<NodeId>(labels_.size());
    if (n == 0) throw Error(ErrorCode::configuration, "graph has no nodes");
    {
        std::set<std::string> seen;
        for (const auto& label : labels_) {
            if (!seen.insert(label).second) {
                throw Error(ErrorCode::configuration, "duplicate node label '" + label + "'");
            }
        }
    }
    if (source_ < 0 || source_ >= n || destination_ < 0 || destination_ >= n) {
        throw Error(ErrorCode::configuration, "source or destination is not a node of the graph");
    }
    out_.assign(labels_.size(), {});
    std::set<std::pair<NodeId, NodeId>> pairs;
    max_sup_ = 0.0;
    min_inf_ = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < arcs_.size(); ++a) {
        const Arc& arc = arcs_[a];
        if (arc.tail < 0 || arc.tail >= n || arc.head < 0 || arc.head >= n) {
            throw Error(ErrorCode::configuration, "arc endpoint is not a node of the graph");
        }
        if (arc.tail == arc.head) {
            throw Error(ErrorCode::configuration, "self-loop at node '" + labels_[arc.tail] + "'");
        }
        if (!pairs.insert({arc.tail, arc.head}).second) {
            throw Error(ErrorCode::configuration,
                        "parallel arcs " + labels_[arc.tail] + "->" + labels_[arc.head]);
        }
        if (!(arc.delta_inf > 0.0) || !(arc.delta_inf <= arc.delta_sup) || !std::isfinite(arc.delta_sup)) {
            std::ostringstream msg;
            msg << "arc " << labels_[arc.tail] << "->" << labels_[arc.head]
                << " needs 0 < delta_inf <= delta_sup < inf, got [" << arc.delta_inf << ", " << arc.delta_sup << "]";
            throw Error(ErrorCode::configuration, msg.str());
        }
        out_[arc.tail].push_back(static_cast<ArcId>(a));
        max_sup_ = std::max(max_sup_, arc.delta_sup);
        min_inf_ = std::min(min_inf_, arc.delta_inf);
    }
    for (auto& list : out_) {
        std::sort(list.begin(), list.end(), [&](ArcId x, ArcId y) { return arcs_[x].head < arcs_[y].head; });
    }
    if (arcs_.empty()) min_inf_ = 0.0;
}

std::span<const ArcId> Graph::out_arcs(NodeId node) const { return out_.at(static_cast<std::size_t>(node)); }

std::optional<ArcId> Graph::find_arc(NodeId tail, NodeId head) const {
    for (ArcId a : out_arcs(tail)) {
        if (arcs_[a].head == head) return a;
    }
    return std::nullopt;
}

ArcId Graph::arc_between(NodeId tail, NodeId head) const {
    if (auto a = find_arc(tail, head)) return *a;
    throw Error(ErrorCode::configuration, "no arc " + label(tail) + "->" + label(head));
}

std::optional<NodeId> Graph::find_node(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<NodeId>(it - labels_.begin());
}

Graph Graph::with_bounds(std::span<const double> delta_inf, std::span<const double> delta_sup) const {
    if (delta_inf.size() != arcs_.size() || delta_sup.size() != arcs_.size()) {
        throw Error(ErrorCode::configuration, "bounds do not match the arc count");
    }
    std::vector<Arc> arcs = arcs_;
    for (std::size_t a = 0; a < arcs.size(); ++a) {
        arcs[a].delta_inf = delta_inf[a];
        arcs[a].delta_sup = delta_sup[a];
    }
    return Graph(labels_, std::move(arcs), source_, destination_);
}

std::vector<double> mean_costs(const Graph& graph, std::span<const GridDistribution> distributions) {
    if (distributions.size() != graph.arc_count()) {
        std::ostringstream msg;
        msg << "expected " << graph.arc_count() << " arc distributions, got " << distributions.size();
        throw Error(ErrorCode::configuration, msg.str());
    }
    std::vector<double> means(distributions.size());
    for (std::size_t a = 0; a < distributions.size(); ++a) means[a] = distributions[a].mean();
    return means;
}

void validate_grid(const Graph& graph, double delta_t) {
    for (const Arc& arc : graph.arcs()) {
        to_grid_units(arc.delta_inf, delta_t);
        to_grid_units(arc.delta_sup, delta_t);
    }
    if (graph.arc_count() > 0 && delta_t > graph.min_delta_inf() * (1.0 + 1e-12)) {
        std::ostringstream msg;
        msg << "delta_t " << delta_t << " exceeds the smallest delta_inf " << graph.min_delta_inf();
        throw Error(ErrorCode::configuration, msg.str());
    }
}

void validate_distributions(const Graph& graph, std::span<const GridDistribution> distributions, double delta_t) {
    if (distributions.size() != graph.arc_count()) {
        std::ostringstream msg;
        msg << "expected " << graph.arc_count() << " arc distributions, got " << distributions.size();
        throw Error(ErrorCode::configuration, msg.str());
    }
    for (std::size_t a = 0; a < distributions.size(); ++a) {
        const auto& dist = distributions[a];
        const Arc& arc = graph.arcs()[a];
        if (std::abs(dist.delta_t() - delta_t) > 1e-12 * delta_t) {
            throw Error(ErrorCode::configuration, "distribution of arc " + graph.label(arc.tail) + "->" +
                                                      graph.label(arc.head) + " uses a different delta_t");
        }
        const GridIndex lo = to_grid_units(arc.delta_inf, delta_t);
        const GridIndex hi = to_grid_units(arc.delta_sup, delta_t);
        if (dist.min_support() < lo || dist.max_support() > hi) {
            throw Error(ErrorCode::configuration, "distribution of arc " + graph.label(arc.tail) + "->" +
                                                      graph.label(arc.head) + " escapes [delta_inf, delta_sup]");
        }
    }
}

}  // namespace riskroute
