#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskroute/ambiguity.hpp"
#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/tables.hpp"

namespace riskroute {

/// Graph JSON: {delta_t, nodes, source, destination,
///              arcs: [{tail, head, delta_inf, delta_sup, pmf?: [{offset_k, weight}], samples_ref?}]}.
/// Budgets may be numbers or decimal strings.
struct GraphDocument {
    double delta_t;
    Graph graph;
    /// Per arc, when the file carries a pmf.
    std::vector<std::optional<GridDistribution>> pmfs;
    std::vector<std::string> samples_refs;

    /// Every pmf; throws ErrorCode::configuration naming the first arc without one.
    std::vector<GridDistribution> distributions() const;
};

GraphDocument parse_graph(std::istream& in);
GraphDocument read_graph_file(const std::string& path);
void write_graph(std::ostream& out, const GraphDocument& doc);

/// Samples CSV with header arc_tail,arc_head,cost; one vector per arc of the graph.
std::vector<std::vector<double>> parse_samples(std::istream& in, const Graph& graph);
std::vector<std::vector<double>> read_samples_file(const std::string& path, const Graph& graph);
void write_samples(std::ostream& out, const Graph& graph, std::span<const std::vector<double>> samples);

/// Empirical pmf: samples rounded half-up to the grid, clamped to [first, last].
GridDistribution bin_samples(std::span<const double> samples, double delta_t, GridIndex first, GridIndex last);
/// Same, over the range of the rounded samples (at least one cell).
GridDistribution bin_samples(std::span<const double> samples, double delta_t);

/// Policy JSON: {delta_t, T, destination, threshold_index, interpolation?,
///               nodes: [{node, tree_parent, k_min, actions, values?}]}.
struct PolicyDocument {
    double total_budget = 0.0;
    PolicyTable policy;
    std::optional<ValueTable> values;
};

PolicyDocument parse_policy(std::istream& in, const Graph& graph);
PolicyDocument read_policy_file(const std::string& path, const Graph& graph);
void write_policy(std::ostream& out, const Graph& graph, const PolicyDocument& doc);

/// Statistics JSON: {arcs: [{tail, head, statistics: [{name?, pieces: [{lo, hi, slope, intercept}],
///                   alpha, beta}]}]}. Null or missing bounds are infinite. Arcs without an entry
/// are rejected.
std::vector<AmbiguitySet> parse_statistics(std::istream& in, const Graph& graph, double delta_t);
std::vector<AmbiguitySet> read_statistics_file(const std::string& path, const Graph& graph, double delta_t);
void write_statistics(std::ostream& out, const Graph& graph, std::span<const AmbiguitySet> sets);

/// Shortest decimal string that reads back to the same double.
std::string format_number(double value);

}  // namespace riskroute
