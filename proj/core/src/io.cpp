#include "riskroute/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

#include "riskroute/errors.hpp"

namespace riskroute {

using nlohmann::json;

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::parse, what); }

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::parse, "cannot open '" + path + "'");
    return in;
}

json read_json(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        parse_error(std::string("malformed JSON: ") + e.what());
    }
}

const json& field(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) parse_error(std::string("missing field '") + name + "'");
    return obj.at(name);
}

double to_number(const json& v, const char* name) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        double out = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
        if (res.ec == std::errc() && res.ptr == s.data() + s.size()) return out;
    }
    parse_error(std::string("field '") + name + "' is not a number");
}

double number(const json& obj, const char* name) { return to_number(field(obj, name), name); }

std::string text(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_string()) parse_error(std::string("field '") + name + "' is not a string");
    return v.get<std::string>();
}

GridIndex integer(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number_integer()) parse_error(std::string("field '") + name + "' is not an integer");
    return v.get<GridIndex>();
}

const json& array(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_array()) parse_error(std::string("field '") + name + "' is not an array");
    return v;
}

NodeId node_of(const Graph& graph, const std::string& label) {
    if (auto id = graph.find_node(label)) return *id;
    throw Error(ErrorCode::configuration, "unknown node '" + label + "'");
}

ArcId arc_of(const Graph& graph, const std::string& tail, const std::string& head) {
    if (auto a = graph.find_arc(node_of(graph, tail), node_of(graph, head))) return *a;
    throw Error(ErrorCode::configuration, "unknown arc " + tail + "->" + head);
}

double bound_value(const json& obj, const char* name, double missing) {
    if (!obj.contains(name) || obj.at(name).is_null()) return missing;
    return to_number(obj.at(name), name);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        cell.erase(0, cell.find_first_not_of(" \t\r"));
        cell.erase(cell.find_last_not_of(" \t\r") + 1);
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

template <class T>
T guarded(auto&& body) {
    try {
        return body();
    } catch (const json::exception& e) {
        parse_error(std::string("invalid document: ") + e.what());
    }
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<GridDistribution> GraphDocument::distributions() const {
    std::vector<GridDistribution> out;
    out.reserve(pmfs.size());
    for (std::size_t a = 0; a < pmfs.size(); ++a) {
        if (!pmfs[a]) {
            const Arc& arc = graph.arcs()[a];
            throw Error(ErrorCode::configuration,
                        "arc " + graph.label(arc.tail) + "->" + graph.label(arc.head) + " has no pmf");
        }
        out.push_back(*pmfs[a]);
    }
    return out;
}

GraphDocument parse_graph(std::istream& in) {
    const json doc = read_json(in);
    return guarded<GraphDocument>([&] {
        const double dt = number(doc, "delta_t");
        std::vector<std::string> labels;
        for (const json& v : array(doc, "nodes")) {
            if (!v.is_string()) parse_error("node ids must be strings");
            labels.push_back(v.get<std::string>());
        }
        const auto index = [&](const std::string& label) {
            auto it = std::find(labels.begin(), labels.end(), label);
            if (it == labels.end()) throw Error(ErrorCode::configuration, "unknown node '" + label + "'");
            return static_cast<NodeId>(it - labels.begin());
        };
        std::vector<Arc> arcs;
        std::vector<std::optional<GridDistribution>> pmfs;
        std::vector<std::string> refs;
        for (const json& a : array(doc, "arcs")) {
            Arc arc{index(text(a, "tail")), index(text(a, "head")), number(a, "delta_inf"), number(a, "delta_sup")};
            arcs.push_back(arc);
            refs.push_back(a.contains("samples_ref") ? text(a, "samples_ref") : std::string());
            if (!a.contains("pmf")) {
                pmfs.emplace_back();
                continue;
            }
            std::map<GridIndex, double> mass;
            for (const json& e : array(a, "pmf")) mass[integer(e, "offset_k")] += number(e, "weight");
            if (mass.empty()) parse_error("empty pmf on arc " + text(a, "tail") + "->" + text(a, "head"));
            const GridIndex first = mass.begin()->first;
            std::vector<double> w(static_cast<std::size_t>(mass.rbegin()->first - first + 1), 0.0);
            for (const auto& [k, p] : mass) w[static_cast<std::size_t>(k - first)] = p;
            pmfs.emplace_back(GridDistribution(dt, first, std::move(w)));
        }
        Graph graph(labels, std::move(arcs), index(text(doc, "source")), index(text(doc, "destination")));
        validate_grid(graph, dt);
        for (std::size_t a = 0; a < pmfs.size(); ++a) {
            if (!pmfs[a]) continue;
            const Arc& arc = graph.arcs()[a];
            if (pmfs[a]->min_support() < to_grid_units(arc.delta_inf, dt) ||
                pmfs[a]->max_support() > to_grid_units(arc.delta_sup, dt)) {
                throw Error(ErrorCode::configuration,
                            "pmf of arc " + graph.label(arc.tail) + "->" + graph.label(arc.head) +
                                " leaves its support");
            }
        }
        return GraphDocument{dt, std::move(graph), std::move(pmfs), std::move(refs)};
    });
}

GraphDocument read_graph_file(const std::string& path) {
    auto in = open_input(path);
    return parse_graph(in);
}

void write_graph(std::ostream& out, const GraphDocument& doc) {
    json j;
    j["delta_t"] = format_number(doc.delta_t);
    j["nodes"] = doc.graph.labels();
    j["source"] = doc.graph.label(doc.graph.source());
    j["destination"] = doc.graph.label(doc.graph.destination());
    j["arcs"] = json::array();
    for (std::size_t a = 0; a < doc.graph.arc_count(); ++a) {
        const Arc& arc = doc.graph.arcs()[a];
        json e;
        e["tail"] = doc.graph.label(arc.tail);
        e["head"] = doc.graph.label(arc.head);
        e["delta_inf"] = format_number(arc.delta_inf);
        e["delta_sup"] = format_number(arc.delta_sup);
        if (a < doc.pmfs.size() && doc.pmfs[a]) {
            json pmf = json::array();
            const GridDistribution& p = *doc.pmfs[a];
            for (GridIndex k = p.first_index(); k <= p.last_index(); ++k) {
                if (p.weight(k) > 0.0) pmf.push_back({{"offset_k", k}, {"weight", p.weight(k)}});
            }
            e["pmf"] = std::move(pmf);
        }
        if (a < doc.samples_refs.size() && !doc.samples_refs[a].empty()) e["samples_ref"] = doc.samples_refs[a];
        j["arcs"].push_back(std::move(e));
    }
    out << j.dump(2) << '\n';
}

std::vector<std::vector<double>> parse_samples(std::istream& in, const Graph& graph) {
    std::string line;
    if (!std::getline(in, line)) parse_error("samples file is empty");
    const std::vector<std::string> header = split_csv(line);
    const auto column = [&](const char* name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) parse_error(std::string("samples file lacks column '") + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t tail = column("arc_tail");
    const std::size_t head = column("arc_head");
    const std::size_t cost = column("cost");
    std::vector<std::vector<double>> samples(graph.arc_count());
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split_csv(line);
        if (cells.size() != header.size()) {
            parse_error("line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) + " cells");
        }
        double value = 0.0;
        const std::string& c = cells[cost];
        const auto res = std::from_chars(c.data(), c.data() + c.size(), value);
        if (res.ec != std::errc() || res.ptr != c.data() + c.size()) {
            parse_error("line " + std::to_string(line_no) + ": cost '" + c + "' is not a number");
        }
        if (!(value > 0.0) || !std::isfinite(value)) {
            throw Error(ErrorCode::configuration, "line " + std::to_string(line_no) + ": costs must be positive");
        }
        samples[arc_of(graph, cells[tail], cells[head])].push_back(value);
    }
    return samples;
}

std::vector<std::vector<double>> read_samples_file(const std::string& path, const Graph& graph) {
    auto in = open_input(path);
    return parse_samples(in, graph);
}

void write_samples(std::ostream& out, const Graph& graph, std::span<const std::vector<double>> samples) {
    out << "arc_tail,arc_head,cost\n";
    for (std::size_t a = 0; a < samples.size(); ++a) {
        const Arc& arc = graph.arcs()[a];
        for (double c : samples[a]) out << graph.label(arc.tail) << ',' << graph.label(arc.head) << ',' << format_number(c) << '\n';
    }
}

GridDistribution bin_samples(std::span<const double> samples, double delta_t, GridIndex first, GridIndex last) {
    if (samples.empty()) throw Error(ErrorCode::configuration, "no samples to bin");
    if (first > last) throw Error(ErrorCode::configuration, "empty binning range");
    std::vector<double> counts(static_cast<std::size_t>(last - first + 1), 0.0);
    for (double x : samples) {
        const GridIndex k = std::clamp(round_to_grid(x, delta_t), first, last);
        counts[static_cast<std::size_t>(k - first)] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(samples.size());
    return GridDistribution(delta_t, first, std::move(counts));
}

GridDistribution bin_samples(std::span<const double> samples, double delta_t) {
    if (samples.empty()) throw Error(ErrorCode::configuration, "no samples to bin");
    GridIndex lo = std::numeric_limits<GridIndex>::max();
    GridIndex hi = std::numeric_limits<GridIndex>::min();
    for (double x : samples) {
        const GridIndex k = std::max<GridIndex>(1, round_to_grid(x, delta_t));
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    return bin_samples(samples, delta_t, lo, hi);
}

PolicyDocument parse_policy(std::istream& in, const Graph& graph) {
    const json doc = read_json(in);
    return guarded<PolicyDocument>([&] {
        const double dt = number(doc, "delta_t");
        const NodeId dest = node_of(graph, text(doc, "destination"));
        const std::size_t n = graph.node_count();
        std::vector<NodeId> parent(n, kNoNode);
        std::vector<GridIndex> first(n, 0);
        std::vector<std::vector<NodeId>> actions(n);
        std::vector<std::vector<double>> values(n);
        std::vector<char> seen(n, 0);
        bool has_values = false;
        for (const json& e : array(doc, "nodes")) {
            const NodeId i = node_of(graph, text(e, "node"));
            if (seen[i]) parse_error("node '" + graph.label(i) + "' listed twice");
            seen[i] = 1;
            const json& p = field(e, "tree_parent");
            parent[i] = p.is_null() ? kNoNode : node_of(graph, p.get<std::string>());
            first[i] = integer(e, "k_min");
            for (const json& a : array(e, "actions")) actions[i].push_back(node_of(graph, a.get<std::string>()));
            if (e.contains("values")) {
                has_values = true;
                for (const json& v : array(e, "values")) values[i].push_back(to_number(v, "values"));
            }
        }
        if (std::find(seen.begin(), seen.end(), 0) != seen.end()) parse_error("policy does not list every node");
        PolicyDocument out;
        out.total_budget = number(doc, "T");
        out.policy = PolicyTable(dt, dest, integer(doc, "threshold_index"), std::move(parent), first, std::move(actions));
        if (has_values) {
            const std::string mode = doc.contains("interpolation") ? text(doc, "interpolation") : "piecewise_constant";
            if (mode != "piecewise_constant" && mode != "piecewise_linear") parse_error("unknown interpolation '" + mode + "'");
            out.values = ValueTable(dt, mode == "piecewise_linear" ? Interpolation::piecewise_linear
                                                                   : Interpolation::piecewise_constant,
                                    std::move(first), std::move(values));
        }
        return out;
    });
}

PolicyDocument read_policy_file(const std::string& path, const Graph& graph) {
    auto in = open_input(path);
    return parse_policy(in, graph);
}

void write_policy(std::ostream& out, const Graph& graph, const PolicyDocument& doc) {
    const PolicyTable& policy = doc.policy;
    json j;
    j["delta_t"] = format_number(policy.delta_t());
    j["T"] = format_number(doc.total_budget);
    j["destination"] = graph.label(policy.destination());
    j["threshold_index"] = policy.threshold_index();
    if (doc.values) {
        j["interpolation"] =
            doc.values->interpolation() == Interpolation::piecewise_linear ? "piecewise_linear" : "piecewise_constant";
    }
    j["nodes"] = json::array();
    for (std::size_t i = 0; i < policy.node_count(); ++i) {
        const auto id = static_cast<NodeId>(i);
        json e;
        e["node"] = graph.label(id);
        const NodeId p = policy.tree_parent()[i];
        e["tree_parent"] = p == kNoNode ? json(nullptr) : json(graph.label(p));
        e["k_min"] = policy.first_index(id);
        json acts = json::array();
        for (NodeId a : policy.row(id)) acts.push_back(graph.label(a));
        e["actions"] = std::move(acts);
        if (doc.values) {
            if (doc.values->first_index(id) != policy.first_index(id) && !policy.row(id).empty()) {
                throw Error(ErrorCode::configuration, "value and policy rows start at different indices");
            }
            e["values"] = std::vector<double>(doc.values->row(id).begin(), doc.values->row(id).end());
            e["k_min"] = doc.values->first_index(id);
        }
        j["nodes"].push_back(std::move(e));
    }
    out << j.dump(2) << '\n';
}

std::vector<AmbiguitySet> parse_statistics(std::istream& in, const Graph& graph, double delta_t) {
    const json doc = read_json(in);
    return guarded<std::vector<AmbiguitySet>>([&] {
        std::vector<std::optional<std::vector<BoundedStatistic>>> per_arc(graph.arc_count());
        for (const json& a : array(doc, "arcs")) {
            const ArcId id = arc_of(graph, text(a, "tail"), text(a, "head"));
            std::vector<BoundedStatistic> stats;
            for (const json& s : array(a, "statistics")) {
                std::vector<StatisticPiece> pieces;
                for (const json& p : array(s, "pieces")) {
                    pieces.push_back({number(p, "lo"), number(p, "hi"), number(p, "slope"), number(p, "intercept")});
                }
                const double inf = std::numeric_limits<double>::infinity();
                stats.push_back({PiecewiseAffineStatistic(std::move(pieces), s.contains("name") ? text(s, "name") : ""),
                                 {bound_value(s, "alpha", -inf), bound_value(s, "beta", inf)}});
            }
            per_arc[id] = std::move(stats);
        }
        std::vector<AmbiguitySet> sets;
        for (std::size_t a = 0; a < per_arc.size(); ++a) {
            const Arc& arc = graph.arcs()[a];
            if (!per_arc[a]) {
                throw Error(ErrorCode::configuration,
                            "no statistics for arc " + graph.label(arc.tail) + "->" + graph.label(arc.head));
            }
            sets.emplace_back(delta_t, to_grid_units(arc.delta_inf, delta_t), to_grid_units(arc.delta_sup, delta_t),
                              std::move(*per_arc[a]));
        }
        return sets;
    });
}

std::vector<AmbiguitySet> read_statistics_file(const std::string& path, const Graph& graph, double delta_t) {
    auto in = open_input(path);
    return parse_statistics(in, graph, delta_t);
}

void write_statistics(std::ostream& out, const Graph& graph, std::span<const AmbiguitySet> sets) {
    json j;
    j["arcs"] = json::array();
    for (std::size_t a = 0; a < sets.size(); ++a) {
        const Arc& arc = graph.arcs()[a];
        json e;
        e["tail"] = graph.label(arc.tail);
        e["head"] = graph.label(arc.head);
        e["statistics"] = json::array();
        for (const BoundedStatistic& st : sets[a].statistics()) {
            json s;
            if (!st.statistic.name().empty()) s["name"] = st.statistic.name();
            s["pieces"] = json::array();
            for (const StatisticPiece& p : st.statistic.pieces()) {
                s["pieces"].push_back({{"lo", format_number(p.lo)},
                                       {"hi", format_number(p.hi)},
                                       {"slope", p.slope},
                                       {"intercept", p.intercept}});
            }
            s["alpha"] = std::isfinite(st.bound.alpha) ? json(st.bound.alpha) : json(nullptr);
            s["beta"] = std::isfinite(st.bound.beta) ? json(st.bound.beta) : json(nullptr);
            e["statistics"].push_back(std::move(s));
        }
        j["arcs"].push_back(std::move(e));
    }
    out << j.dump(2) << '\n';
}

}  // namespace riskroute
