#include "riskroute/policy_eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "riskroute/errors.hpp"
#include "riskroute/io.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/preprocess.hpp"

namespace riskroute {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

struct ArcSampler {
    GridIndex first;
    std::discrete_distribution<std::size_t> draw;

    explicit ArcSampler(const GridDistribution& pmf)
        : first(pmf.first_index()), draw(pmf.weights().begin(), pmf.weights().end()) {}

    GridIndex operator()(std::mt19937_64& rng) { return first + static_cast<GridIndex>(draw(rng)); }
};

std::string state_name(const Graph& graph, NodeId node, GridIndex k, double dt) {
    std::ostringstream msg;
    msg << "node " << graph.label(node) << " with remaining budget " << format_number(static_cast<double>(k) * dt);
    return msg.str();
}

std::vector<double> subsample(std::span<const double> full, double lambda, std::mt19937_64& rng) {
    const auto n = static_cast<std::size_t>(std::max(1.0, std::round(lambda * static_cast<double>(full.size()))));
    std::vector<double> pool(full.begin(), full.end());
    const std::size_t take = std::min(n, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(take);
    return pool;
}

std::vector<GridDistribution> binned(const Graph& graph, std::span<const std::vector<double>> samples, double dt) {
    std::vector<GridDistribution> out;
    out.reserve(samples.size());
    for (std::size_t a = 0; a < samples.size(); ++a) {
        const Arc& arc = graph.arcs()[a];
        out.push_back(bin_samples(samples[a], dt, to_grid_units(arc.delta_inf, dt), to_grid_units(arc.delta_sup, dt)));
    }
    return out;
}

double sample_mean(std::span<const double> xs) {
    double total = 0.0;
    for (double x : xs) total += x;
    return total / static_cast<double>(xs.size());
}

PolicyTable build_policy(Method method, const Graph& graph, std::span<const std::vector<double>> samples,
                         const BudgetGrid& grid, const ExperimentConfig& config, std::uint64_t seed) {
    const double dt = grid.delta_t();
    const RiskFunction risk = RiskFunction::on_time();
    switch (method) {
        case Method::empirical:
            return solve_nominal(graph, binned(graph, samples, dt), risk, grid).policy;
        case Method::let: {
            std::vector<double> means(samples.size());
            for (std::size_t a = 0; a < samples.size(); ++a) means[a] = sample_mean(samples[a]);
            const TreePreprocess tree = shortest_path_tree(graph, means);
            return static_tree_policy(dt, graph.destination(), tree.tree_parent, 0, grid.ceil_index());
        }
        case Method::robust_m:
        case Method::robust_md: {
            std::vector<AmbiguitySet> sets;
            std::vector<double> inf(samples.size());
            std::vector<double> sup(samples.size());
            for (std::size_t a = 0; a < samples.size(); ++a) {
                PresetConfig preset = config.preset;
                preset.delta_t = dt;
                preset.seed = splitmix64(seed + a);
                sets.push_back(method == Method::robust_m ? preset_robust_m(samples[a], preset)
                                                          : preset_robust_md(samples[a], preset));
                inf[a] = static_cast<double>(sets.back().support_first()) * dt;
                sup[a] = static_cast<double>(sets.back().support_last()) * dt;
            }
            return solve_robust(graph.with_bounds(inf, sup), sets, risk, grid, config.robust).policy;
        }
    }
    throw Error(ErrorCode::configuration, "unknown method");
}

// Scores of one (lambda, replication) task: per method, either budget values or nothing.
struct TaskResult {
    std::vector<std::optional<std::vector<double>>> values;
    std::vector<double> runtime_ms;
    std::vector<std::string> failures;
};

}  // namespace

SimulationResult simulate_policy(const Graph& graph, std::span<const GridDistribution> truth, const PolicyTable& policy,
                                 const RiskFunction& risk, double total_budget, std::size_t runs, std::uint64_t seed) {
    const double dt = policy.delta_t();
    validate_distributions(graph, truth, dt);
    if (policy.node_count() != graph.node_count()) throw Error(ErrorCode::configuration, "policy does not match the graph");
    if (runs == 0) throw Error(ErrorCode::configuration, "at least one run is required");
    const GridIndex start = floor_to_grid(total_budget, dt);
    const auto nodes = static_cast<GridIndex>(graph.node_count());
    const GridIndex step = std::max<GridIndex>(1, to_grid_units(graph.min_delta_inf(), dt));
    const GridIndex bound = 2 * nodes + std::max<GridIndex>(0, start - policy.threshold_index()) / step + 1;

    std::vector<ArcSampler> samplers;
    samplers.reserve(truth.size());
    for (const GridDistribution& pmf : truth) samplers.emplace_back(pmf);
    std::mt19937_64 rng(seed);
    std::vector<int> visits(graph.node_count(), 0);
    std::vector<NodeId> path;

    SimulationResult out;
    out.runs = runs;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t r = 0; r < runs; ++r) {
        NodeId node = graph.source();
        GridIndex k = start;
        GridIndex arcs = 0;
        bool looped = false;
        path.assign(1, node);
        visits[node] = 1;
        while (node != graph.destination()) {
            if (arcs >= bound) {
                throw Error(ErrorCode::numeric, "trajectory exceeded " + std::to_string(bound) + " arcs at " +
                                                    state_name(graph, node, k, dt));
            }
            NodeId next = kNoNode;
            try {
                next = policy.action(node, k);
            } catch (const Error&) {
                throw Error(ErrorCode::index, "policy has no action for " + state_name(graph, node, k, dt));
            }
            const auto arc = graph.find_arc(node, next);
            if (!arc) {
                throw Error(ErrorCode::configuration,
                            "policy action at " + state_name(graph, node, k, dt) + " is not an arc");
            }
            k -= samplers[*arc](rng);
            node = next;
            ++arcs;
            if (visits[node]++ > 0) {
                looped = true;
                ++out.revisits;
            }
            path.push_back(node);
        }
        for (NodeId v : path) visits[v] = 0;
        const double value = risk.at_grid(k, dt);
        sum += value;
        sum_sq += value * value;
        out.max_arcs = std::max(out.max_arcs, static_cast<std::size_t>(arcs));
        if (looped) ++out.looping_runs;
    }
    const auto n = static_cast<double>(runs);
    out.mean = sum / n;
    const double var = runs > 1 ? std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0)) : 0.0;
    out.std_error = std::sqrt(var / n);
    return out;
}

const char* to_string(Method method) noexcept {
    switch (method) {
        case Method::robust_m: return "RobustM";
        case Method::robust_md: return "RobustMD";
        case Method::empirical: return "Empirical";
        case Method::let: return "LET";
    }
    return "unknown";
}

Method method_from_name(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "robustm" || lower == "robust-m") return Method::robust_m;
    if (lower == "robustmd" || lower == "robust-md") return Method::robust_md;
    if (lower == "empirical") return Method::empirical;
    if (lower == "let") return Method::let;
    throw Error(ErrorCode::configuration, "unknown method '" + std::string(name) + "'");
}

double worst_fraction_mean(std::vector<double> values, double fraction) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto count = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(values.size()) - 1e-12)));
    std::sort(values.begin(), values.end());
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) total += values[i];
    return total / static_cast<double>(count);
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t lambda_index, std::uint64_t replication) {
    return splitmix64(splitmix64(splitmix64(seed) ^ lambda_index) ^ replication);
}

ExperimentReport run_experiment(const Graph& graph, std::span<const std::vector<double>> full_samples,
                                const ExperimentConfig& config) {
    if (config.replications == 0) throw Error(ErrorCode::configuration, "replications must be at least 1");
    if (config.methods.empty()) throw Error(ErrorCode::configuration, "no methods selected");
    if (config.budget_points < 2) throw Error(ErrorCode::configuration, "at least two budget points are required");
    for (double l : config.lambda_fractions) {
        if (!(l > 0.0 && l <= 1.0)) throw Error(ErrorCode::configuration, "sample fractions must lie in (0, 1]");
    }
    if (full_samples.size() != graph.arc_count()) {
        throw Error(ErrorCode::configuration, "expected one sample vector per arc");
    }
    const double dt = config.delta_t;
    validate_grid(graph, dt);
    for (std::size_t a = 0; a < full_samples.size(); ++a) {
        if (full_samples[a].empty()) {
            const Arc& arc = graph.arcs()[a];
            throw Error(ErrorCode::configuration,
                        "no samples for arc " + graph.label(arc.tail) + "->" + graph.label(arc.head));
        }
    }
    const std::vector<GridDistribution> truth = binned(graph, full_samples, dt);

    ExperimentReport report;
    const TreePreprocess let_tree = shortest_path_tree(graph, mean_costs(graph, truth));
    for (NodeId v = graph.source(); v != graph.destination(); v = let_tree.tree_parent[v]) {
        const Arc& arc = graph.arc(graph.arc_between(v, let_tree.tree_parent[v]));
        report.budget_low += arc.delta_inf;
        report.budget_high += arc.delta_sup;
    }
    std::vector<double> budgets(config.budget_points);
    for (std::size_t j = 0; j < budgets.size(); ++j) {
        const double frac = static_cast<double>(j) / static_cast<double>(budgets.size() - 1);
        budgets[j] = report.budget_low + frac * (report.budget_high - report.budget_low);
    }
    const BudgetGrid grid(dt, report.budget_high);
    const RiskFunction risk = RiskFunction::on_time();
    const NodeId source = graph.source();

    const std::size_t lambdas = config.lambda_fractions.size();
    const std::size_t tasks = lambdas * config.replications;
    std::vector<TaskResult> results(tasks);
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t t = next++; t < tasks; t = next++) {
            const std::size_t li = t / config.replications;
            const std::size_t rep = t % config.replications;
            const std::uint64_t seed = replication_seed(config.seed, li, rep);
            std::mt19937_64 rng(seed);
            std::vector<std::vector<double>> sub;
            sub.reserve(full_samples.size());
            for (const auto& s : full_samples) sub.push_back(subsample(s, config.lambda_fractions[li], rng));
            TaskResult& res = results[t];
            res.values.resize(config.methods.size());
            res.runtime_ms.assign(config.methods.size(), 0.0);
            for (std::size_t m = 0; m < config.methods.size(); ++m) {
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    const PolicyTable policy = build_policy(config.methods[m], graph, sub, grid, config, seed);
                    const auto t1 = std::chrono::steady_clock::now();
                    const ValueTable values = evaluate_policy_exact(graph, truth, policy, risk, grid);
                    std::vector<double> scores(budgets.size());
                    for (std::size_t j = 0; j < budgets.size(); ++j) scores[j] = values.value(source, budgets[j]);
                    res.values[m] = std::move(scores);
                    if (config.record_timing) {
                        res.runtime_ms[m] = std::chrono::duration<double, std::milli>(t1 - t0).count();
                    }
                } catch (const std::exception& e) {
                    std::ostringstream msg;
                    msg << to_string(config.methods[m]) << " lambda=" << format_number(config.lambda_fractions[li])
                        << " replication " << rep << ": " << e.what();
                    res.failures.push_back(msg.str());
                }
            }
        }
    };
    std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, tasks);
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (const TaskResult& r : results) {
        report.failures += r.failures.size();
        report.failure_messages.insert(report.failure_messages.end(), r.failures.begin(), r.failures.end());
    }
    for (std::size_t m = 0; m < config.methods.size(); ++m) {
        for (std::size_t li = 0; li < lambdas; ++li) {
            double runtime = 0.0;
            std::size_t ok = 0;
            for (std::size_t rep = 0; rep < config.replications; ++rep) {
                const TaskResult& r = results[li * config.replications + rep];
                if (!r.values[m]) continue;
                runtime += r.runtime_ms[m];
                ++ok;
            }
            for (std::size_t j = 0; j < budgets.size(); ++j) {
                std::vector<double> cell;
                for (std::size_t rep = 0; rep < config.replications; ++rep) {
                    const TaskResult& r = results[li * config.replications + rep];
                    if (r.values[m]) cell.push_back((*r.values[m])[j]);
                }
                ExperimentRow row;
                row.method = config.methods[m];
                row.lambda = config.lambda_fractions[li];
                row.budget = static_cast<double>(j) / static_cast<double>(budgets.size() - 1);
                row.replications = ok;
                row.runtime_ms = ok ? runtime / static_cast<double>(ok) : 0.0;
                row.mean_p = cell.empty() ? std::numeric_limits<double>::quiet_NaN() : sample_mean(cell);
                row.worst5_p = std::min(worst_fraction_mean(std::move(cell)), row.mean_p);
                report.rows.push_back(row);
            }
        }
    }
    return report;
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
    out << "method,lambda,budget,mean_p,worst5_p,runtime_ms\n";
    for (const ExperimentRow& r : report.rows) {
        out << to_string(r.method) << ',' << format_number(r.lambda) << ',' << format_number(r.budget) << ','
            << format_number(r.mean_p) << ',' << format_number(r.worst5_p) << ',' << format_number(r.runtime_ms)
            << '\n';
    }
}

Instance loop_instance() {
    std::vector<Arc> arcs{
        {0, 2, 2.0, 9.0},
        {0, 1, 1.0, 5.0},
        {1, 2, 6.0, 6.0},
        {1, 0, 1.0, 1.0},
    };
    Graph graph({"s", "a", "d"}, std::move(arcs), 0, 2);
    std::vector<GridDistribution> pmfs{
        GridDistribution(1.0, 2, {0.85, 0, 0, 0, 0, 0, 0.05, 0.1}),
        GridDistribution(1.0, 1, {0.99, 0, 0, 0, 0.01}),
        GridDistribution::point_mass(1.0, 6),
        GridDistribution::point_mass(1.0, 1),
    };
    return {std::move(graph), std::move(pmfs), 1.0};
}

Instance synthetic_two_route_network() {
    constexpr int kChain = 14;
    std::vector<std::string> labels{"s"};
    for (int i = 1; i <= kChain; ++i) labels.push_back("a" + std::to_string(i));
    for (int i = 1; i <= kChain; ++i) labels.push_back("b" + std::to_string(i));
    labels.push_back("d");
    const NodeId s = 0;
    const auto a = [](int i) { return static_cast<NodeId>(i); };
    const auto b = [](int i) { return static_cast<NodeId>(kChain + i); };
    const NodeId d = 2 * kChain + 1;

    const GridDistribution tight(1.0, 2, {0.2, 0.6, 0.2});
    const GridDistribution bimodal(1.0, 1, {0.45, 0.25, 0, 0, 0, 0.3});
    const GridDistribution cross(1.0, 1, {0.5, 0.5});

    std::vector<Arc> arcs;
    std::vector<GridDistribution> pmfs;
    const auto add = [&](NodeId tail, NodeId head, const GridDistribution& pmf) {
        arcs.push_back({tail, head, static_cast<double>(pmf.first_index()), static_cast<double>(pmf.last_index())});
        pmfs.push_back(pmf);
    };
    add(s, a(1), tight);
    add(s, b(1), bimodal);
    for (int i = 1; i < kChain; ++i) {
        add(a(i), a(i + 1), tight);
        add(b(i), b(i + 1), bimodal);
    }
    add(a(kChain), d, tight);
    add(b(kChain), d, bimodal);
    for (int i : {5, 10}) {
        add(a(i), b(i), cross);
        add(b(i), a(i), cross);
    }
    return {Graph(std::move(labels), std::move(arcs), s, d), std::move(pmfs), 1.0};
}

std::vector<std::vector<double>> draw_samples(std::span<const GridDistribution> pmfs, std::size_t count,
                                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> out(pmfs.size());
    for (std::size_t a = 0; a < pmfs.size(); ++a) {
        ArcSampler sampler(pmfs[a]);
        out[a].reserve(count);
        for (std::size_t i = 0; i < count; ++i) out[a].push_back(static_cast<double>(sampler(rng)) * pmfs[a].delta_t());
    }
    return out;
}

}  // namespace riskroute
