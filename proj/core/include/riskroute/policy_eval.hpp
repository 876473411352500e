#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "riskroute/ambiguity.hpp"
#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/risk.hpp"
#include "riskroute/robust_solver.hpp"
#include "riskroute/tables.hpp"

namespace riskroute {

/// Monte Carlo estimate of a policy's expected risk.
struct SimulationResult {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t runs = 0;
    /// Longest trajectory, in arcs.
    std::size_t max_arcs = 0;
    /// Runs that visited some node twice.
    std::size_t looping_runs = 0;
    /// Repeat visits summed over all runs.
    std::size_t revisits = 0;
};

/// Samples trajectories from the source under the true pmfs. The policy is
/// consulted at floor(remaining / delta_t). Throws ErrorCode::index naming the
/// state when the policy has no row there, and ErrorCode::numeric when a run
/// exceeds the anti-cycling bound on its length.
SimulationResult simulate_policy(const Graph& graph, std::span<const GridDistribution> truth, const PolicyTable& policy,
                                 const RiskFunction& risk, double total_budget, std::size_t runs, std::uint64_t seed);

enum class Method { robust_m, robust_md, empirical, let };

const char* to_string(Method method) noexcept;
/// Accepts "RobustM", "RobustMD", "Empirical", "LET" (case-insensitive).
Method method_from_name(std::string_view name);

struct ExperimentConfig {
    std::vector<double> lambda_fractions{0.001, 0.002, 0.005};
    std::size_t replications = 100;
    std::vector<Method> methods{Method::robust_m, Method::robust_md, Method::empirical, Method::let};
    /// Evenly spaced normalized budgets over [0, 1].
    std::size_t budget_points = 11;
    double delta_t = 1.0;
    std::uint64_t seed = 0;
    /// Interval construction for the robust presets; delta_t and seed are overridden.
    PresetConfig preset;
    RobustOptions robust;
    /// Worker threads; 0 uses the hardware concurrency.
    std::size_t threads = 0;
    /// When false, runtime_ms is reported as 0 so reports are reproducible byte for byte.
    bool record_timing = true;
};

struct ExperimentRow {
    Method method = Method::empirical;
    double lambda = 0.0;
    /// Normalized budget in [0, 1].
    double budget = 0.0;
    double mean_p = 0.0;
    double worst5_p = 0.0;
    /// Mean solve time per replication.
    double runtime_ms = 0.0;
    /// Replications that contributed.
    std::size_t replications = 0;
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    /// Budgets mapped to normalized 0 and 1: sums of delta_inf and delta_sup along the LET path of the full data.
    double budget_low = 0.0;
    double budget_high = 0.0;
    std::size_t failures = 0;
    std::vector<std::string> failure_messages;
};

/// Subsample, solve with every method, score exactly under the full-data pmfs.
/// Per-replication failures are counted and excluded.
ExperimentReport run_experiment(const Graph& graph, std::span<const std::vector<double>> full_samples,
                                const ExperimentConfig& config);

/// CSV with columns method,lambda,budget,mean_p,worst5_p,runtime_ms.
void write_report_csv(std::ostream& out, const ExperimentReport& report);

/// Mean of the lowest ceil(5%) of the values.
double worst_fraction_mean(std::vector<double> values, double fraction = 0.05);

/// Generator seed for one replication.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t lambda_index, std::uint64_t replication);

// Instances

struct Instance {
    Graph graph;
    std::vector<GridDistribution> pmfs;
    double delta_t;
};

/// Loop instance: s->d is risky, s->a is cheap but rarely slow, and from a it can pay
/// to go back to s. Delta_t = 1; the budget of interest is 8.
Instance loop_instance();

/// Two chains of 14 nodes between s and d with cross arcs at positions 5 and 10.
/// Route A costs are tight, route B bimodal with a lower mean.
Instance synthetic_two_route_network();

/// Independent draws from each arc's pmf, `count` per arc.
std::vector<std::vector<double>> draw_samples(std::span<const GridDistribution> pmfs, std::size_t count,
                                              std::uint64_t seed);

}  // namespace riskroute
