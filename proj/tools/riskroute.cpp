// riskroute command-line tool.

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "riskroute/ambiguity.hpp"
#include "riskroute/errors.hpp"
#include "riskroute/io.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/policy_eval.hpp"
#include "riskroute/robust_solver.hpp"

namespace rr = riskroute;

namespace {

constexpr int kUsageExit = 1;

std::optional<double> env_double(const char* name) {
    const char* raw = std::getenv(name);
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (*end != '\0' || !std::isfinite(v) || v < 0.0) {
        throw rr::Error(rr::ErrorCode::configuration, std::string("environment variable ") + name + " is not a tolerance");
    }
    return v;
}

// Output goes to a file when a path is given, to stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file_.open(path);
        if (!file_) throw rr::Error(rr::ErrorCode::configuration, "cannot write '" + path + "'");
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

struct Common {
    std::string graph;
    double delta_t = 0.0;
    double budget = 0.0;
    std::string risk = "on-time";
    std::string out;
};

struct PresetFlags {
    std::string interval = "bootstrap";
    double level = 0.95;
    std::size_t replicates = 1000;
    double hoeffding_epsilon = 0.05;
    std::uint64_t seed = 0;

    rr::PresetConfig config(double dt, std::size_t statistics) const {
        rr::PresetConfig c;
        c.delta_t = dt;
        c.method = interval == "hoeffding" ? rr::IntervalMethod::hoeffding : rr::IntervalMethod::bootstrap;
        c.level = level;
        c.replicates = replicates;
        c.epsilon = hoeffding_epsilon;
        c.total_statistics = statistics;
        c.seed = seed;
        return c;
    }
};

void add_preset_flags(CLI::App* cmd, PresetFlags& f) {
    cmd->add_option("--interval", f.interval, "Confidence interval construction")
        ->check(CLI::IsMember({"bootstrap", "hoeffding"}))
        ->capture_default_str();
    cmd->add_option("--level", f.level, "Bootstrap confidence level")->capture_default_str();
    cmd->add_option("--replicates", f.replicates, "Bootstrap resamples")->capture_default_str();
    cmd->add_option("--hoeffding-epsilon", f.hoeffding_epsilon, "Hoeffding total failure probability")
        ->capture_default_str();
    cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
}

rr::GraphDocument load_graph(const Common& c) {
    rr::GraphDocument doc = rr::read_graph_file(c.graph);
    if (std::abs(doc.delta_t - c.delta_t) > 1e-12 * std::max(1.0, c.delta_t)) {
        throw rr::Error(rr::ErrorCode::configuration, "--delta-t " + rr::format_number(c.delta_t) +
                                                          " does not match the graph file (" +
                                                          rr::format_number(doc.delta_t) + ")");
    }
    return doc;
}

rr::InnerMethod inner_method(const std::string& name) {
    if (name == "auto") return rr::InnerMethod::automatic;
    if (name == "mean_only") return rr::InnerMethod::mean_only;
    if (name == "piecewise_const") return rr::InnerMethod::piecewise_constant;
    return rr::InnerMethod::column_generation;
}

rr::ConvolutionEngine engine(const std::string& name) {
    if (name == "pointwise") return rr::ConvolutionEngine::pointwise;
    if (name == "fft") return rr::ConvolutionEngine::fft_block;
    if (name == "streaming") return rr::ConvolutionEngine::streaming;
    return rr::ConvolutionEngine::automatic;
}

void write_policy_doc(const Common& c, const rr::Graph& graph, const rr::PolicyTable& policy,
                      const rr::ValueTable& values) {
    Output out(c.out);
    rr::write_policy(out.stream(), graph, {c.budget, policy, values});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-averse adaptive routing on stochastic graphs"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "riskroute 0.1.0");

    Common common;
    const auto add_common = [&](CLI::App* cmd, bool needs_budget) {
        cmd->add_option("--graph", common.graph, "Graph JSON file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--delta-t", common.delta_t, "Grid step; must match the graph file")
            ->required()
            ->check(CLI::PositiveNumber);
        if (needs_budget) {
            cmd->add_option("-T,--budget", common.budget, "Total budget")->required()->check(CLI::PositiveNumber);
            cmd->add_option("--risk", common.risk, "Risk function")
                ->check(CLI::IsMember({"on-time", "expected-overrun", "squared-overrun"}))
                ->capture_default_str();
        }
        cmd->add_option("-o,--out", common.out, "Output file (default stdout)");
    };

    double tie_tolerance = 1e-12;
    double epsilon = 1e-8;

    auto* nominal = app.add_subcommand("solve-nominal", "Solve with known arc-cost distributions");
    add_common(nominal, true);
    std::string engine_name = "auto";
    nominal->add_option("--engine", engine_name, "Convolution engine")
        ->check(CLI::IsMember({"auto", "pointwise", "fft", "streaming"}))
        ->capture_default_str();

    auto* robust = app.add_subcommand("solve-robust", "Solve against ambiguity sets");
    add_common(robust, true);
    std::string preset = "robust-m";
    std::string samples_file;
    std::string statistics_file;
    std::string inner = "auto";
    PresetFlags robust_flags;
    robust->add_option("--preset", preset, "Ambiguity sets")
        ->check(CLI::IsMember({"robust-m", "robust-md", "statistics"}))
        ->capture_default_str();
    robust->add_option("--samples", samples_file, "Samples CSV for the presets")->check(CLI::ExistingFile);
    robust->add_option("--statistics", statistics_file, "Statistics JSON for --preset statistics")
        ->check(CLI::ExistingFile);
    robust->add_option("--inner", inner, "Inner problem method")
        ->check(CLI::IsMember({"auto", "mean_only", "piecewise_const", "column_gen"}))
        ->capture_default_str();
    robust->add_option("--epsilon", epsilon, "Inner problem feasibility tolerance")->capture_default_str();
    add_preset_flags(robust, robust_flags);

    auto* eval = app.add_subcommand("eval-policy", "Evaluate a policy under the graph's distributions");
    add_common(eval, true);
    std::string policy_file;
    std::size_t runs = 0;
    std::uint64_t eval_seed = 0;
    eval->add_option("--policy", policy_file, "Policy JSON file")->required()->check(CLI::ExistingFile);
    eval->add_option("--runs", runs, "Monte Carlo runs (0 skips simulation)")->capture_default_str();
    eval->add_option("--seed", eval_seed, "Random seed")->capture_default_str();

    auto* experiment = app.add_subcommand("experiment", "Subsampling experiment over methods and budgets");
    add_common(experiment, false);
    rr::ExperimentConfig config;
    std::vector<std::string> methods{"RobustM", "RobustMD", "Empirical", "LET"};
    PresetFlags experiment_flags;
    bool no_timing = false;
    experiment->add_option("--samples", samples_file, "Full samples CSV")->required()->check(CLI::ExistingFile);
    experiment->add_option("--lambda", config.lambda_fractions, "Sample fractions")->capture_default_str();
    experiment->add_option("--replications", config.replications, "Replications per fraction")
        ->capture_default_str();
    experiment->add_option("--methods", methods, "Methods")
        ->check(CLI::IsMember({"RobustM", "RobustMD", "Empirical", "LET"}))
        ->capture_default_str();
    experiment->add_option("--budget-points", config.budget_points, "Normalized budget points")
        ->capture_default_str();
    experiment->add_option("--threads", config.threads, "Worker threads (0 = all cores)")->capture_default_str();
    experiment->add_flag("--no-timing", no_timing, "Report runtime_ms as 0");
    experiment->add_option("--epsilon", epsilon, "Inner problem feasibility tolerance")->capture_default_str();
    add_preset_flags(experiment, experiment_flags);

    auto* bin = app.add_subcommand("bin-samples", "Attach empirical pmfs from samples to a graph");
    add_common(bin, false);
    bin->add_option("--samples", samples_file, "Samples CSV")->required()->check(CLI::ExistingFile);

    auto* synth = app.add_subcommand("synthesize", "Write a built-in instance and samples drawn from it");
    std::string instance = "two-route";
    std::string graph_out;
    std::string samples_out;
    std::size_t per_arc = 2000;
    std::uint64_t synth_seed = 0;
    synth->add_option("--instance", instance, "Instance")
        ->check(CLI::IsMember({"two-route", "loop"}))
        ->capture_default_str();
    synth->add_option("--graph-out", graph_out, "Graph JSON output")->required();
    synth->add_option("--samples-out", samples_out, "Samples CSV output");
    synth->add_option("--samples-per-arc", per_arc, "Samples per arc")->capture_default_str();
    synth->add_option("--seed", synth_seed, "Random seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageExit;
    }

    try {
        rr::RobustOptions robust_options;
        if (auto v = env_double("RISKROUTE_TIE_TOL")) tie_tolerance = *v;
        if (auto v = env_double("RISKROUTE_FEAS_TOL"); v && robust->count("--epsilon") == 0 &&
                                                       experiment->count("--epsilon") == 0) {
            epsilon = *v;
        }
        robust_options.tie_tolerance = tie_tolerance;
        robust_options.inner.feasibility_tolerance = epsilon;
        robust_options.method = inner_method(inner);

        if (*nominal) {
            const rr::GraphDocument doc = load_graph(common);
            rr::NominalOptions options;
            options.engine = engine(engine_name);
            options.tie_tolerance = tie_tolerance;
            const rr::BudgetGrid grid(common.delta_t, common.budget);
            const auto sol = rr::solve_nominal(doc.graph, doc.distributions(),
                                               rr::RiskFunction::from_name(common.risk), grid, options);
            write_policy_doc(common, doc.graph, sol.policy, sol.values);
        } else if (*robust) {
            const rr::GraphDocument doc = load_graph(common);
            const double dt = common.delta_t;
            std::vector<rr::AmbiguitySet> sets;
            rr::Graph graph = doc.graph;
            if (preset == "statistics") {
                if (statistics_file.empty()) {
                    throw rr::Error(rr::ErrorCode::configuration, "--preset statistics needs --statistics");
                }
                sets = rr::read_statistics_file(statistics_file, graph, dt);
            } else {
                if (samples_file.empty()) throw rr::Error(rr::ErrorCode::configuration, "--preset needs --samples");
                const auto samples = rr::read_samples_file(samples_file, graph);
                std::vector<double> inf(samples.size());
                std::vector<double> sup(samples.size());
                const std::size_t per_set = preset == "robust-m" ? 1 : 2;
                for (std::size_t a = 0; a < samples.size(); ++a) {
                    if (samples[a].empty()) {
                        const rr::Arc& arc = graph.arcs()[a];
                        throw rr::Error(rr::ErrorCode::configuration,
                                        "no samples for arc " + graph.label(arc.tail) + "->" + graph.label(arc.head));
                    }
                    rr::PresetConfig cfg = robust_flags.config(dt, per_set * samples.size());
                    cfg.seed = rr::replication_seed(robust_flags.seed, 0, a);
                    sets.push_back(preset == "robust-m" ? rr::preset_robust_m(samples[a], cfg)
                                                        : rr::preset_robust_md(samples[a], cfg));
                    inf[a] = static_cast<double>(sets.back().support_first()) * dt;
                    sup[a] = static_cast<double>(sets.back().support_last()) * dt;
                }
                graph = graph.with_bounds(inf, sup);
            }
            const rr::BudgetGrid grid(dt, common.budget);
            const auto sol =
                rr::solve_robust(graph, sets, rr::RiskFunction::from_name(common.risk), grid, robust_options);
            write_policy_doc(common, graph, sol.policy, sol.values);
        } else if (*eval) {
            const rr::GraphDocument doc = load_graph(common);
            const auto pmfs = doc.distributions();
            const rr::PolicyDocument policy = rr::read_policy_file(policy_file, doc.graph);
            const rr::RiskFunction risk = rr::RiskFunction::from_name(common.risk);
            const rr::BudgetGrid grid(common.delta_t, common.budget);
            const rr::ValueTable exact = rr::evaluate_policy_exact(doc.graph, pmfs, policy.policy, risk, grid);
            nlohmann::ordered_json j;
            j["budget"] = rr::format_number(common.budget);
            j["exact"] = exact.value(doc.graph.source(), common.budget);
            if (runs > 0) {
                const auto sim =
                    rr::simulate_policy(doc.graph, pmfs, policy.policy, risk, common.budget, runs, eval_seed);
                j["simulation"] = {{"mean", sim.mean},
                                   {"std_error", sim.std_error},
                                   {"runs", sim.runs},
                                   {"max_arcs", sim.max_arcs},
                                   {"looping_runs", sim.looping_runs},
                                   {"revisits", sim.revisits}};
            }
            Output out(common.out);
            out.stream() << j.dump(2) << '\n';
        } else if (*experiment) {
            const rr::GraphDocument doc = load_graph(common);
            const auto samples = rr::read_samples_file(samples_file, doc.graph);
            config.delta_t = common.delta_t;
            config.seed = experiment_flags.seed;
            config.record_timing = !no_timing;
            config.methods.clear();
            for (const auto& m : methods) config.methods.push_back(rr::method_from_name(m));
            config.preset = experiment_flags.config(common.delta_t, 2 * doc.graph.arc_count());
            config.robust = robust_options;
            const rr::ExperimentReport report = rr::run_experiment(doc.graph, samples, config);
            if (report.failures > 0) {
                std::cerr << "warning: " << report.failures << " method runs failed and were excluded\n";
                for (const auto& msg : report.failure_messages) std::cerr << "  " << msg << '\n';
            }
            Output out(common.out);
            rr::write_report_csv(out.stream(), report);
        } else if (*bin) {
            rr::GraphDocument doc = load_graph(common);
            const auto samples = rr::read_samples_file(samples_file, doc.graph);
            for (std::size_t a = 0; a < samples.size(); ++a) {
                const rr::Arc& arc = doc.graph.arcs()[a];
                if (samples[a].empty()) {
                    throw rr::Error(rr::ErrorCode::configuration,
                                    "no samples for arc " + doc.graph.label(arc.tail) + "->" +
                                        doc.graph.label(arc.head));
                }
                doc.pmfs[a] = rr::bin_samples(samples[a], common.delta_t, rr::to_grid_units(arc.delta_inf, common.delta_t),
                                              rr::to_grid_units(arc.delta_sup, common.delta_t));
            }
            Output out(common.out);
            rr::write_graph(out.stream(), doc);
        } else if (*synth) {
            rr::Instance inst = instance == "loop" ? rr::loop_instance() : rr::synthetic_two_route_network();
            rr::GraphDocument doc{inst.delta_t, inst.graph, {}, {}};
            for (const auto& p : inst.pmfs) doc.pmfs.emplace_back(p);
            {
                Output out(graph_out);
                rr::write_graph(out.stream(), doc);
            }
            if (!samples_out.empty()) {
                Output out(samples_out);
                rr::write_samples(out.stream(), inst.graph, rr::draw_samples(inst.pmfs, per_arc, synth_seed));
            }
        }
    } catch (const rr::Error& e) {
        std::cerr << "error (" << rr::to_string(e.code()) << "): " << e.what() << '\n';
        return rr::exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
