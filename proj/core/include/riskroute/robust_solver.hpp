#pragma once

#include <span>
#include <vector>

#include "riskroute/ambiguity.hpp"
#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/inner_problem.hpp"
#include "riskroute/preprocess.hpp"
#include "riskroute/risk.hpp"
#include "riskroute/tables.hpp"

namespace riskroute {

struct RobustOptions {
    InnerMethod method = InnerMethod::automatic;
    InnerOptions inner;
    /// Values within this relative distance of the row maximum count as ties.
    double tie_tolerance = 1e-12;
};

struct RobustSolution {
    /// Tree, threshold and first rows for the worst-case means.
    TreePreprocess tree;
    std::vector<double> worst_case_means;
    /// Piecewise-linear rows up to ceil(T / delta_t).
    ValueTable values;
    PolicyTable policy;
    /// Column-generation rounds summed over every inner problem.
    std::size_t inner_iterations = 0;
};

/// Largest expected cost over the set, from one LP.
double worst_case_mean(const AmbiguitySet& set);

/// Checks that every set lives on delta_t and spans exactly its arc's support.
void validate_ambiguity(const Graph& graph, std::span<const AmbiguitySet> sets, double delta_t);

/// Robust Bellman recursion with piecewise-linear value functions. Each arc keeps
/// one inner problem whose hulls advance by one point per budget row. Rows below
/// the threshold follow the worst-case mean tree. Nonconvergent inner problems
/// are rethrown with the arc and row that failed.
RobustSolution solve_robust(const Graph& graph, std::span<const AmbiguitySet> sets, const RiskFunction& risk,
                            const BudgetGrid& grid, const RobustOptions& options = {});

/// Worst-case expected risk of a fixed policy: the robust recursion without the
/// maximization over successors.
ValueTable robust_policy_guarantee(const Graph& graph, std::span<const AmbiguitySet> sets, const PolicyTable& policy,
                                   const RiskFunction& risk, const BudgetGrid& grid, const RobustOptions& options = {});

}  // namespace riskroute
