#pragma once

#include <span>

#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/preprocess.hpp"
#include "riskroute/risk.hpp"
#include "riskroute/tables.hpp"

namespace riskroute {

enum class ConvolutionEngine {
    automatic,  ///< pointwise below 32 support cells, streaming otherwise
    pointwise,
    fft_block,
    streaming,
};

struct NominalOptions {
    ConvolutionEngine engine = ConvolutionEngine::automatic;
    /// Values within this relative distance of the row maximum count as ties.
    double tie_tolerance = 1e-12;
};

struct NominalSolution {
    TreePreprocess tree;
    ValueTable values;
    PolicyTable policy;
};

/// Piecewise-constant discretization of the Bellman recursion. Rows below the
/// threshold follow the mean shortest-path tree in breadth-first order; the rest
/// are filled in blocks of the smallest delta_inf, maximizing over all successors.
/// Ties go to the smaller expected cost-to-go, then to the smaller node id.
NominalSolution solve_nominal(const Graph& graph, std::span<const GridDistribution> distributions,
                              const RiskFunction& risk, const BudgetGrid& grid, const NominalOptions& options = {});

/// Expected risk of following a fixed policy, computed by the same recursion
/// without the maximization. Rows are materialized from the policy's threshold
/// down to where the tree-following recursion needs them.
ValueTable evaluate_policy_exact(const Graph& graph, std::span<const GridDistribution> distributions,
                                 const PolicyTable& policy, const RiskFunction& risk, const BudgetGrid& grid);

/// First row evaluate_policy_exact materializes for each node.
std::vector<GridIndex> policy_row_floor(const Graph& graph, const PolicyTable& policy, double delta_t);

}  // namespace riskroute
