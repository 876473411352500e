#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "riskroute/ambiguity.hpp"
#include "riskroute/convolution.hpp"
#include "riskroute/grid.hpp"
#include "riskroute/sliding_hull.hpp"

namespace riskroute {

// The inner problem at step k is
//   min  sum_l p_l u(k - l)   over distributions p on the support of the set,
// where l ranges over grid offsets of the arc cost.

/// Dual variables: z for the normalization row, x_q for alpha_q and y_q for beta_q.
/// Infinite bounds keep their variable at zero.
struct DualSolution {
    double z = 0.0;
    std::vector<double> x;
    std::vector<double> y;

    /// z + sum_q (alpha_q x_q - beta_q y_q), skipping infinite bounds.
    double objective(const AmbiguitySet& set) const;
};

/// Active columns of a restricted primal LP and their weights. basis lists the
/// basic columns in the master numbering: offsets first, then the bound slacks,
/// then one artificial per row.
struct PrimalSupport {
    std::vector<GridIndex> offsets;
    std::vector<double> weights;
    std::vector<std::size_t> basis;
};

struct InnerOptions {
    double feasibility_tolerance = 1e-9;
    /// Column generation stops after this many times the support length in rounds.
    std::size_t iteration_factor = 10;
};

/// Full-grid primal LP. Throws ErrorCode::infeasible for an empty set.
double inner_bruteforce(const GridWindow& u, const AmbiguitySet& set, GridIndex k);

/// Same optimum from the dual side: max z + sum (alpha x - beta y) subject to one
/// constraint per grid offset.
double inner_dual_bruteforce(const GridWindow& u, const AmbiguitySet& set, GridIndex k);

/// One lower hull per refined piece of a set, over the points (m, u(m)) with
/// m = k - l for l in the piece.
class PieceHulls {
public:
    explicit PieceHulls(const AmbiguitySet& set);

    /// Moves to step k: advances by one point when k follows the current step,
    /// rebuilds otherwise. u must cover [k - support_last, k - support_first].
    void sync(GridIndex k, const GridWindow& u);

    bool at_step(GridIndex k) const noexcept { return ready_ && step_ == k; }
    GridIndex step() const noexcept { return step_; }
    std::span<const SlidingUpperHull> hulls() const noexcept { return hulls_; }
    const SlidingUpperHull& hull(std::size_t piece) const { return hulls_.at(piece); }

    std::size_t rebuilds() const noexcept { return rebuilds_; }
    std::size_t advances() const noexcept { return advances_; }

private:
    const AmbiguitySet* set_;
    std::vector<SlidingUpperHull> hulls_;
    GridIndex step_ = 0;
    bool ready_ = false;
    std::size_t rebuilds_ = 0;
    std::size_t advances_ = 0;
};

/// Dual constraint with the smallest slack u(k - l) - z - sum_q (x_q - y_q) g_q(l).
struct ViolatedConstraint {
    GridIndex offset = 0;
    double slack = 0.0;
};

/// Most violated dual constraint, found by one hull search per refined piece.
/// Returns nothing when every slack is at least -tolerance * max(1, |u|).
/// Throws ErrorCode::state unless the hulls are at step k.
std::optional<ViolatedConstraint> separation_oracle(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k,
                                                    const DualSolution& dual, double tolerance = 1e-9);

struct ColumnGenerationResult {
    double value = 0.0;
    PrimalSupport support;
    DualSolution dual;
    std::size_t iterations = 0;
};

/// Restricted master LP over a growing set of grid offsets, priced by the
/// separation oracle. The warm start seeds the master; when it is empty the
/// seed is the support of the set's feasible distribution plus the cheapest
/// point of every refined piece. Throws ErrorCode::nonconvergence past
/// the iteration cap.
ColumnGenerationResult inner_column_generation(const GridWindow& u, const AmbiguitySet& set, const PieceHulls& hulls,
                                               GridIndex k, const PrimalSupport& warm_start,
                                               const InnerOptions& options = {});

/// Mean-only sets: the lower convex envelope of l -> u(k - l), minimized over the
/// admissible mean interval. Throws ErrorCode::configuration for other shapes.
double inner_mean_only(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k);

/// Piecewise-constant statistics: per-piece minima plus a small LP with one
/// column per refined piece. Throws ErrorCode::configuration for nonzero slopes.
double inner_piecewise_constant(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k);

enum class InnerMethod {
    automatic,  ///< chosen from the set's shape
    mean_only,
    piecewise_constant,
    column_generation,
};

const char* to_string(InnerMethod method) noexcept;

/// Inner problem of one arc across increasing steps, reusing hulls and the
/// previous primal support.
class InnerProblem {
public:
    explicit InnerProblem(const AmbiguitySet& set, InnerMethod method = InnerMethod::automatic,
                          InnerOptions options = {});

    InnerProblem(const InnerProblem&) = delete;
    InnerProblem& operator=(const InnerProblem&) = delete;
    InnerProblem(InnerProblem&&) = default;

    double evaluate(GridIndex k, const GridWindow& u);

    InnerMethod method() const noexcept { return method_; }
    const AmbiguitySet& set() const noexcept { return *set_; }
    const PieceHulls& hulls() const noexcept { return hulls_; }
    /// Column-generation rounds of the last and of all evaluations.
    std::size_t last_iterations() const noexcept { return last_iterations_; }
    std::size_t total_iterations() const noexcept { return total_iterations_; }

private:
    const AmbiguitySet* set_;
    InnerMethod method_;
    InnerOptions options_;
    PieceHulls hulls_;
    PrimalSupport support_;
    std::size_t last_iterations_ = 0;
    std::size_t total_iterations_ = 0;
};

}  // namespace riskroute
