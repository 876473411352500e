#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "riskroute/grid.hpp"
#include "riskroute/linear_program.hpp"

namespace riskroute {

/// g(w) = slope * w + intercept on [lo, hi). The final piece of a statistic is closed.
struct StatisticPiece {
    double lo = 0.0;
    double hi = 0.0;
    double slope = 0.0;
    double intercept = 0.0;
};

/// Piecewise-affine function of the arc cost whose pieces partition a closed interval.
class PiecewiseAffineStatistic {
public:
    PiecewiseAffineStatistic() = default;
    explicit PiecewiseAffineStatistic(std::vector<StatisticPiece> pieces, std::string name = {});

    /// g(w) = w on [lo, hi].
    static PiecewiseAffineStatistic identity(double lo, double hi);
    /// g(w) = |w - center| on [lo, hi], split at the first grid point >= center so
    /// that grid evaluations are exact.
    static PiecewiseAffineStatistic absolute_deviation(double lo, double hi, double center, double delta_t);
    /// 1 on grid points a..b (inclusive), 0 on the other grid points of [lo, hi].
    static PiecewiseAffineStatistic grid_indicator(double delta_t, GridIndex lo, GridIndex hi, GridIndex a,
                                                   GridIndex b);

    std::span<const StatisticPiece> pieces() const noexcept { return pieces_; }
    const std::string& name() const noexcept { return name_; }
    double lo() const noexcept { return pieces_.front().lo; }
    double hi() const noexcept { return pieces_.back().hi; }

    /// Throws ErrorCode::domain outside [lo, hi].
    double operator()(double w) const;

    bool is_identity() const noexcept;
    bool is_piecewise_constant() const noexcept;
    /// Smallest and largest value over the closure of every piece.
    std::pair<double, double> range() const noexcept;

private:
    std::vector<StatisticPiece> pieces_;
    std::string name_;
};

/// alpha <= E[g(X)] <= beta; either side may be infinite.
struct StatisticBound {
    double alpha = -std::numeric_limits<double>::infinity();
    double beta = std::numeric_limits<double>::infinity();
};

struct BoundedStatistic {
    PiecewiseAffineStatistic statistic;
    StatisticBound bound;
};

/// Maximal grid interval on which every statistic is affine.
struct RefinedPiece {
    GridIndex first = 0;  ///< first grid index
    GridIndex last = 0;   ///< last grid index (inclusive)
    std::vector<double> slope;      ///< per statistic
    std::vector<double> intercept;  ///< per statistic
};

enum class AmbiguityShape {
    mean_only,           ///< a single identity statistic
    piecewise_constant,  ///< every piece has zero slope
    general,
};

const char* to_string(AmbiguityShape shape) noexcept;

/// Distributions on the grid points of [support_first, support_last] whose
/// statistic expectations fall inside their bounds.
class AmbiguitySet {
public:
    /// Validates the statistics against the grid and checks nonemptiness with a
    /// feasibility LP. Throws ErrorCode::infeasible when no distribution qualifies.
    AmbiguitySet(double delta_t, GridIndex support_first, GridIndex support_last,
                 std::vector<BoundedStatistic> statistics);

    double delta_t() const noexcept { return delta_t_; }
    GridIndex support_first() const noexcept { return first_; }
    GridIndex support_last() const noexcept { return last_; }
    std::size_t support_size() const noexcept { return static_cast<std::size_t>(last_ - first_ + 1); }
    std::span<const BoundedStatistic> statistics() const noexcept { return stats_; }
    std::span<const RefinedPiece> refined_pieces() const noexcept { return pieces_; }
    AmbiguityShape shape() const noexcept { return shape_; }

    /// g_q at grid index l.
    double statistic_at(std::size_t q, GridIndex l) const;
    /// Index of the refined piece holding grid index l.
    std::size_t piece_of(GridIndex l) const;

    /// Member distribution found by the feasibility LP.
    const GridDistribution& feasible_distribution() const noexcept { return feasible_; }

    /// True when the weights satisfy every bound within tol.
    bool contains(const GridDistribution& pmf, double tol = 1e-9) const;

    /// Copy with every bound replaced.
    AmbiguitySet with_bounds(std::span<const StatisticBound> bounds) const;

private:
    double delta_t_;
    GridIndex first_;
    GridIndex last_;
    std::vector<BoundedStatistic> stats_;
    std::vector<RefinedPiece> pieces_;
    AmbiguityShape shape_ = AmbiguityShape::general;
    GridDistribution feasible_{1.0, 0, {1.0}};
};

/// Primal LP over the grid: min sum_l cost[l] p_l subject to sum p = 1 and the
/// statistic bounds, as equalities with surplus and slack columns.
/// Columns [0, support_size) are the grid weights.
struct GridLinearProgram {
    DenseMatrix a;
    std::vector<double> b;
    std::vector<double> c;
    /// Row of the lower (alpha) and upper (beta) bound of each statistic, or npos.
    std::vector<std::size_t> alpha_row;
    std::vector<std::size_t> beta_row;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

GridLinearProgram build_grid_program(const AmbiguitySet& set, std::span<const double> cost);

/// Same layout for arbitrary columns: column j has cost[j] and statistic values g(q, j).
template <class StatisticFn>
GridLinearProgram build_moment_program(std::span<const StatisticBound> bounds, std::span<const double> cost,
                                       StatisticFn&& g) {
    const std::size_t n = cost.size();
    GridLinearProgram lp;
    std::size_t rows = 1;
    std::size_t slacks = 0;
    lp.alpha_row.assign(bounds.size(), GridLinearProgram::npos);
    lp.beta_row.assign(bounds.size(), GridLinearProgram::npos);
    for (std::size_t q = 0; q < bounds.size(); ++q) {
        const bool lo = std::isfinite(bounds[q].alpha);
        const bool hi = std::isfinite(bounds[q].beta);
        if (lo && hi && bounds[q].alpha == bounds[q].beta) {
            lp.alpha_row[q] = lp.beta_row[q] = rows++;
            continue;
        }
        if (lo) {
            lp.alpha_row[q] = rows++;
            ++slacks;
        }
        if (hi) {
            lp.beta_row[q] = rows++;
            ++slacks;
        }
    }
    lp.a = DenseMatrix(rows, n + slacks);
    lp.b.assign(rows, 0.0);
    lp.c.assign(n + slacks, 0.0);
    std::copy(cost.begin(), cost.end(), lp.c.begin());
    lp.b[0] = 1.0;
    for (std::size_t j = 0; j < n; ++j) lp.a(0, j) = 1.0;
    std::size_t col = n;
    for (std::size_t q = 0; q < bounds.size(); ++q) {
        const std::size_t ra = lp.alpha_row[q];
        const std::size_t rb = lp.beta_row[q];
        for (std::size_t row : {ra, rb}) {
            if (row == GridLinearProgram::npos) continue;
            for (std::size_t j = 0; j < n; ++j) lp.a(row, j) = g(q, j);
        }
        if (ra != GridLinearProgram::npos) lp.b[ra] = bounds[q].alpha;
        if (rb != GridLinearProgram::npos) lp.b[rb] = bounds[q].beta;
        if (ra == rb) continue;
        if (ra != GridLinearProgram::npos) lp.a(ra, col++) = -1.0;
        if (rb != GridLinearProgram::npos) lp.a(rb, col++) = 1.0;
    }
    return lp;
}

/// E[g(X)] under a grid distribution. Throws ErrorCode::domain if mass escapes g's domain.
double statistic_value(const PiecewiseAffineStatistic& stat, const GridDistribution& pmf);

/// Hoeffding interval around the empirical mean of g, with a union bound over
/// total_statistics statistics at failure probability epsilon, clamped to g's range.
StatisticBound hoeffding_interval(std::span<const double> samples, const PiecewiseAffineStatistic& stat,
                                  std::size_t total_statistics, double epsilon);

/// Percentile bootstrap interval of the mean of g from `replicates` resamples.
StatisticBound bootstrap_interval(std::span<const double> samples, const PiecewiseAffineStatistic& stat,
                                  double level, std::size_t replicates, std::uint64_t seed);

enum class IntervalMethod { bootstrap, hoeffding };

struct PresetConfig {
    double delta_t = 1.0;
    IntervalMethod method = IntervalMethod::bootstrap;
    double level = 0.95;
    std::size_t replicates = 1000;
    std::uint64_t seed = 0;
    /// Hoeffding only.
    double epsilon = 0.05;
    std::size_t total_statistics = 1;
};

/// Sample minimum and maximum snapped outward to the grid; the lower end is at least one cell.
std::pair<GridIndex, GridIndex> support_from_samples(std::span<const double> samples, double delta_t);

/// Samples rounded half-up to the grid and clamped to [first, last], in budget units.
std::vector<double> snap_samples(std::span<const double> samples, double delta_t, GridIndex first, GridIndex last);

/// One mean statistic; its interval is widened to contain the empirical mean.
AmbiguitySet preset_robust_m(std::span<const double> samples, const PresetConfig& config);
/// Mean plus mean absolute deviation around the midpoint of the mean interval.
AmbiguitySet preset_robust_md(std::span<const double> samples, const PresetConfig& config);

/// Indicator statistics pinning every grid weight of pmf on [first, last].
AmbiguitySet pinned_set(const GridDistribution& pmf, GridIndex first, GridIndex last);

}  // namespace riskroute
