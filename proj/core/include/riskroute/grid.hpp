#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace riskroute {

/// Integer position on the budget grid: budget = index * delta_t.
using GridIndex = std::int64_t;

/// Converts a budget value to grid units. Throws a configuration error unless the
/// value is a multiple of delta_t (relative tolerance 1e-9).
GridIndex to_grid_units(double value, double delta_t);

/// floor(value / delta_t), robust to representation error of grid multiples.
GridIndex floor_to_grid(double value, double delta_t);

/// ceil(value / delta_t), robust to representation error of grid multiples.
GridIndex ceil_to_grid(double value, double delta_t);

/// Nearest grid index, ties rounded up.
GridIndex round_to_grid(double value, double delta_t);

/// Uniform budget discretization.
class BudgetGrid {
public:
    BudgetGrid(double delta_t, double total_budget);

    double delta_t() const noexcept { return delta_t_; }
    double total_budget() const noexcept { return total_budget_; }
    /// floor(T / delta_t)
    GridIndex last_index() const noexcept { return last_index_; }
    /// ceil(T / delta_t); differs from last_index() when T is off-grid.
    GridIndex ceil_index() const noexcept { return ceil_index_; }
    double budget(GridIndex k) const noexcept { return static_cast<double>(k) * delta_t_; }

private:
    double delta_t_;
    double total_budget_;
    GridIndex last_index_;
    GridIndex ceil_index_;
};

/// Probability mass function supported on consecutive multiples of delta_t,
/// starting at first_index() * delta_t.
class GridDistribution {
public:
    GridDistribution(double delta_t, GridIndex first_index, std::vector<double> weights);

    static GridDistribution point_mass(double delta_t, GridIndex index);

    double delta_t() const noexcept { return delta_t_; }
    GridIndex first_index() const noexcept { return first_; }
    GridIndex last_index() const noexcept { return first_ + static_cast<GridIndex>(weights_.size()) - 1; }
    std::size_t size() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    /// Mass at grid index k (zero outside the stored range).
    double weight(GridIndex k) const noexcept;
    double mean() const noexcept;

    /// Smallest/largest grid index carrying positive mass.
    GridIndex min_support() const noexcept;
    GridIndex max_support() const noexcept;

    friend bool operator==(const GridDistribution&, const GridDistribution&) = default;

private:
    double delta_t_;
    GridIndex first_;
    std::vector<double> weights_;
};

}  // namespace riskroute
