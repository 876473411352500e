#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "riskroute/grid.hpp"

namespace riskroute {

enum class RiskKind {
    on_time,           ///< f(t) = 1 if t >= 0
    expected_overrun,  ///< f(t) = t if t <= 0, else 0
    squared_overrun,   ///< f(t) = -t^2 if t <= 0, else 0
    exp_utility,       ///< f(t) = -exp(-t)
    tabulated,         ///< grid samples plus a caller-supplied threshold
};

/// Payoff applied to the remaining budget at arrival; solvers maximize its expectation.
class RiskFunction {
public:
    static RiskFunction on_time();
    static RiskFunction expected_overrun();
    static RiskFunction squared_overrun();
    static RiskFunction exp_utility();
    /// values[i] = f((first_index + i) * delta_t). The threshold is mandatory for solving.
    static RiskFunction tabulated(double delta_t, GridIndex first_index, std::vector<double> values,
                                  std::optional<double> threshold);

    /// Parses "on-time", "expected-overrun", "squared-overrun", "exp-utility".
    static RiskFunction from_name(std::string_view name);

    RiskKind kind() const noexcept { return kind_; }
    std::string name() const;

    /// Closed-form evaluation; tabulated risks require t to fall on a stored grid point.
    double operator()(double t) const;
    double at_grid(GridIndex k, double delta_t) const;

    std::optional<double> tabulated_threshold() const noexcept { return threshold_; }

private:
    explicit RiskFunction(RiskKind kind) : kind_(kind) {}

    RiskKind kind_;
    double table_step_ = 0.0;
    GridIndex table_first_ = 0;
    std::vector<double> table_;
    std::optional<double> threshold_;
};

}  // namespace riskroute
