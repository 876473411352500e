#include "riskroute/grid.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

constexpr double kGridSlack = 1e-9;

void require_step(double delta_t) {
    if (!(delta_t > 0.0) || !std::isfinite(delta_t)) {
        throw Error(ErrorCode::configuration, "delta_t must be positive and finite");
    }
}

}  // namespace

GridIndex to_grid_units(double value, double delta_t) {
    require_step(delta_t);
    const double ratio = value / delta_t;
    const double nearest = std::round(ratio);
    if (!std::isfinite(ratio) || std::abs(ratio - nearest) > kGridSlack * std::max(1.0, std::abs(ratio))) {
        std::ostringstream msg;
        msg << "value " << value << " is not a multiple of delta_t " << delta_t;
        throw Error(ErrorCode::configuration, msg.str());
    }
    return static_cast<GridIndex>(nearest);
}

GridIndex floor_to_grid(double value, double delta_t) {
    require_step(delta_t);
    const double ratio = value / delta_t;
    return static_cast<GridIndex>(std::floor(ratio + kGridSlack * std::max(1.0, std::abs(ratio))));
}

GridIndex ceil_to_grid(double value, double delta_t) {
    require_step(delta_t);
    const double ratio = value / delta_t;
    return static_cast<GridIndex>(std::ceil(ratio - kGridSlack * std::max(1.0, std::abs(ratio))));
}

GridIndex round_to_grid(double value, double delta_t) {
    require_step(delta_t);
    const double ratio = value / delta_t;
    return static_cast<GridIndex>(std::floor(ratio + 0.5 + kGridSlack * std::max(1.0, std::abs(ratio))));
}

BudgetGrid::BudgetGrid(double delta_t, double total_budget)
    : delta_t_(delta_t), total_budget_(total_budget) {
    require_step(delta_t);
    if (!std::isfinite(total_budget)) {
        throw Error(ErrorCode::configuration, "total budget must be finite");
    }
    if (total_budget < 0.0) {
        throw Error(ErrorCode::configuration, "total budget must be nonnegative");
    }
    last_index_ = floor_to_grid(total_budget, delta_t);
    ceil_index_ = ceil_to_grid(total_budget, delta_t);
}

GridDistribution::GridDistribution(double delta_t, GridIndex first_index, std::vector<double> weights)
    : delta_t_(delta_t), first_(first_index), weights_(std::move(weights)) {
    require_step(delta_t);
    if (weights_.empty()) {
        throw Error(ErrorCode::configuration, "distribution has no support");
    }
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw Error(ErrorCode::configuration, "distribution weights must be finite and nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "distribution weights sum to " << total << ", expected 1";
        throw Error(ErrorCode::configuration, msg.str());
    }
}

GridDistribution GridDistribution::point_mass(double delta_t, GridIndex index) {
    return GridDistribution(delta_t, index, {1.0});
}

double GridDistribution::weight(GridIndex k) const noexcept {
    if (k < first_ || k > last_index()) return 0.0;
    return weights_[static_cast<std::size_t>(k - first_)];
}

double GridDistribution::mean() const noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        m += weights_[i] * static_cast<double>(first_ + static_cast<GridIndex>(i)) * delta_t_;
    }
    return m;
}

GridIndex GridDistribution::min_support() const noexcept {
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        if (weights_[i] > 0.0) return first_ + static_cast<GridIndex>(i);
    }
    return first_;
}

GridIndex GridDistribution::max_support() const noexcept {
    for (std::size_t i = weights_.size(); i-- > 0;) {
        if (weights_[i] > 0.0) return first_ + static_cast<GridIndex>(i);
    }
    return last_index();
}

}  // namespace riskroute
