#include "riskroute/risk.hpp"

#include <cmath>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

RiskFunction RiskFunction::on_time() { return RiskFunction(RiskKind::on_time); }
RiskFunction RiskFunction::expected_overrun() { return RiskFunction(RiskKind::expected_overrun); }
RiskFunction RiskFunction::squared_overrun() { return RiskFunction(RiskKind::squared_overrun); }
RiskFunction RiskFunction::exp_utility() { return RiskFunction(RiskKind::exp_utility); }

RiskFunction RiskFunction::tabulated(double delta_t, GridIndex first_index, std::vector<double> values,
                                     std::optional<double> threshold) {
    if (!(delta_t > 0.0)) throw Error(ErrorCode::configuration, "tabulated risk needs a positive delta_t");
    if (values.empty()) throw Error(ErrorCode::configuration, "tabulated risk has no samples");
    RiskFunction f(RiskKind::tabulated);
    f.table_step_ = delta_t;
    f.table_first_ = first_index;
    f.table_ = std::move(values);
    f.threshold_ = threshold;
    return f;
}

RiskFunction RiskFunction::from_name(std::string_view name) {
    if (name == "on-time") return on_time();
    if (name == "expected-overrun") return expected_overrun();
    if (name == "squared-overrun") return squared_overrun();
    if (name == "exp-utility") return exp_utility();
    throw Error(ErrorCode::configuration, "unknown risk function '" + std::string(name) + "'");
}

std::string RiskFunction::name() const {
    switch (kind_) {
        case RiskKind::on_time: return "on-time";
        case RiskKind::expected_overrun: return "expected-overrun";
        case RiskKind::squared_overrun: return "squared-overrun";
        case RiskKind::exp_utility: return "exp-utility";
        case RiskKind::tabulated: return "tabulated";
    }
    return "unknown";
}

double RiskFunction::operator()(double t) const {
    switch (kind_) {
        case RiskKind::on_time: return t >= 0.0 ? 1.0 : 0.0;
        case RiskKind::expected_overrun: return t <= 0.0 ? t : 0.0;
        case RiskKind::squared_overrun: return t <= 0.0 ? -t * t : 0.0;
        case RiskKind::exp_utility: return -std::exp(-t);
        case RiskKind::tabulated: {
            const GridIndex k = to_grid_units(t, table_step_);
            return at_grid(k, table_step_);
        }
    }
    return 0.0;
}

double RiskFunction::at_grid(GridIndex k, double delta_t) const {
    if (kind_ != RiskKind::tabulated) {
        const double t = static_cast<double>(k) * delta_t;
        // exact zero at k == 0 keeps the indicator's jump on the grid point
        return (*this)(k == 0 ? 0.0 : t);
    }
    if (std::abs(delta_t - table_step_) > 1e-12 * table_step_) {
        throw Error(ErrorCode::configuration, "tabulated risk was sampled on a different delta_t");
    }
    const GridIndex pos = k - table_first_;
    if (pos < 0 || pos >= static_cast<GridIndex>(table_.size())) {
        std::ostringstream msg;
        msg << "tabulated risk has no sample at grid index " << k << " (covers " << table_first_ << ".."
            << table_first_ + static_cast<GridIndex>(table_.size()) - 1 << ")";
        throw Error(ErrorCode::configuration, msg.str());
    }
    return table_[static_cast<std::size_t>(pos)];
}

}  // namespace riskroute
