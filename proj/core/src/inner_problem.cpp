#include "riskroute/inner_problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "riskroute/errors.hpp"
#include "riskroute/linear_program.hpp"

namespace riskroute {

namespace {

std::vector<StatisticBound> bounds_of(const AmbiguitySet& set) {
    std::vector<StatisticBound> out;
    for (const auto& st : set.statistics()) out.push_back(st.bound);
    return out;
}

std::vector<double> window_costs(const GridWindow& u, const AmbiguitySet& set, GridIndex k) {
    std::vector<double> cost;
    cost.reserve(set.support_size());
    for (GridIndex l = set.support_first(); l <= set.support_last(); ++l) cost.push_back(u.at(k - l));
    return cost;
}

void require_step(const PieceHulls& hulls, GridIndex k) {
    if (!hulls.at_step(k)) {
        std::ostringstream msg;
        msg << "hulls are at step " << hulls.step() << ", expected " << k;
        throw Error(ErrorCode::state, msg.str());
    }
}

void require_optimal(const LpResult& res, const char* what) {
    if (res.status == LpStatus::optimal) return;
    if (res.status == LpStatus::infeasible) {
        throw Error(ErrorCode::infeasible, std::string(what) + ": ambiguity set is empty");
    }
    throw Error(ErrorCode::numeric, std::string(what) + " ended with status " + to_string(res.status));
}

DualSolution dual_from_rows(const GridLinearProgram& lp, const LpResult& res) {
    DualSolution dual;
    dual.z = res.duals[0];
    const std::size_t q_count = lp.alpha_row.size();
    dual.x.assign(q_count, 0.0);
    dual.y.assign(q_count, 0.0);
    for (std::size_t q = 0; q < q_count; ++q) {
        const std::size_t ra = lp.alpha_row[q];
        const std::size_t rb = lp.beta_row[q];
        if (ra != GridLinearProgram::npos && ra == rb) {
            dual.x[q] = std::max(res.duals[ra], 0.0);
            dual.y[q] = std::max(-res.duals[ra], 0.0);
            continue;
        }
        if (ra != GridLinearProgram::npos) dual.x[q] = res.duals[ra];
        if (rb != GridLinearProgram::npos) dual.y[q] = -res.duals[rb];
    }
    return dual;
}

double envelope_at(const SlidingUpperHull& hull, double x) {
    const std::size_t n = hull.extreme_count();
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    if (x <= hull.extreme(0).x) return hull.extreme(0).y;
    if (x >= hull.extreme(hi).x) return hull.extreme(hi).y;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (hull.extreme(mid).x <= x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const HullPoint a = hull.extreme(lo);
    const HullPoint b = hull.extreme(hi);
    const double t = (x - a.x) / (b.x - a.x);
    return (1.0 - t) * a.y + t * b.y;
}

}  // namespace

double DualSolution::objective(const AmbiguitySet& set) const {
    double v = z;
    const auto stats = set.statistics();
    for (std::size_t q = 0; q < stats.size(); ++q) {
        if (std::isfinite(stats[q].bound.alpha) && q < x.size()) v += stats[q].bound.alpha * x[q];
        if (std::isfinite(stats[q].bound.beta) && q < y.size()) v -= stats[q].bound.beta * y[q];
    }
    return v;
}

double inner_bruteforce(const GridWindow& u, const AmbiguitySet& set, GridIndex k) {
    const std::vector<double> cost = window_costs(u, set, k);
    const GridLinearProgram lp = build_grid_program(set, cost);
    const LpResult res = solve_lp(lp.a, lp.b, lp.c);
    require_optimal(res, "inner linear program");
    return res.objective;
}

double inner_dual_bruteforce(const GridWindow& u, const AmbiguitySet& set, GridIndex k) {
    const auto stats = set.statistics();
    const std::size_t rows = set.support_size();
    // columns: z+, z-, x_q (finite alpha), y_q (finite beta), one slack per row
    std::vector<std::vector<double>> cols;
    std::vector<double> obj;
    const auto add = [&](double c, auto&& entry) {
        std::vector<double> col(rows);
        for (std::size_t r = 0; r < rows; ++r) col[r] = entry(r);
        cols.push_back(std::move(col));
        obj.push_back(c);
    };
    add(-1.0, [](std::size_t) { return 1.0; });
    add(1.0, [](std::size_t) { return -1.0; });
    for (std::size_t q = 0; q < stats.size(); ++q) {
        const auto g = [&, q](std::size_t r) { return set.statistic_at(q, set.support_first() + static_cast<GridIndex>(r)); };
        if (std::isfinite(stats[q].bound.alpha)) add(-stats[q].bound.alpha, g);
        if (std::isfinite(stats[q].bound.beta)) add(stats[q].bound.beta, [&](std::size_t r) { return -g(r); });
    }
    for (std::size_t s = 0; s < rows; ++s) add(0.0, [s](std::size_t r) { return r == s ? 1.0 : 0.0; });

    DenseMatrix a(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        for (std::size_t r = 0; r < rows; ++r) a(r, j) = cols[j][r];
    }
    const std::vector<double> b = window_costs(u, set, k);
    const LpResult res = solve_lp(a, b, obj);
    if (res.status == LpStatus::unbounded) {
        throw Error(ErrorCode::infeasible, "dual inner program is unbounded: ambiguity set is empty");
    }
    require_optimal(res, "dual inner program");
    return -res.objective;
}

PieceHulls::PieceHulls(const AmbiguitySet& set) : set_(&set) {
    for (const RefinedPiece& piece : set.refined_pieces()) {
        hulls_.emplace_back(static_cast<std::size_t>(piece.last - piece.first + 1), HullSide::lower);
    }
}

void PieceHulls::sync(GridIndex k, const GridWindow& u) {
    if (ready_ && k == step_) return;
    const auto pieces = set_->refined_pieces();
    if (ready_ && k == step_ + 1) {
        for (std::size_t r = 0; r < pieces.size(); ++r) {
            const GridIndex m = k - pieces[r].first;
            hulls_[r].advance(static_cast<double>(m), u.at(m));
        }
        ++advances_;
    } else {
        for (std::size_t r = 0; r < pieces.size(); ++r) {
            hulls_[r].clear();
            for (GridIndex m = k - pieces[r].last; m <= k - pieces[r].first; ++m) {
                hulls_[r].push(static_cast<double>(m), u.at(m));
            }
        }
        ++rebuilds_;
    }
    step_ = k;
    ready_ = true;
}

std::optional<ViolatedConstraint> separation_oracle(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k,
                                                    const DualSolution& dual, double tolerance) {
    require_step(hulls, k);
    const auto pieces = set.refined_pieces();
    const std::size_t q_count = set.statistics().size();
    const double dt = set.delta_t();
    std::optional<ViolatedConstraint> worst;
    double worst_scaled = 0.0;
    for (std::size_t r = 0; r < pieces.size(); ++r) {
        double slope = 0.0;
        double intercept = 0.0;
        for (std::size_t q = 0; q < q_count; ++q) {
            const double w = (q < dual.x.size() ? dual.x[q] : 0.0) - (q < dual.y.size() ? dual.y[q] : 0.0);
            slope += w * pieces[r].slope[q];
            intercept += w * pieces[r].intercept[q];
        }
        // slack(m) = u(m) + slope*dt*m - slope*dt*k - intercept - z
        const HullPoint p = hulls.hull(r).argmin_linear(-slope * dt);
        const GridIndex l = k - static_cast<GridIndex>(std::llround(p.x));
        const double slack = p.y - dual.z - slope * static_cast<double>(l) * dt - intercept;
        const double scaled = slack / std::max(1.0, std::abs(p.y));
        if (scaled < -tolerance && (!worst || scaled < worst_scaled)) {
            worst = ViolatedConstraint{l, slack};
            worst_scaled = scaled;
        }
    }
    return worst;
}

ColumnGenerationResult inner_column_generation(const GridWindow& u, const AmbiguitySet& set, const PieceHulls& hulls,
                                               GridIndex k, const PrimalSupport& warm_start,
                                               const InnerOptions& options) {
    require_step(hulls, k);
    const std::vector<StatisticBound> bounds = bounds_of(set);
    std::vector<GridIndex> offsets = warm_start.offsets;
    std::vector<std::size_t> basis = warm_start.basis;
    if (offsets.empty()) {
        // feasible support plus the cheapest point of every refined piece
        const GridDistribution& p = set.feasible_distribution();
        for (GridIndex l = p.first_index(); l <= p.last_index(); ++l) {
            if (p.weight(l) > 0.0) offsets.push_back(l);
        }
        for (const SlidingUpperHull& hull : hulls.hulls()) {
            const GridIndex l = k - static_cast<GridIndex>(std::llround(hull.argmin_linear(0.0).x));
            if (std::find(offsets.begin(), offsets.end(), l) == offsets.end()) offsets.push_back(l);
        }
        basis.clear();
    }

    const std::size_t cap = options.iteration_factor * set.support_size();
    ColumnGenerationResult out;
    while (true) {
        std::vector<double> cost;
        cost.reserve(offsets.size());
        for (GridIndex l : offsets) cost.push_back(u.at(k - l));
        const GridLinearProgram lp = build_moment_program(
            bounds, cost, [&](std::size_t q, std::size_t j) { return set.statistic_at(q, offsets[j]); });
        const LpResult res = solve_lp(lp.a, lp.b, lp.c, basis);
        require_optimal(res, "restricted inner program");
        ++out.iterations;
        out.value = res.objective;
        out.dual = dual_from_rows(lp, res);
        basis = res.basis;

        const auto cut = separation_oracle(hulls, set, k, out.dual, options.feasibility_tolerance);
        if (!cut || std::find(offsets.begin(), offsets.end(), cut->offset) != offsets.end()) {
            out.support.offsets = offsets;
            out.support.weights.assign(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(offsets.size()));
            out.support.basis = basis;
            return out;
        }
        if (out.iterations >= cap) {
            std::ostringstream msg;
            msg << "column generation did not converge within " << cap << " rounds at step " << k
                << " (reduced cost " << cut->slack << " at offset " << cut->offset << ")";
            throw Error(ErrorCode::nonconvergence, msg.str());
        }
        const std::size_t old = offsets.size();
        offsets.push_back(cut->offset);
        for (std::size_t& j : basis) {
            if (j >= old) ++j;
        }
    }
}

double inner_mean_only(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k) {
    if (set.shape() != AmbiguityShape::mean_only) {
        throw Error(ErrorCode::configuration, "mean-only procedure needs a single mean statistic");
    }
    require_step(hulls, k);
    const SlidingUpperHull& hull = hulls.hull(0);
    const double dt = set.delta_t();
    const StatisticBound& bd = set.statistics()[0].bound;
    const double lo = std::max(bd.alpha / dt, static_cast<double>(set.support_first()));
    const double hi = std::max(lo, std::min(bd.beta / dt, static_cast<double>(set.support_last())));
    // the envelope is convex in m = k - l; its minimum clamped to the admissible range
    const double m_star = hull.argmin_linear(0.0).x;
    const double m = std::clamp(m_star, static_cast<double>(k) - hi, static_cast<double>(k) - lo);
    return envelope_at(hull, m);
}

double inner_piecewise_constant(const PieceHulls& hulls, const AmbiguitySet& set, GridIndex k) {
    if (set.shape() != AmbiguityShape::piecewise_constant) {
        throw Error(ErrorCode::configuration, "piecewise-constant procedure needs zero-slope statistics");
    }
    require_step(hulls, k);
    const auto pieces = set.refined_pieces();
    std::vector<double> minima;
    minima.reserve(pieces.size());
    for (std::size_t r = 0; r < pieces.size(); ++r) minima.push_back(hulls.hull(r).argmin_linear(0.0).y);
    const std::vector<StatisticBound> bounds = bounds_of(set);
    const GridLinearProgram lp = build_moment_program(
        bounds, minima, [&](std::size_t q, std::size_t r) { return set.statistic_at(q, pieces[r].first); });
    const LpResult res = solve_lp(lp.a, lp.b, lp.c);
    require_optimal(res, "piecewise-constant inner program");
    return res.objective;
}

const char* to_string(InnerMethod method) noexcept {
    switch (method) {
        case InnerMethod::automatic: return "auto";
        case InnerMethod::mean_only: return "mean_only";
        case InnerMethod::piecewise_constant: return "piecewise_const";
        case InnerMethod::column_generation: return "column_gen";
    }
    return "unknown";
}

InnerProblem::InnerProblem(const AmbiguitySet& set, InnerMethod method, InnerOptions options)
    : set_(&set), method_(method), options_(options), hulls_(set) {
    if (method_ == InnerMethod::automatic) {
        switch (set.shape()) {
            case AmbiguityShape::mean_only: method_ = InnerMethod::mean_only; break;
            case AmbiguityShape::piecewise_constant: method_ = InnerMethod::piecewise_constant; break;
            case AmbiguityShape::general: method_ = InnerMethod::column_generation; break;
        }
    }
    if (method_ == InnerMethod::mean_only && set.shape() != AmbiguityShape::mean_only) {
        throw Error(ErrorCode::configuration, "mean-only method requested for a set with other statistics");
    }
    if (method_ == InnerMethod::piecewise_constant && set.shape() != AmbiguityShape::piecewise_constant) {
        throw Error(ErrorCode::configuration, "piecewise-constant method requested for sloped statistics");
    }
}

double InnerProblem::evaluate(GridIndex k, const GridWindow& u) {
    hulls_.sync(k, u);
    last_iterations_ = 0;
    switch (method_) {
        case InnerMethod::mean_only: return inner_mean_only(hulls_, *set_, k);
        case InnerMethod::piecewise_constant: return inner_piecewise_constant(hulls_, *set_, k);
        default: break;
    }
    ColumnGenerationResult res = inner_column_generation(u, *set_, hulls_, k, support_, options_);
    support_ = std::move(res.support);
    last_iterations_ = res.iterations;
    total_iterations_ += res.iterations;
    return res.value;
}

}  // namespace riskroute
