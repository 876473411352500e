#include "riskroute/ambiguity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

double boundary_slack(double w) { return 1e-9 * std::max(1.0, std::abs(w)); }

double percentile(std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= sorted.size()) return sorted.back();
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

std::vector<double> statistic_samples(std::span<const double> samples, const PiecewiseAffineStatistic& stat) {
    if (samples.empty()) throw Error(ErrorCode::configuration, "statistic interval needs at least one sample");
    std::vector<double> g(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) g[i] = stat(samples[i]);
    return g;
}

StatisticBound interval_for(std::span<const double> samples, const PiecewiseAffineStatistic& stat,
                            const PresetConfig& config, std::uint64_t seed) {
    StatisticBound bound = config.method == IntervalMethod::bootstrap
                               ? bootstrap_interval(samples, stat, config.level, config.replicates, seed)
                               : hoeffding_interval(samples, stat, config.total_statistics, config.epsilon);
    const std::vector<double> g = statistic_samples(samples, stat);
    const double empirical = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    const auto [gmin, gmax] = stat.range();
    bound.alpha = std::clamp(std::min(bound.alpha, empirical), gmin, gmax);
    bound.beta = std::clamp(std::max(bound.beta, empirical), gmin, gmax);
    return bound;
}

}  // namespace

PiecewiseAffineStatistic::PiecewiseAffineStatistic(std::vector<StatisticPiece> pieces, std::string name)
    : pieces_(std::move(pieces)), name_(std::move(name)) {
    if (pieces_.empty()) throw Error(ErrorCode::configuration, "statistic has no pieces");
    for (std::size_t r = 0; r < pieces_.size(); ++r) {
        const auto& p = pieces_[r];
        if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !std::isfinite(p.slope) || !std::isfinite(p.intercept)) {
            throw Error(ErrorCode::configuration, "statistic piece has a non-finite field");
        }
        if (p.hi < p.lo) throw Error(ErrorCode::configuration, "statistic piece has hi < lo");
        if (r > 0 && std::abs(pieces_[r - 1].hi - p.lo) > boundary_slack(p.lo)) {
            throw Error(ErrorCode::configuration, "statistic pieces must be contiguous");
        }
    }
}

PiecewiseAffineStatistic PiecewiseAffineStatistic::identity(double lo, double hi) {
    return PiecewiseAffineStatistic({{lo, hi, 1.0, 0.0}}, "mean");
}

PiecewiseAffineStatistic PiecewiseAffineStatistic::absolute_deviation(double lo, double hi, double center,
                                                                      double delta_t) {
    const double split = static_cast<double>(ceil_to_grid(center, delta_t)) * delta_t;
    if (split <= lo + boundary_slack(lo)) return PiecewiseAffineStatistic({{lo, hi, 1.0, -center}}, "abs-dev");
    if (split > hi + boundary_slack(hi)) return PiecewiseAffineStatistic({{lo, hi, -1.0, center}}, "abs-dev");
    return PiecewiseAffineStatistic({{lo, split, -1.0, center}, {split, hi, 1.0, -center}}, "abs-dev");
}

PiecewiseAffineStatistic PiecewiseAffineStatistic::grid_indicator(double delta_t, GridIndex lo, GridIndex hi,
                                                                  GridIndex a, GridIndex b) {
    if (a < lo || b > hi || a > b) throw Error(ErrorCode::configuration, "indicator range outside its support");
    const auto w = [&](GridIndex k) { return static_cast<double>(k) * delta_t; };
    std::vector<StatisticPiece> pieces;
    if (a > lo) pieces.push_back({w(lo), w(a), 0.0, 0.0});
    if (b < hi) {
        pieces.push_back({w(a), w(b + 1), 0.0, 1.0});
        pieces.push_back({w(b + 1), w(hi), 0.0, 0.0});
    } else {
        pieces.push_back({w(a), w(hi), 0.0, 1.0});
    }
    std::ostringstream name;
    name << "indicator[" << a << "," << b << "]";
    return PiecewiseAffineStatistic(std::move(pieces), name.str());
}

double PiecewiseAffineStatistic::operator()(double w) const {
    const double tol = boundary_slack(w);
    if (w < lo() - tol || w > hi() + tol) {
        std::ostringstream msg;
        msg << "value " << w << " outside the statistic domain [" << lo() << ", " << hi() << "]";
        throw Error(ErrorCode::domain, msg.str());
    }
    for (std::size_t r = 0; r + 1 < pieces_.size(); ++r) {
        if (w < pieces_[r].hi - tol) return pieces_[r].slope * w + pieces_[r].intercept;
    }
    return pieces_.back().slope * w + pieces_.back().intercept;
}

bool PiecewiseAffineStatistic::is_identity() const noexcept {
    return std::all_of(pieces_.begin(), pieces_.end(),
                       [](const StatisticPiece& p) { return p.slope == 1.0 && p.intercept == 0.0; });
}

bool PiecewiseAffineStatistic::is_piecewise_constant() const noexcept {
    return std::all_of(pieces_.begin(), pieces_.end(), [](const StatisticPiece& p) { return p.slope == 0.0; });
}

std::pair<double, double> PiecewiseAffineStatistic::range() const noexcept {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& p : pieces_) {
        for (double w : {p.lo, p.hi}) {
            const double v = p.slope * w + p.intercept;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

const char* to_string(AmbiguityShape shape) noexcept {
    switch (shape) {
        case AmbiguityShape::mean_only: return "mean-only";
        case AmbiguityShape::piecewise_constant: return "piecewise-constant";
        case AmbiguityShape::general: return "general";
    }
    return "unknown";
}

AmbiguitySet::AmbiguitySet(double delta_t, GridIndex support_first, GridIndex support_last,
                           std::vector<BoundedStatistic> statistics)
    : delta_t_(delta_t), first_(support_first), last_(support_last), stats_(std::move(statistics)) {
    if (!(delta_t > 0.0)) throw Error(ErrorCode::configuration, "ambiguity set needs a positive delta_t");
    if (support_first < 1 || support_last < support_first) {
        throw Error(ErrorCode::configuration, "ambiguity set support must satisfy 1 <= first <= last");
    }
    std::set<GridIndex> starts{first_};
    for (std::size_t q = 0; q < stats_.size(); ++q) {
        const auto& st = stats_[q];
        const StatisticBound& bd = st.bound;
        if (std::isnan(bd.alpha) || std::isnan(bd.beta) || bd.alpha > bd.beta) {
            throw Error(ErrorCode::configuration, "statistic bound needs alpha <= beta");
        }
        const auto pieces = st.statistic.pieces();
        if (to_grid_units(st.statistic.lo(), delta_t) != first_ || to_grid_units(st.statistic.hi(), delta_t) != last_) {
            std::ostringstream msg;
            msg << "statistic " << q << " covers [" << st.statistic.lo() << ", " << st.statistic.hi()
                << "] instead of the arc support [" << first_ * delta_t << ", " << last_ * delta_t << "]";
            throw Error(ErrorCode::configuration, msg.str());
        }
        for (const auto& p : pieces) {
            const GridIndex lo = to_grid_units(p.lo, delta_t);
            to_grid_units(p.hi, delta_t);
            starts.insert(lo);
        }
    }

    const std::vector<GridIndex> s(starts.begin(), starts.end());
    for (std::size_t t = 0; t < s.size(); ++t) {
        RefinedPiece piece;
        piece.first = s[t];
        piece.last = t + 1 < s.size() ? s[t + 1] - 1 : last_;
        for (const auto& st : stats_) {
            const double w = static_cast<double>(piece.first) * delta_t;
            const auto pieces = st.statistic.pieces();
            std::size_t r = 0;
            while (r + 1 < pieces.size() && w >= pieces[r].hi - boundary_slack(w)) ++r;
            piece.slope.push_back(pieces[r].slope);
            piece.intercept.push_back(pieces[r].intercept);
        }
        pieces_.push_back(std::move(piece));
    }

    if (stats_.size() == 1 && stats_[0].statistic.is_identity()) {
        shape_ = AmbiguityShape::mean_only;
    } else if (std::all_of(stats_.begin(), stats_.end(),
                           [](const BoundedStatistic& st) { return st.statistic.is_piecewise_constant(); })) {
        shape_ = AmbiguityShape::piecewise_constant;
    }

    const std::vector<double> zero(support_size(), 0.0);
    const GridLinearProgram lp = build_grid_program(*this, zero);
    const LpResult res = solve_lp(lp.a, lp.b, lp.c);
    if (res.status != LpStatus::optimal) {
        throw Error(ErrorCode::infeasible, "ambiguity set is empty: no grid distribution meets every bound");
    }
    std::vector<double> w(res.x.begin(), res.x.begin() + static_cast<std::ptrdiff_t>(support_size()));
    double total = 0.0;
    for (double& v : w) {
        v = std::max(v, 0.0);
        total += v;
    }
    for (double& v : w) v /= total;
    feasible_ = GridDistribution(delta_t_, first_, std::move(w));
}

double AmbiguitySet::statistic_at(std::size_t q, GridIndex l) const {
    if (l < first_ || l > last_) throw Error(ErrorCode::domain, "grid index outside the ambiguity set support");
    const RefinedPiece& p = pieces_[piece_of(l)];
    return p.slope[q] * static_cast<double>(l) * delta_t_ + p.intercept[q];
}

std::size_t AmbiguitySet::piece_of(GridIndex l) const {
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), l,
                               [](GridIndex k, const RefinedPiece& p) { return k < p.first; });
    return static_cast<std::size_t>(it - pieces_.begin()) - 1;
}

bool AmbiguitySet::contains(const GridDistribution& pmf, double tol) const {
    if (pmf.min_support() < first_ || pmf.max_support() > last_) return false;
    for (std::size_t q = 0; q < stats_.size(); ++q) {
        double v = 0.0;
        for (GridIndex l = pmf.min_support(); l <= pmf.max_support(); ++l) v += pmf.weight(l) * statistic_at(q, l);
        if (v < stats_[q].bound.alpha - tol || v > stats_[q].bound.beta + tol) return false;
    }
    return true;
}

AmbiguitySet AmbiguitySet::with_bounds(std::span<const StatisticBound> bounds) const {
    if (bounds.size() != stats_.size()) throw Error(ErrorCode::configuration, "bound count does not match");
    std::vector<BoundedStatistic> stats = stats_;
    for (std::size_t q = 0; q < stats.size(); ++q) stats[q].bound = bounds[q];
    return AmbiguitySet(delta_t_, first_, last_, std::move(stats));
}

GridLinearProgram build_grid_program(const AmbiguitySet& set, std::span<const double> cost) {
    if (cost.size() != set.support_size()) throw Error(ErrorCode::configuration, "cost vector does not match the support");
    std::vector<StatisticBound> bounds;
    for (const auto& st : set.statistics()) bounds.push_back(st.bound);
    return build_moment_program(bounds, cost, [&](std::size_t q, std::size_t j) {
        return set.statistic_at(q, set.support_first() + static_cast<GridIndex>(j));
    });
}

double statistic_value(const PiecewiseAffineStatistic& stat, const GridDistribution& pmf) {
    double v = 0.0;
    for (GridIndex l = pmf.min_support(); l <= pmf.max_support(); ++l) {
        const double w = pmf.weight(l);
        if (w == 0.0) continue;
        v += w * stat(static_cast<double>(l) * pmf.delta_t());
    }
    return v;
}

StatisticBound hoeffding_interval(std::span<const double> samples, const PiecewiseAffineStatistic& stat,
                                  std::size_t total_statistics, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(ErrorCode::configuration, "epsilon must lie in (0, 1)");
    if (total_statistics == 0) throw Error(ErrorCode::configuration, "total statistic count must be positive");
    const std::vector<double> g = statistic_samples(samples, stat);
    const double n = static_cast<double>(g.size());
    const double center = std::accumulate(g.begin(), g.end(), 0.0) / n;
    const auto [gmin, gmax] = stat.range();
    const double half =
        (gmax - gmin) * std::sqrt(std::log(2.0 / epsilon * static_cast<double>(total_statistics)) / (2.0 * n));
    return {std::max(center - half, gmin), std::min(center + half, gmax)};
}

StatisticBound bootstrap_interval(std::span<const double> samples, const PiecewiseAffineStatistic& stat,
                                  double level, std::size_t replicates, std::uint64_t seed) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::configuration, "confidence level must lie in (0, 1)");
    if (replicates < 100) throw Error(ErrorCode::configuration, "bootstrap needs at least 100 replicates");
    const std::vector<double> g = statistic_samples(samples, stat);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
    std::vector<double> means(replicates);
    for (auto& m : means) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) s += g[pick(rng)];
        m = s / static_cast<double>(g.size());
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - level) / 2.0;
    return {percentile(means, tail), percentile(means, 1.0 - tail)};
}

std::pair<GridIndex, GridIndex> support_from_samples(std::span<const double> samples, double delta_t) {
    if (samples.empty()) throw Error(ErrorCode::configuration, "no samples for this arc");
    double lo = samples[0];
    double hi = samples[0];
    for (double x : samples) {
        if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::configuration, "sample costs must be positive");
        lo = std::min(lo, x);
        hi = std::max(hi, x);
    }
    const GridIndex first = std::max<GridIndex>(1, floor_to_grid(lo, delta_t));
    return {first, std::max(first, ceil_to_grid(hi, delta_t))};
}

std::vector<double> snap_samples(std::span<const double> samples, double delta_t, GridIndex first, GridIndex last) {
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        out[i] = static_cast<double>(std::clamp(round_to_grid(samples[i], delta_t), first, last)) * delta_t;
    }
    return out;
}

AmbiguitySet preset_robust_m(std::span<const double> samples, const PresetConfig& config) {
    const auto [first, last] = support_from_samples(samples, config.delta_t);
    const std::vector<double> snapped = snap_samples(samples, config.delta_t, first, last);
    const double dt = config.delta_t;
    auto mean = PiecewiseAffineStatistic::identity(static_cast<double>(first) * dt, static_cast<double>(last) * dt);
    const StatisticBound bound = interval_for(snapped, mean, config, config.seed);
    return AmbiguitySet(dt, first, last, {{std::move(mean), bound}});
}

AmbiguitySet preset_robust_md(std::span<const double> samples, const PresetConfig& config) {
    const auto [first, last] = support_from_samples(samples, config.delta_t);
    const std::vector<double> snapped = snap_samples(samples, config.delta_t, first, last);
    const double dt = config.delta_t;
    const double lo = static_cast<double>(first) * dt;
    const double hi = static_cast<double>(last) * dt;
    auto mean = PiecewiseAffineStatistic::identity(lo, hi);
    const StatisticBound mean_bound = interval_for(snapped, mean, config, config.seed);
    const double center = 0.5 * (mean_bound.alpha + mean_bound.beta);
    auto dev = PiecewiseAffineStatistic::absolute_deviation(lo, hi, center, dt);
    const StatisticBound dev_bound = interval_for(snapped, dev, config, config.seed + 1);
    return AmbiguitySet(dt, first, last, {{std::move(mean), mean_bound}, {std::move(dev), dev_bound}});
}

AmbiguitySet pinned_set(const GridDistribution& pmf, GridIndex first, GridIndex last) {
    if (pmf.min_support() < first || pmf.max_support() > last) {
        throw Error(ErrorCode::configuration, "pinned distribution escapes the support");
    }
    const double dt = pmf.delta_t();
    std::vector<BoundedStatistic> stats;
    for (GridIndex l = first; l <= last; ++l) {
        const double w = pmf.weight(l);
        stats.push_back({PiecewiseAffineStatistic::grid_indicator(dt, first, last, l, l), {w, w}});
    }
    return AmbiguitySet(dt, first, last, std::move(stats));
}

}  // namespace riskroute
