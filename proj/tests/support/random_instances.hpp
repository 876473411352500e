#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "riskroute/ambiguity.hpp"
#include "riskroute/graph.hpp"
#include "riskroute/grid.hpp"

namespace riskroute::testing {

inline std::vector<double> random_weights(std::mt19937_64& rng, std::size_t n, double zero_prob = 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(n);
    double total = 0.0;
    for (double& v : w) {
        v = unit(rng) < zero_prob ? 0.0 : unit(rng) + 1e-3;
        total += v;
    }
    if (total == 0.0) {
        w[0] = 1.0;
        total = 1.0;
    }
    for (double& v : w) v /= total;
    return w;
}

inline GridDistribution random_pmf(std::mt19937_64& rng, double dt, GridIndex first, GridIndex last,
                                   double zero_prob = 0.0) {
    return GridDistribution(dt, first, random_weights(rng, static_cast<std::size_t>(last - first + 1), zero_prob));
}

inline std::vector<double> random_values(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

enum class SetFamily { mean_only, piecewise_constant, general };

/// Piecewise statistic over grid points [first, last] with random breakpoints.
inline PiecewiseAffineStatistic random_statistic(std::mt19937_64& rng, double dt, GridIndex first, GridIndex last,
                                                 bool constant) {
    const GridIndex cells = last - first + 1;
    std::uniform_int_distribution<int> piece_count(1, static_cast<int>(std::min<GridIndex>(cells, 4)));
    std::vector<GridIndex> starts{first};
    const int extra = piece_count(rng) - 1;
    std::uniform_int_distribution<GridIndex> cut(first + 1, std::max(first + 1, last));
    for (int i = 0; i < extra && cells > 1; ++i) starts.push_back(cut(rng));
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::vector<StatisticPiece> pieces;
    for (std::size_t t = 0; t < starts.size(); ++t) {
        const GridIndex a = starts[t];
        const GridIndex b = t + 1 < starts.size() ? starts[t + 1] : last;
        const double slope = constant ? 0.0 : coef(rng);
        pieces.push_back({static_cast<double>(a) * dt, static_cast<double>(b) * dt, slope, coef(rng)});
    }
    return PiecewiseAffineStatistic(std::move(pieces));
}

/// Bounds around the statistic value of a random member distribution, so the set is never empty.
inline StatisticBound random_bound_around(std::mt19937_64& rng, double center, double spread) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    StatisticBound b;
    const double r = unit(rng);
    if (r < 0.1) {
        b.alpha = b.beta = center;
    } else {
        b.alpha = unit(rng) < 0.15 ? -std::numeric_limits<double>::infinity() : center - spread * unit(rng);
        b.beta = unit(rng) < 0.15 ? std::numeric_limits<double>::infinity() : center + spread * unit(rng);
    }
    return b;
}

inline AmbiguitySet random_set(std::mt19937_64& rng, SetFamily family, double dt, GridIndex first, GridIndex last,
                               std::size_t max_statistics = 4) {
    const GridDistribution member = random_pmf(rng, dt, first, last, 0.3);
    const double lo = static_cast<double>(first) * dt;
    const double hi = static_cast<double>(last) * dt;
    std::vector<BoundedStatistic> stats;
    if (family == SetFamily::mean_only) {
        auto mean = PiecewiseAffineStatistic::identity(lo, hi);
        const double c = statistic_value(mean, member);
        stats.push_back({mean, random_bound_around(rng, c, 0.5 * (hi - lo))});
    } else {
        std::uniform_int_distribution<std::size_t> count(1, max_statistics);
        const std::size_t q = count(rng);
        for (std::size_t i = 0; i < q; ++i) {
            auto g = random_statistic(rng, dt, first, last, family == SetFamily::piecewise_constant);
            const double c = statistic_value(g, member);
            stats.push_back({g, random_bound_around(rng, c, 1.0)});
        }
    }
    return AmbiguitySet(dt, first, last, std::move(stats));
}

}  // namespace riskroute::testing
