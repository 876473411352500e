#include <deque>
#include <random>
#include <vector>

#include "doctest.h"
#include "hull_oracle.hpp"
#include "riskroute/errors.hpp"
#include "riskroute/sliding_hull.hpp"

using namespace riskroute;
using riskroute::testing::monotone_chain;
using riskroute::testing::sequence_value;
using riskroute::testing::SequenceKind;

namespace {

// Feeds `steps` points and compares against the static recomputation after every advance.
void check_against_oracle(SequenceKind kind, HullSide side, std::size_t window, std::size_t steps,
                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SlidingUpperHull hull(window, side);
    std::deque<HullPoint> raw;
    std::size_t mismatches = 0;
    for (std::size_t n = 0; n < steps; ++n) {
        const HullPoint p{static_cast<double>(n), sequence_value(kind, n, rng)};
        hull.feed(p.x, p.y);
        raw.push_back(p);
        if (raw.size() > window) raw.pop_front();
        if (!hull.full()) continue;
        const auto expected = monotone_chain({raw.begin(), raw.end()}, side);
        if (hull.extremes() != expected) ++mismatches;
    }
    CHECK(mismatches == 0);
}

}  // namespace

TEST_CASE("orientation") {
    CHECK(orientation({0, 0}, {1, 0}, {1, 1}) == 1);
    CHECK(orientation({0, 0}, {1, 0}, {1, -1}) == -1);
    CHECK(orientation({0, 0}, {1, 1}, {2, 2}) == 0);
}

TEST_CASE("concave and convex windows") {
    SlidingUpperHull upper(8);
    SlidingUpperHull lower(8, HullSide::lower);
    for (int n = 0; n < 8; ++n) {
        upper.feed(n, -static_cast<double>(n * n));
        lower.feed(n, -static_cast<double>(n * n));
    }
    CHECK(upper.extreme_count() == 8);
    REQUIRE(lower.extreme_count() == 2);
    CHECK(lower.extreme(0) == HullPoint{0, 0});
    CHECK(lower.extreme(1) == HullPoint{7, -49});

    SlidingUpperHull convex(6);
    for (int n = 0; n < 20; ++n) convex.feed(n, static_cast<double>(n * n));
    const auto ext = convex.extremes();
    REQUIRE(ext.size() == 2);
    CHECK(ext.front().x == 14);
    CHECK(ext.back().x == 19);
}

TEST_CASE("two-point window") {
    SlidingUpperHull hull(2);
    for (int n = 0; n < 10; ++n) {
        hull.feed(n, n % 3);
        if (hull.full()) CHECK(hull.extreme_count() == 2);
    }
}

TEST_CASE("linear argmin") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (HullSide side : {HullSide::upper, HullSide::lower}) {
        SlidingUpperHull hull(30, side);
        for (int n = 0; n < 200; ++n) {
            hull.feed(n, unit(rng));
            if (!hull.full()) continue;
            const auto ext = hull.extremes();
            SUBCASE("flat functional picks the lowest extreme") {}
            for (double slope : {0.0, unit(rng), 10.0 * unit(rng), 1e6}) {
                HullPoint best = ext.front();
                for (const auto& p : ext) {
                    if (p.y - slope * p.x < best.y - slope * best.x) best = p;
                }
                const HullPoint got = hull.argmin_linear(slope);
                CHECK(got.y - slope * got.x == doctest::Approx(best.y - slope * best.x).epsilon(1e-12));
            }
            CHECK(hull.argmin_linear(1e6).x == ext.back().x);
        }
    }
}

TEST_CASE("protocol errors") {
    SlidingUpperHull hull(3);
    CHECK_THROWS_AS(hull.advance(0, 0), Error);
    hull.push(0, 0);
    hull.push(1, 0);
    hull.push(2, 0);
    CHECK_THROWS_AS(hull.push(3, 0), Error);
    CHECK_THROWS_AS(SlidingUpperHull(0), Error);
}

TEST_CASE("sliding hull equals the static recomputation") {
    for (HullSide side : {HullSide::upper, HullSide::lower}) {
        for (SequenceKind kind :
             {SequenceKind::random, SequenceKind::concave, SequenceKind::convex, SequenceKind::alternating}) {
            for (std::size_t window : {1u, 2u, 3u, 7u, 33u}) check_against_oracle(kind, side, window, 3000, window);
        }
    }
}
