#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "random_instances.hpp"
#include "riskroute/convolution.hpp"
#include "riskroute/errors.hpp"

using namespace riskroute;
using riskroute::testing::double_loop_convolve;
using riskroute::testing::random_pmf;
using riskroute::testing::random_values;

TEST_CASE("pointwise convolution basics") {
    std::vector<double> identity(20);
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<double>(i);
    const GridWindow w{0, identity};
    const auto shift = GridDistribution::point_mass(0.5, 1);
    CHECK(convolve_pointwise(w, shift, 10) == 9.0);

    const std::vector<double> ones(20, 1.0);
    const GridDistribution half(0.5, 1, {0.5, 0.5});
    CHECK(convolve_pointwise({0, ones}, half, 10) == doctest::Approx(1.0));

    CHECK_THROWS_AS(convolve_pointwise(w, shift, 0), Error);
    CHECK_THROWS_AS(convolve_pointwise(w, shift, 21), Error);
}

TEST_CASE("pointwise and block convolution match the double loop") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::uniform_int_distribution<GridIndex> first(1, 5);
        std::uniform_int_distribution<GridIndex> width(1, 40);
        const GridIndex lo = first(rng);
        const GridDistribution pmf = random_pmf(rng, 0.25, lo, lo + width(rng) - 1, 0.4);
        const GridIndex u_first = -7;
        const std::vector<double> u = random_values(rng, 200);
        const GridWindow w{u_first, u};
        const GridIndex k_begin = u_first + pmf.last_index();
        const std::size_t count = 100;
        const std::vector<double> block = convolve_fft_block(w, pmf, k_begin, count);
        REQUIRE(block.size() == count);
        for (std::size_t t = 0; t < count; ++t) {
            const GridIndex k = k_begin + static_cast<GridIndex>(t);
            const double oracle = double_loop_convolve(u, u_first, pmf, k);
            CHECK(convolve_pointwise(w, pmf, k) == doctest::Approx(oracle).epsilon(1e-12));
            CHECK(std::abs(block[t] - oracle) < 1e-9);
        }
    }
}

TEST_CASE("block convolution reproduces the basic examples") {
    std::vector<double> identity(30);
    for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = static_cast<double>(i);
    const auto block = convolve_fft_block({0, identity}, GridDistribution::point_mass(1.0, 3), 3, 20);
    for (std::size_t t = 0; t < block.size(); ++t) CHECK(block[t] == doctest::Approx(static_cast<double>(t)));
    const std::vector<double> ones(30, 1.0);
    for (double v : convolve_fft_block({0, ones}, GridDistribution(1.0, 1, {0.5, 0.5}), 2, 20)) {
        CHECK(v == doctest::Approx(1.0));
    }
}

TEST_CASE("streaming convolution") {
    SUBCASE("constant input stays constant") {
        const GridDistribution pmf(1.0, 2, {0.25, 0.25, 0.5});
        StreamConvolver conv(pmf, 0, 1);
        for (GridIndex m = 0; m < 200; ++m) {
            const auto out = conv.feed(m, 1.0);
            CHECK(out.index == m + 2);
            if (out.complete) CHECK(out.value == doctest::Approx(1.0));
        }
    }
    SUBCASE("point mass delays the stream") {
        StreamConvolver conv(GridDistribution::point_mass(1.0, 5), 10);
        for (GridIndex m = 10; m < 60; ++m) {
            const auto out = conv.feed(m, static_cast<double>(m * m));
            CHECK(out.index == m + 5);
            CHECK(out.complete);
            CHECK(out.value == doctest::Approx(static_cast<double>(m * m)));
        }
    }
    SUBCASE("out-of-order feed is a state error") {
        StreamConvolver conv(GridDistribution::point_mass(1.0, 1), 0);
        conv.feed(0, 1.0);
        try {
            conv.feed(2, 1.0);
            FAIL("expected a state error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::state);
        }
    }
    SUBCASE("random feeds match the double loop") {
        std::mt19937_64 rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            std::uniform_int_distribution<GridIndex> width(1, 300);
            const GridDistribution pmf = random_pmf(rng, 1.0, 1, width(rng), 0.2);
            const GridIndex start = -3;
            const std::vector<double> u = random_values(rng, 1000);
            StreamConvolver conv(pmf, start);
            double worst = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                const auto out = conv.feed(start + static_cast<GridIndex>(i), u[i]);
                if (!out.complete) continue;
                worst = std::max(worst, std::abs(out.value - double_loop_convolve(u, start, pmf, out.index)));
            }
            CHECK(worst < 1e-9);
            if (pmf.size() > 64) CHECK(conv.fft_count() > 0);
        }
    }
}

TEST_CASE("fft helpers") {
    CHECK(next_power_of_two(1) == 1);
    CHECK(next_power_of_two(5) == 8);
    CHECK(next_power_of_two(64) == 64);
    RealFft fft(16);
    std::vector<double> x(16);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<double>(i));
    std::vector<std::complex<double>> spectrum;
    std::vector<double> back;
    fft.forward(x, spectrum);
    CHECK(spectrum.size() == 9);
    fft.inverse(spectrum, back);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-12));
}
