#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "doctest.h"
#include "riskroute/linear_program.hpp"

using namespace riskroute;

namespace {

// Solves the square system A_B x_B = b by Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> solve_square(const DenseMatrix& a, const std::vector<std::size_t>& cols,
                                                const std::vector<double>& b) {
    const std::size_t m = cols.size();
    std::vector<std::vector<double>> t(m, std::vector<double>(m + 1));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) t[i][j] = a(i, cols[j]);
        t[i][m] = b[i];
    }
    for (std::size_t p = 0; p < m; ++p) {
        std::size_t best = p;
        for (std::size_t i = p + 1; i < m; ++i) {
            if (std::abs(t[i][p]) > std::abs(t[best][p])) best = i;
        }
        if (std::abs(t[best][p]) < 1e-10) return std::nullopt;
        std::swap(t[p], t[best]);
        for (std::size_t i = 0; i < m; ++i) {
            if (i == p) continue;
            const double f = t[i][p] / t[p][p];
            for (std::size_t j = p; j <= m; ++j) t[i][j] -= f * t[p][j];
        }
    }
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = t[i][m] / t[i][i];
    return x;
}

// Minimum over every basic feasible solution, or nullopt when there is none.
std::optional<double> enumerate_vertices(const DenseMatrix& a, const std::vector<double>& b,
                                         const std::vector<double>& c) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    std::optional<double> best;
    std::vector<std::size_t> cols(m);
    const auto visit = [&](auto&& self, std::size_t pos, std::size_t from) -> void {
        if (pos == m) {
            const auto x = solve_square(a, cols, b);
            if (!x) return;
            double obj = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                if ((*x)[i] < -1e-9) return;
                obj += c[cols[i]] * (*x)[i];
            }
            if (!best || obj < *best) best = obj;
            return;
        }
        for (std::size_t j = from; j < n; ++j) {
            cols[pos] = j;
            self(self, pos + 1, j + 1);
        }
    };
    visit(visit, 0, 0);
    return best;
}

}  // namespace

TEST_CASE("small textbook program") {
    // min -x1 - 2 x2 s.t. x1 + x2 + s1 = 4, x1 + 3 x2 + s2 = 6
    DenseMatrix a(2, 4);
    a(0, 0) = 1;
    a(0, 1) = 1;
    a(0, 2) = 1;
    a(1, 0) = 1;
    a(1, 1) = 3;
    a(1, 3) = 1;
    const std::vector<double> b{4, 6};
    const std::vector<double> c{-1, -2, 0, 0};
    const LpResult r = solve_lp(a, b, c);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(-5.0));
    CHECK(r.x[0] == doctest::Approx(3.0));
    CHECK(r.x[1] == doctest::Approx(1.0));
    // strong duality
    CHECK(r.duals[0] * b[0] + r.duals[1] * b[1] == doctest::Approx(r.objective));
}

TEST_CASE("infeasible and unbounded programs") {
    DenseMatrix a(2, 2);
    a(0, 0) = 1;
    a(0, 1) = 1;
    a(1, 0) = 1;
    a(1, 1) = 1;
    CHECK(solve_lp(a, std::vector<double>{1, 2}, std::vector<double>{0, 0}).status == LpStatus::infeasible);

    DenseMatrix u(1, 2);
    u(0, 0) = 1;
    u(0, 1) = -1;
    CHECK(solve_lp(u, std::vector<double>{1}, std::vector<double>{0, -1}).status == LpStatus::unbounded);
    CHECK(std::string(to_string(LpStatus::iteration_limit)) == "iteration limit");
}

TEST_CASE("degenerate program terminates") {
    // many constraints active at the origin
    DenseMatrix a(3, 6);
    const double rows[3][3] = {{1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) a(i, j) = rows[i][j];
        a(i, 3 + i) = 1;
    }
    const std::vector<double> b{0, 0, 1};
    const std::vector<double> c{-1, -1, -1, 0, 0, 0};
    LpOptions opt;
    opt.bland_after = 1;
    const LpResult r = solve_lp(a, b, c, {}, opt);
    REQUIRE(r.status == LpStatus::optimal);
    CHECK(r.objective == doctest::Approx(enumerate_vertices(a, b, c).value()));
}

TEST_CASE("random programs match vertex enumeration") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.0, 1.0);
    std::size_t optimal = 0;
    std::size_t infeasible = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + trial % 3;
        const std::size_t n = m + 2 + trial % 4;
        DenseMatrix a(m, n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) a(i, j) = coef(rng);
        }
        // a simplex-like first row keeps most programs bounded
        for (std::size_t j = 0; j < n; ++j) a(0, j) = 0.5 + pos(rng);
        std::vector<double> b(m);
        for (double& v : b) v = coef(rng);
        b[0] = 1.0;
        std::vector<double> c(n);
        for (double& v : c) v = coef(rng);

        const LpResult r = solve_lp(a, b, c);
        const auto oracle = enumerate_vertices(a, b, c);
        if (!oracle) {
            CHECK(r.status == LpStatus::infeasible);
            ++infeasible;
            continue;
        }
        REQUIRE(r.status == LpStatus::optimal);
        ++optimal;
        CHECK(r.objective == doctest::Approx(*oracle).epsilon(1e-8));
        for (std::size_t i = 0; i < m; ++i) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) lhs += a(i, j) * r.x[j];
            CHECK(lhs == doctest::Approx(b[i]).epsilon(1e-8));
        }
        for (std::size_t j = 0; j < n; ++j) {
            CHECK(r.x[j] >= -1e-9);
            double reduced = c[j];
            for (std::size_t i = 0; i < m; ++i) reduced -= r.duals[i] * a(i, j);
            CHECK(reduced >= -1e-8);
        }
    }
    CHECK(optimal > 50);
    CHECK(infeasible > 0);
}

TEST_CASE("warm start from an optimal basis") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> coef(0.1, 1.0);
    DenseMatrix a(2, 6);
    for (std::size_t j = 0; j < 6; ++j) {
        a(0, j) = 1.0;
        a(1, j) = static_cast<double>(j);
    }
    const std::vector<double> b{1.0, 2.5};
    std::vector<double> c(6);
    for (double& v : c) v = coef(rng);
    const LpResult cold = solve_lp(a, b, c);
    REQUIRE(cold.status == LpStatus::optimal);
    const LpResult warm = solve_lp(a, b, c, cold.basis);
    REQUIRE(warm.status == LpStatus::optimal);
    CHECK(warm.objective == doctest::Approx(cold.objective));
    CHECK(warm.iterations <= cold.iterations);

    // an infeasible warm basis falls back to the cold start
    const std::vector<std::size_t> bad{0, 1};
    const LpResult fallback = solve_lp(a, b, c, bad);
    REQUIRE(fallback.status == LpStatus::optimal);
    CHECK(fallback.objective == doctest::Approx(cold.objective));
}

TEST_CASE("appended columns") {
    DenseMatrix a(2, 1);
    a(0, 0) = 1;
    a(1, 0) = 2;
    const std::vector<double> col{1.0, 0.0};
    CHECK(a.add_column(col) == 1);
    CHECK(a.cols() == 2);
    CHECK(a(0, 0) == 1);
    CHECK(a(1, 0) == 2);
    CHECK(a(0, 1) == 1);
    CHECK(a(1, 1) == 0);
}
