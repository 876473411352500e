#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace riskroute {

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    /// Appends a column and returns its index.
    std::size_t add_column(std::span<const double> column);

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus status) noexcept;

struct LpOptions {
    double feasibility_tolerance = 1e-9;
    double pivot_tolerance = 1e-11;
    std::size_t max_iterations = 20000;
    /// Switch from Dantzig pricing to Bland's rule after this many degenerate pivots in a row.
    std::size_t bland_after = 50;
    std::size_t refactor_every = 64;
};

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> x;
    /// One multiplier per row: c_j - duals . A_j >= 0 at optimality.
    std::vector<double> duals;
    /// Basic variable per row; indices >= cols denote row artificials.
    std::vector<std::size_t> basis;
    std::size_t iterations = 0;
};

/// min c.x subject to A x = b, x >= 0, by a two-phase revised simplex with an
/// explicit basis inverse. A warm basis is used when it is nonsingular and
/// primal feasible; otherwise the solve starts from the artificial basis.
LpResult solve_lp(const DenseMatrix& a, std::span<const double> b, std::span<const double> c,
                  std::span<const std::size_t> warm_basis = {}, const LpOptions& options = {});

}  // namespace riskroute
