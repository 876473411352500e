#include "riskroute/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "riskroute/errors.hpp"

namespace riskroute {

std::size_t DenseMatrix::add_column(std::span<const double> column) {
    if (column.size() != rows_) throw Error(ErrorCode::configuration, "column length does not match the row count");
    std::vector<double> next(rows_ * (cols_ + 1));
    for (std::size_t i = 0; i < rows_; ++i) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * cols_), cols_,
                    next.begin() + static_cast<std::ptrdiff_t>(i * (cols_ + 1)));
        next[i * (cols_ + 1) + cols_] = column[i];
    }
    data_ = std::move(next);
    return cols_++;
}

const char* to_string(LpStatus status) noexcept {
    switch (status) {
        case LpStatus::optimal: return "optimal";
        case LpStatus::infeasible: return "infeasible";
        case LpStatus::unbounded: return "unbounded";
        case LpStatus::iteration_limit: return "iteration limit";
    }
    return "unknown";
}

namespace {

class Simplex {
public:
    Simplex(const DenseMatrix& a, std::span<const double> b, std::span<const double> c, const LpOptions& opt)
        : a_(a), c_(c), opt_(opt), m_(a.rows()), n_(a.cols()), b_(b.begin(), b.end()), sign_(m_, 1.0) {
        for (std::size_t i = 0; i < m_; ++i) {
            if (b_[i] < 0.0) {
                b_[i] = -b_[i];
                sign_[i] = -1.0;
            }
        }
        b_scale_ = 1.0;
        for (double v : b_) b_scale_ = std::max(b_scale_, std::abs(v));
    }

    LpResult run(std::span<const std::size_t> warm) {
        if (!try_warm(warm)) cold_start();
        if (artificial_mass() > 0.0) {
            const LpStatus s = iterate(true);
            if (s == LpStatus::iteration_limit) return finish(s);
            if (artificial_mass() > opt_.feasibility_tolerance * b_scale_) return finish(LpStatus::infeasible);
        }
        drive_out_artificials();
        return finish(iterate(false));
    }

private:
    double entry(std::size_t i, std::size_t j) const {
        if (j < n_) return sign_[i] * a_(i, j);
        return j - n_ == i ? 1.0 : 0.0;
    }

    double cost(std::size_t j, bool phase1) const {
        if (phase1) return j >= n_ ? 1.0 : 0.0;
        return j < n_ ? c_[j] : 0.0;
    }

    void cold_start() {
        basis_.resize(m_);
        for (std::size_t i = 0; i < m_; ++i) basis_[i] = n_ + i;
        binv_.assign(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        xb_ = b_;
        mark_basic();
    }

    bool try_warm(std::span<const std::size_t> warm) {
        if (warm.size() != m_) return false;
        std::vector<char> seen(n_ + m_, 0);
        for (std::size_t j : warm) {
            if (j >= n_ + m_ || seen[j]) return false;
            seen[j] = 1;
        }
        basis_.assign(warm.begin(), warm.end());
        if (!refactor()) return false;
        for (double& v : xb_) {
            if (v < -opt_.feasibility_tolerance * b_scale_) return false;
            v = std::max(v, 0.0);
        }
        mark_basic();
        return true;
    }

    void mark_basic() {
        basic_.assign(n_ + m_, 0);
        for (std::size_t j : basis_) basic_[j] = 1;
    }

    // Gauss-Jordan inversion of the basis matrix with partial pivoting.
    bool refactor() {
        std::vector<double> bm(m_ * m_);
        for (std::size_t i = 0; i < m_; ++i) {
            for (std::size_t r = 0; r < m_; ++r) bm[i * m_ + r] = entry(i, basis_[r]);
        }
        binv_.assign(m_ * m_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) binv_[i * m_ + i] = 1.0;
        for (std::size_t col = 0; col < m_; ++col) {
            std::size_t piv = col;
            for (std::size_t i = col + 1; i < m_; ++i) {
                if (std::abs(bm[i * m_ + col]) > std::abs(bm[piv * m_ + col])) piv = i;
            }
            if (std::abs(bm[piv * m_ + col]) < 1e-13) return false;
            if (piv != col) {
                for (std::size_t j = 0; j < m_; ++j) {
                    std::swap(bm[piv * m_ + j], bm[col * m_ + j]);
                    std::swap(binv_[piv * m_ + j], binv_[col * m_ + j]);
                }
            }
            const double d = bm[col * m_ + col];
            for (std::size_t j = 0; j < m_; ++j) {
                bm[col * m_ + j] /= d;
                binv_[col * m_ + j] /= d;
            }
            for (std::size_t i = 0; i < m_; ++i) {
                if (i == col) continue;
                const double f = bm[i * m_ + col];
                if (f == 0.0) continue;
                for (std::size_t j = 0; j < m_; ++j) {
                    bm[i * m_ + j] -= f * bm[col * m_ + j];
                    binv_[i * m_ + j] -= f * binv_[col * m_ + j];
                }
            }
        }
        xb_.assign(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < m_; ++i) s += binv_[r * m_ + i] * b_[i];
            xb_[r] = s;
        }
        return true;
    }

    double artificial_mass() const {
        double s = 0.0;
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] >= n_) s += xb_[r];
        }
        return s;
    }

    std::vector<double> row_duals(bool phase1) const {
        std::vector<double> y(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            const double cb = cost(basis_[r], phase1);
            if (cb == 0.0) continue;
            for (std::size_t i = 0; i < m_; ++i) y[i] += cb * binv_[r * m_ + i];
        }
        return y;
    }

    std::vector<double> column(std::size_t j) const {
        std::vector<double> alpha(m_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            double s = 0.0;
            if (j < n_) {
                for (std::size_t i = 0; i < m_; ++i) s += binv_[r * m_ + i] * sign_[i] * a_(i, j);
            } else {
                s = binv_[r * m_ + (j - n_)];
            }
            alpha[r] = s;
        }
        return alpha;
    }

    void pivot(std::size_t r, std::size_t j, const std::vector<double>& alpha, double theta) {
        for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * alpha[i];
        xb_[r] = theta;
        const double d = alpha[r];
        for (std::size_t k = 0; k < m_; ++k) binv_[r * m_ + k] /= d;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r || alpha[i] == 0.0) continue;
            const double f = alpha[i];
            for (std::size_t k = 0; k < m_; ++k) binv_[i * m_ + k] -= f * binv_[r * m_ + k];
        }
        basic_[basis_[r]] = 0;
        basis_[r] = j;
        basic_[j] = 1;
        for (double& v : xb_) {
            if (v < 0.0 && v > -opt_.feasibility_tolerance) v = 0.0;
        }
        ++iterations_;
        if (iterations_ % opt_.refactor_every == 0) {
            if (!refactor()) throw Error(ErrorCode::numeric, "simplex basis became singular");
            for (double& v : xb_) {
                if (v < 0.0 && v > -opt_.feasibility_tolerance * b_scale_) v = 0.0;
            }
        }
    }

    LpStatus iterate(bool phase1) {
        std::size_t degenerate = 0;
        bool bland = false;
        const std::size_t limit = n_;
        while (true) {
            if (iterations_ >= opt_.max_iterations) return LpStatus::iteration_limit;
            const std::vector<double> y = row_duals(phase1);
            std::size_t enter = limit;
            double best = -opt_.feasibility_tolerance;
            for (std::size_t j = 0; j < limit; ++j) {
                if (basic_[j]) continue;
                double d = cost(j, phase1);
                for (std::size_t i = 0; i < m_; ++i) d -= y[i] * entry(i, j);
                if (bland) {
                    if (d < -opt_.feasibility_tolerance) {
                        enter = j;
                        break;
                    }
                } else if (d < best) {
                    best = d;
                    enter = j;
                }
            }
            if (enter == limit) return LpStatus::optimal;

            const std::vector<double> alpha = column(enter);
            std::size_t leave = m_;
            double ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                double cand;
                if (!phase1 && basis_[r] >= n_ && std::abs(alpha[r]) > opt_.pivot_tolerance) {
                    cand = 0.0;
                } else if (alpha[r] > opt_.pivot_tolerance) {
                    cand = std::max(xb_[r], 0.0) / alpha[r];
                } else {
                    continue;
                }
                if (leave == m_ || cand < ratio - 1e-12) {
                    leave = r;
                    ratio = cand;
                } else if (cand <= ratio + 1e-12 &&
                           (bland ? basis_[r] < basis_[leave] : std::abs(alpha[r]) > std::abs(alpha[leave]))) {
                    leave = r;
                    ratio = std::min(ratio, cand);
                }
            }
            if (leave == m_) return LpStatus::unbounded;
            const double theta = std::max(ratio, 0.0);
            if (theta <= opt_.feasibility_tolerance) {
                if (++degenerate >= opt_.bland_after) bland = true;
            } else {
                degenerate = 0;
                bland = false;
            }
            pivot(leave, enter, alpha, theta);
        }
    }

    void drive_out_artificials() {
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < n_) continue;
            for (std::size_t j = 0; j < n_; ++j) {
                if (basic_[j]) continue;
                double v = 0.0;
                for (std::size_t i = 0; i < m_; ++i) v += binv_[r * m_ + i] * entry(i, j);
                if (std::abs(v) > 1e-9) {
                    xb_[r] = 0.0;
                    pivot(r, j, column(j), 0.0);
                    break;
                }
            }
        }
    }

    LpResult finish(LpStatus status) {
        LpResult res;
        res.status = status;
        res.iterations = iterations_;
        res.basis = basis_;
        res.x.assign(n_, 0.0);
        for (std::size_t r = 0; r < m_; ++r) {
            if (basis_[r] < n_) res.x[basis_[r]] = std::max(xb_[r], 0.0);
        }
        for (std::size_t j = 0; j < n_; ++j) res.objective += c_[j] * res.x[j];
        res.duals = row_duals(false);
        for (std::size_t i = 0; i < m_; ++i) res.duals[i] *= sign_[i];
        return res;
    }

    const DenseMatrix& a_;
    std::span<const double> c_;
    const LpOptions& opt_;
    std::size_t m_;
    std::size_t n_;
    std::vector<double> b_;
    std::vector<double> sign_;
    double b_scale_ = 1.0;
    std::vector<std::size_t> basis_;
    std::vector<char> basic_;
    std::vector<double> binv_;
    std::vector<double> xb_;
    std::size_t iterations_ = 0;
};

}  // namespace

LpResult solve_lp(const DenseMatrix& a, std::span<const double> b, std::span<const double> c,
                  std::span<const std::size_t> warm_basis, const LpOptions& options) {
    if (b.size() != a.rows() || c.size() != a.cols()) {
        throw Error(ErrorCode::configuration, "linear program dimensions do not match");
    }
    if (a.rows() == 0) {
        LpResult res;
        res.x.assign(a.cols(), 0.0);
        bool bounded = std::all_of(c.begin(), c.end(), [](double v) { return v >= 0.0; });
        res.status = bounded ? LpStatus::optimal : LpStatus::unbounded;
        return res;
    }
    Simplex simplex(a, b, c, options);
    return simplex.run(warm_basis);
}

}  // namespace riskroute
