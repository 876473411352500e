#include "riskroute/sliding_hull.hpp"

#include <cmath>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

int orientation(const HullPoint& a, const HullPoint& b, const HullPoint& c) noexcept {
    const double bx = b.x - a.x;
    const double by = b.y - a.y;
    const double cx = c.x - a.x;
    const double cy = c.y - a.y;
    const double cross = bx * cy - by * cx;
    const double scale = (std::abs(bx) + std::abs(by)) * (std::abs(cx) + std::abs(cy));
    if (cross > 1e-12 * scale) return 1;
    if (cross < -1e-12 * scale) return -1;
    return 0;
}

SlidingUpperHull::SlidingUpperHull(std::size_t window, HullSide side) : window_(window), side_(side) {
    if (window == 0) throw Error(ErrorCode::configuration, "hull window must hold at least one point");
}

void SlidingUpperHull::clear() {
    points_.clear();
    right_count_ = 0;
    left_.clear();
    evicted_.clear();
    evicted_count_.clear();
    right_.clear();
    joined_ = false;
}

void SlidingUpperHull::push(double x, double y) {
    if (full()) throw Error(ErrorCode::state, "hull window is full; use advance");
    if (!points_.empty() && !(x > points_.back().x)) {
        throw Error(ErrorCode::state, "hull points must arrive with increasing x");
    }
    const HullPoint p = stored(x, y);
    points_.push_back(p);
    ++right_count_;
    append_right(p);
    joined_ = false;
}

void SlidingUpperHull::advance(double x, double y) {
    if (!full()) {
        std::ostringstream msg;
        msg << "hull advanced before its window of " << window_ << " points was filled (" << points_.size() << ")";
        throw Error(ErrorCode::state, msg.str());
    }
    if (!(x > points_.back().x)) throw Error(ErrorCode::state, "hull points must arrive with increasing x");
    drop_oldest();
    const HullPoint p = stored(x, y);
    points_.push_back(p);
    ++right_count_;
    append_right(p);
    joined_ = false;
}

void SlidingUpperHull::feed(double x, double y) {
    if (full()) {
        advance(x, y);
    } else {
        push(x, y);
    }
}

void SlidingUpperHull::append_right(const HullPoint& p) {
    while (right_.size() >= 2 && orientation(right_[right_.size() - 2], right_.back(), p) <= 0) {
        right_.pop_back();
        ++pops_;
    }
    right_.push_back(p);
    ++pushes_;
}

void SlidingUpperHull::insert_left(const HullPoint& p) {
    std::size_t count = 0;
    while (left_.size() >= 2 && orientation(p, left_.back(), left_[left_.size() - 2]) <= 0) {
        evicted_.push_back(left_.back());
        left_.pop_back();
        ++pops_;
        ++count;
    }
    left_.push_back(p);
    ++pushes_;
    evicted_count_.push_back(count);
}

void SlidingUpperHull::rebuild_left() {
    left_.clear();
    evicted_.clear();
    evicted_count_.clear();
    for (std::size_t t = points_.size(); t-- > 0;) insert_left(points_[t]);
    right_.clear();
    right_count_ = 0;
}

void SlidingUpperHull::drop_oldest() {
    if (left_.empty()) rebuild_left();
    left_.pop_back();
    ++pops_;
    std::size_t count = evicted_count_.back();
    evicted_count_.pop_back();
    while (count-- > 0) {
        left_.push_back(evicted_.back());
        evicted_.pop_back();
        ++pushes_;
    }
    points_.pop_front();
}

void SlidingUpperHull::join() const {
    if (joined_) return;
    joined_ = true;
    const std::size_t nl = left_.size();
    const std::size_t nr = right_.size();
    left_end_ = nl;
    right_begin_ = 0;
    if (nl == 0 || nr == 0) return;

    // rightmost tangent point on the right chain seen from p
    const auto tangent = [&](const HullPoint& p) {
        std::size_t lo = 0;
        std::size_t hi = nr - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (orientation(p, right_[mid], right_[mid + 1]) <= 0) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        return lo;
    };

    std::size_t lo = 0;
    std::size_t hi = nl - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        const std::size_t j = tangent(left_at(mid));
        if (orientation(left_at(mid), left_at(mid + 1), right_[j]) > 0) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    left_end_ = lo + 1;
    right_begin_ = tangent(left_at(lo));
}

std::size_t SlidingUpperHull::extreme_count() const {
    join();
    return left_end_ + (right_.size() - right_begin_);
}

HullPoint SlidingUpperHull::stored_extreme(std::size_t t) const {
    join();
    if (t < left_end_) return left_at(t);
    const std::size_t r = right_begin_ + (t - left_end_);
    if (r >= right_.size()) throw Error(ErrorCode::index, "extreme point index out of range");
    return right_[r];
}

HullPoint SlidingUpperHull::extreme(std::size_t t) const { return original(stored_extreme(t)); }

std::vector<HullPoint> SlidingUpperHull::extremes() const {
    const std::size_t n = extreme_count();
    std::vector<HullPoint> out;
    out.reserve(n);
    for (std::size_t t = 0; t < n; ++t) out.push_back(extreme(t));
    return out;
}

HullPoint SlidingUpperHull::argmin_linear(double slope) const {
    const std::size_t n = extreme_count();
    if (n == 0) throw Error(ErrorCode::state, "hull is empty");
    const auto f = [&](std::size_t t) {
        const HullPoint p = extreme(t);
        return p.y - slope * p.x;
    };
    if (side_ == HullSide::upper) {
        // concave along the upper chain: an endpoint is optimal
        return f(n - 1) < f(0) ? extreme(n - 1) : extreme(0);
    }
    std::size_t lo = 0;
    std::size_t hi = n - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (f(mid + 1) < f(mid)) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    return extreme(lo);
}

}  // namespace riskroute
