#pragma once

#include <cstddef>
#include <deque>
#include <vector>

namespace riskroute {

struct HullPoint {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const HullPoint&, const HullPoint&) = default;
};

/// Which chain of the convex hull is tracked.
enum class HullSide {
    upper,  ///< vertices of the upper chain; concave sequences are entirely extreme
    lower,  ///< vertices of the lower chain; convex sequences are entirely extreme
};

/// Sign of the turn a -> b -> c: +1 left, -1 right, 0 collinear within a relative 1e-12.
int orientation(const HullPoint& a, const HullPoint& b, const HullPoint& c) noexcept;

/// Extreme points of the hull of a sliding window of points with increasing x.
///
/// The window is split into an older segment, kept as a chain built by inserting
/// right to left together with the points each insertion evicted, and a newer
/// segment kept as a monotone chain appended on the right. Dropping the oldest
/// point undoes its insertion. When the older segment runs out, the whole window
/// is rebuilt into it. Queries join the two chains at their common tangent.
class SlidingUpperHull {
public:
    explicit SlidingUpperHull(std::size_t window, HullSide side = HullSide::upper);

    std::size_t window() const noexcept { return window_; }
    std::size_t size() const noexcept { return points_.size(); }
    bool full() const noexcept { return points_.size() == window_; }
    HullSide side() const noexcept { return side_; }

    /// Adds a point while the window is still filling. Throws ErrorCode::state when full.
    void push(double x, double y);
    /// Drops the oldest point and appends a new one. Throws ErrorCode::state unless full.
    void advance(double x, double y);
    /// push() until full, advance() afterwards.
    void feed(double x, double y);
    void clear();

    /// Number of extreme points of the current window.
    std::size_t extreme_count() const;
    /// t-th extreme point by increasing x.
    HullPoint extreme(std::size_t t) const;
    std::vector<HullPoint> extremes() const;

    /// Extreme point minimizing y - slope * x; the leftmost one on ties.
    HullPoint argmin_linear(double slope) const;

    std::size_t pushes() const noexcept { return pushes_; }
    std::size_t pops() const noexcept { return pops_; }

private:
    HullPoint stored(double x, double y) const noexcept { return {x, side_ == HullSide::upper ? -y : y}; }
    HullPoint original(const HullPoint& p) const noexcept { return {p.x, side_ == HullSide::upper ? -p.y : p.y}; }

    void append_right(const HullPoint& p);
    void insert_left(const HullPoint& p);
    void drop_oldest();
    void rebuild_left();
    void join() const;
    const HullPoint& left_at(std::size_t t) const { return left_[left_.size() - 1 - t]; }
    HullPoint stored_extreme(std::size_t t) const;

    std::size_t window_;
    HullSide side_;
    std::deque<HullPoint> points_;    // raw window in stored coordinates
    std::size_t right_count_ = 0;     // newest points that belong to the right chain
    std::vector<HullPoint> left_;     // left chain, leftmost point at the back
    std::vector<HullPoint> evicted_;  // points removed by each left insertion, concatenated
    std::vector<std::size_t> evicted_count_;
    std::vector<HullPoint> right_;    // right chain, leftmost point first

    mutable bool joined_ = false;
    mutable std::size_t left_end_ = 0;     // left chain positions [0, left_end_) are extreme
    mutable std::size_t right_begin_ = 0;  // right chain positions [right_begin_, size) are extreme

    std::size_t pushes_ = 0;
    std::size_t pops_ = 0;
};

}  // namespace riskroute
