#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "riskroute/grid.hpp"

namespace riskroute {

/// Grid samples u[first], u[first + 1], ... of a value function.
struct GridWindow {
    GridIndex first = 0;
    std::span<const double> values;

    GridIndex last() const noexcept { return first + static_cast<GridIndex>(values.size()) - 1; }
    double at(GridIndex k) const;
};

/// sum_l pmf_l * u[k - l] over the positive-mass support of pmf.
/// Throws ErrorCode::index when the window does not cover k - l for every such l.
double convolve_pointwise(const GridWindow& u, const GridDistribution& pmf, GridIndex k);

/// convolve_pointwise for every k in [k_begin, k_begin + count), via one FFT product.
std::vector<double> convolve_fft_block(const GridWindow& u, const GridDistribution& pmf, GridIndex k_begin,
                                       std::size_t count);

/// Real FFT of a fixed power-of-two length, backed by FFTW plans.
class RealFft {
public:
    explicit RealFft(std::size_t length);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t length() const noexcept { return length_; }
    /// Spectrum has length() / 2 + 1 bins. Input is zero-padded to length().
    void forward(std::span<const double> input, std::vector<std::complex<double>>& spectrum);
    /// Unnormalized inverse scaled by 1 / length().
    void inverse(const std::vector<std::complex<double>>& spectrum, std::vector<double>& output);

private:
    struct Plans;
    std::size_t length_;
    std::unique_ptr<Plans> plans_;
};

std::size_t next_power_of_two(std::size_t n) noexcept;

/// Zero-delay streaming convolution. Inputs u[start], u[start + 1], ... are fed in
/// order; feeding u[m] returns the output at m + first support index. Taps
/// [0, direct_taps) are evaluated directly and the rest through FFT segments of
/// doubling size, each applied once its input block is complete.
class StreamConvolver {
public:
    struct Output {
        GridIndex index;  ///< output grid index
        double value;
        bool complete;    ///< true when no input before start was needed
    };

    StreamConvolver(const GridDistribution& pmf, GridIndex start, std::size_t direct_taps = 16);
    ~StreamConvolver();
    StreamConvolver(StreamConvolver&&) noexcept;
    StreamConvolver& operator=(StreamConvolver&&) noexcept;

    /// Throws ErrorCode::state unless index == next_input().
    Output feed(GridIndex index, double value);

    GridIndex next_input() const noexcept { return next_; }
    GridIndex start() const noexcept { return start_; }
    /// Output index emitted by the next feed.
    GridIndex next_output() const noexcept { return next_ + offset_; }

    std::size_t fft_count() const noexcept { return fft_count_; }

private:
    struct Segment;

    GridIndex start_;
    GridIndex next_;
    GridIndex offset_;
    std::size_t taps_;
    std::vector<double> kernel_;
    std::size_t direct_;
    std::vector<Segment> segments_;
    std::vector<double> history_;  // ring buffer of recent inputs
    std::vector<double> pending_;  // ring buffer of partial outputs
    std::size_t fft_count_ = 0;
};

}  // namespace riskroute
