#include "riskroute/convolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <sstream>

#include "riskroute/errors.hpp"

namespace riskroute {

namespace {

// FFTW planner calls are not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

void require_cover(const GridWindow& u, GridIndex lo, GridIndex hi) {
    if (lo < u.first || hi > u.last()) {
        std::ostringstream msg;
        msg << "convolution needs u on [" << lo << ", " << hi << "] but the window covers [" << u.first << ", "
            << u.last() << "]";
        throw Error(ErrorCode::index, msg.str());
    }
}

std::vector<double> support_kernel(const GridDistribution& pmf) {
    std::vector<double> h;
    for (GridIndex k = pmf.min_support(); k <= pmf.max_support(); ++k) h.push_back(pmf.weight(k));
    return h;
}

}  // namespace

double GridWindow::at(GridIndex k) const {
    if (k < first || k > last()) {
        std::ostringstream msg;
        msg << "grid index " << k << " outside [" << first << ", " << last() << "]";
        throw Error(ErrorCode::index, msg.str());
    }
    return values[static_cast<std::size_t>(k - first)];
}

std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

double convolve_pointwise(const GridWindow& u, const GridDistribution& pmf, GridIndex k) {
    const GridIndex lo = pmf.min_support();
    const GridIndex hi = pmf.max_support();
    require_cover(u, k - hi, k - lo);
    double sum = 0.0;
    for (GridIndex l = lo; l <= hi; ++l) {
        const double w = pmf.weight(l);
        if (w != 0.0) sum += w * u.values[static_cast<std::size_t>(k - l - u.first)];
    }
    return sum;
}

struct RealFft::Plans {
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

RealFft::RealFft(std::size_t length) : length_(length), plans_(std::make_unique<Plans>()) {
    if (length < 2 || (length & (length - 1)) != 0) {
        throw Error(ErrorCode::configuration, "FFT length must be a power of two >= 2");
    }
    const int n = static_cast<int>(length);
    std::lock_guard lock(planner_mutex());
    plans_->real = fftw_alloc_real(length);
    plans_->spec = fftw_alloc_complex(length / 2 + 1);
    plans_->fwd = fftw_plan_dft_r2c_1d(n, plans_->real, plans_->spec, FFTW_ESTIMATE);
    plans_->inv = fftw_plan_dft_c2r_1d(n, plans_->spec, plans_->real, FFTW_ESTIMATE);
    if (!plans_->fwd || !plans_->inv) throw Error(ErrorCode::numeric, "FFTW could not create a plan");
}

RealFft::~RealFft() {
    std::lock_guard lock(planner_mutex());
    if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
    if (plans_->inv) fftw_destroy_plan(plans_->inv);
    fftw_free(plans_->real);
    fftw_free(plans_->spec);
}

void RealFft::forward(std::span<const double> input, std::vector<std::complex<double>>& spectrum) {
    const std::size_t m = std::min(input.size(), length_);
    std::copy_n(input.begin(), m, plans_->real);
    std::fill(plans_->real + m, plans_->real + length_, 0.0);
    fftw_execute(plans_->fwd);
    spectrum.resize(length_ / 2 + 1);
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        spectrum[i] = {plans_->spec[i][0], plans_->spec[i][1]};
    }
}

void RealFft::inverse(const std::vector<std::complex<double>>& spectrum, std::vector<double>& output) {
    for (std::size_t i = 0; i < length_ / 2 + 1; ++i) {
        plans_->spec[i][0] = spectrum[i].real();
        plans_->spec[i][1] = spectrum[i].imag();
    }
    fftw_execute(plans_->inv);
    output.resize(length_);
    const double scale = 1.0 / static_cast<double>(length_);
    for (std::size_t i = 0; i < length_; ++i) output[i] = plans_->real[i] * scale;
}

std::vector<double> convolve_fft_block(const GridWindow& u, const GridDistribution& pmf, GridIndex k_begin,
                                       std::size_t count) {
    if (count == 0) return {};
    const GridIndex lo = pmf.min_support();
    const GridIndex hi = pmf.max_support();
    const auto len = static_cast<std::size_t>(hi - lo + 1);
    const GridIndex k_end = k_begin + static_cast<GridIndex>(count) - 1;
    require_cover(u, k_begin - hi, k_end - lo);

    const std::vector<double> kernel = support_kernel(pmf);
    const std::span<const double> segment =
        u.values.subspan(static_cast<std::size_t>(k_begin - hi - u.first), count + len - 1);

    RealFft fft(next_power_of_two(count + 2 * len - 2 > 1 ? count + 2 * len - 2 : 2));
    std::vector<std::complex<double>> a;
    std::vector<std::complex<double>> b;
    fft.forward(segment, a);
    fft.forward(kernel, b);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
    std::vector<double> full;
    fft.inverse(a, full);

    std::vector<double> out(count);
    for (std::size_t t = 0; t < count; ++t) out[t] = full[t + len - 1];
    return out;
}

struct StreamConvolver::Segment {
    std::size_t block = 0;  // input block size S, FFT length 2S
    std::unique_ptr<RealFft> fft;
    std::vector<std::size_t> starts;  // first tap of each kernel slice of this size
    std::vector<std::vector<std::complex<double>>> spectra;
    std::vector<std::complex<double>> work;
    std::vector<double> product;
};

StreamConvolver::StreamConvolver(const GridDistribution& pmf, GridIndex start, std::size_t direct_taps)
    : start_(start), next_(start), offset_(pmf.min_support()), kernel_(support_kernel(pmf)) {
    taps_ = kernel_.size();
    direct_ = std::min(next_power_of_two(std::max<std::size_t>(direct_taps, 1)), taps_);

    // slices [s, s + S) with S = N0, 2N0, 2N0, 4N0, 4N0, ... keep s >= S
    std::size_t s = direct_;
    std::size_t size = direct_;
    bool repeat = false;
    std::size_t reach = 1;
    while (s < taps_) {
        auto it = std::find_if(segments_.begin(), segments_.end(), [&](const Segment& g) { return g.block == size; });
        if (it == segments_.end()) {
            Segment g;
            g.block = size;
            g.fft = std::make_unique<RealFft>(2 * size);
            segments_.push_back(std::move(g));
            it = segments_.end() - 1;
        }
        const std::size_t end = std::min(s + size, taps_);
        std::vector<double> slice(kernel_.begin() + static_cast<std::ptrdiff_t>(s),
                                  kernel_.begin() + static_cast<std::ptrdiff_t>(end));
        it->starts.push_back(s);
        it->spectra.emplace_back();
        it->fft->forward(slice, it->spectra.back());
        reach = std::max(reach, s + 2 * size);
        s += size;
        if (s == 2 * direct_ || repeat) {
            size *= 2;
            repeat = false;
        } else {
            repeat = true;
        }
    }

    std::size_t max_block = direct_;
    for (const auto& g : segments_) max_block = std::max(max_block, g.block);
    history_.assign(next_power_of_two(std::max(max_block, direct_) + 1), 0.0);
    pending_.assign(next_power_of_two(reach + 1), 0.0);
}

StreamConvolver::~StreamConvolver() = default;
StreamConvolver::StreamConvolver(StreamConvolver&&) noexcept = default;
StreamConvolver& StreamConvolver::operator=(StreamConvolver&&) noexcept = default;

StreamConvolver::Output StreamConvolver::feed(GridIndex index, double value) {
    if (index != next_) {
        std::ostringstream msg;
        msg << "stream convolver expected input " << next_ << ", got " << index;
        throw Error(ErrorCode::state, msg.str());
    }
    const auto n = static_cast<std::size_t>(next_ - start_);
    const std::size_t hmask = history_.size() - 1;
    const std::size_t pmask = pending_.size() - 1;
    history_[n & hmask] = value;

    double y = pending_[n & pmask];
    pending_[n & pmask] = 0.0;
    const std::size_t direct = std::min(direct_, n + 1);
    for (std::size_t j = 0; j < direct; ++j) y += kernel_[j] * history_[(n - j) & hmask];

    for (auto& g : segments_) {
        if ((n + 1) % g.block != 0) continue;
        const std::size_t base = n + 1 - g.block;
        std::vector<double> block(g.block);
        for (std::size_t t = 0; t < g.block; ++t) block[t] = history_[(base + t) & hmask];
        std::vector<std::complex<double>> input;
        g.fft->forward(block, input);
        ++fft_count_;
        for (std::size_t s = 0; s < g.starts.size(); ++s) {
            g.work.resize(input.size());
            for (std::size_t i = 0; i < input.size(); ++i) g.work[i] = input[i] * g.spectra[s][i];
            g.fft->inverse(g.work, g.product);
            ++fft_count_;
            const std::size_t origin = base + g.starts[s];
            for (std::size_t t = 0; t + 1 < 2 * g.block; ++t) pending_[(origin + t) & pmask] += g.product[t];
        }
    }

    Output out{next_ + offset_, y, n + 1 >= taps_};
    ++next_;
    return out;
}

}  // namespace riskroute
