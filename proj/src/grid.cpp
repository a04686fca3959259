#include "agmn/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

#include "agmn/error.hpp"

namespace agmn {

const char* to_string(Errc code) noexcept {
    switch (code) {
        case Errc::invalid_kernel: return "invalid kernel";
        case Errc::invalid_potential: return "invalid potential";
        case Errc::shape_mismatch: return "shape mismatch";
        case Errc::format: return "format error";
        case Errc::not_a_tree: return "not a tree";
        case Errc::schedule_violation: return "schedule violation";
        case Errc::budget_exceeded: return "budget exceeded";
        case Errc::contract: return "contract violation";
        case Errc::invalid_argument: return "invalid argument";
        case Errc::io: return "i/o error";
    }
    return "error";
}

namespace {

std::string shape_str(int r, int c) { return std::to_string(r) + "x" + std::to_string(c); }

void require_positive_shape(int rows, int cols) {
    if (rows <= 0 || cols <= 0) {
        throw Error(Errc::invalid_argument, "grid dimensions must be positive, got " + shape_str(rows, cols));
    }
}

void require_odd_kernel(const Grid2D& k) {
    if (k.rows() % 2 == 0 || k.cols() % 2 == 0) {
        throw Error(Errc::invalid_kernel, "kernel dimensions must be odd, got " + shape_str(k.rows(), k.cols()));
    }
}

}  // namespace

Grid2D::Grid2D(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    require_positive_shape(rows, cols);
    data_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Grid2D::Grid2D(int rows, int cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_positive_shape(rows, cols);
    if (data_.size() != static_cast<std::size_t>(rows) * cols) {
        throw Error(Errc::shape_mismatch, "grid " + shape_str(rows, cols) + " given " +
                                              std::to_string(data_.size()) + " values");
    }
}

double Grid2D::sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

TensorStack::TensorStack(int channels, int rows, int cols, double fill)
    : channels_(channels), rows_(rows), cols_(cols) {
    require_positive_shape(rows, cols);
    if (channels <= 0) throw Error(Errc::invalid_argument, "channel count must be positive");
    data_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

TensorStack::TensorStack(int channels, int rows, int cols, std::vector<double> data)
    : channels_(channels), rows_(rows), cols_(cols), data_(std::move(data)) {
    require_positive_shape(rows, cols);
    if (channels <= 0) throw Error(Errc::invalid_argument, "channel count must be positive");
    if (data_.size() != static_cast<std::size_t>(channels) * plane_size()) {
        throw Error(Errc::shape_mismatch, "stack of " + std::to_string(channels) + "x" + shape_str(rows, cols) +
                                              " given " + std::to_string(data_.size()) + " values");
    }
}

Grid2D TensorStack::channel(int c) const {
    if (c < 0 || c >= channels_) throw Error(Errc::invalid_argument, "channel " + std::to_string(c) + " out of range");
    auto p = plane(c);
    return Grid2D(rows_, cols_, std::vector<double>(p.begin(), p.end()));
}

void TensorStack::set_channel(int c, const Grid2D& g) {
    if (c < 0 || c >= channels_) throw Error(Errc::invalid_argument, "channel " + std::to_string(c) + " out of range");
    if (g.rows() != rows_ || g.cols() != cols_) {
        throw Error(Errc::shape_mismatch, "plane " + shape_str(g.rows(), g.cols()) + " into stack of " +
                                              shape_str(rows_, cols_));
    }
    std::ranges::copy(g.values(), plane(c).begin());
}

TensorStack stack_planes(std::span<const Grid2D> planes) {
    if (planes.empty()) throw Error(Errc::invalid_argument, "cannot stack zero planes");
    TensorStack out(static_cast<int>(planes.size()), planes[0].rows(), planes[0].cols());
    for (std::size_t i = 0; i < planes.size(); ++i) out.set_channel(static_cast<int>(i), planes[i]);
    return out;
}

Grid2D conv2d_same(const Grid2D& h, const Grid2D& k) {
    require_odd_kernel(k);
    const int hr = h.rows();
    const int hc = h.cols();
    const int cr = (k.rows() - 1) / 2;
    const int cc = (k.cols() - 1) / 2;
    Grid2D out(hr, hc);

    // Tap-outer loop: each output cell still receives its terms in kernel
    // row-major order. Zero taps contribute exactly nothing and are skipped.
    for (int ky = 0; ky < k.rows(); ++ky) {
        const int dy = ky - cr;
        const int y0 = std::max(0, dy);
        const int y1 = std::min(hr, hr + dy);
        for (int kx = 0; kx < k.cols(); ++kx) {
            const double w = k(ky, kx);
            if (w == 0.0) continue;
            const int dx = kx - cc;
            const int x0 = std::max(0, dx);
            const int x1 = std::min(hc, hc + dx);
            for (int y = y0; y < y1; ++y) {
                const double* src = h.values().data() + static_cast<std::size_t>(y - dy) * hc;
                double* dst = out.values().data() + static_cast<std::size_t>(y) * hc;
                for (int x = x0; x < x1; ++x) dst[x] += w * src[x - dx];
            }
        }
    }
    return out;
}

namespace {

int smooth_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5, 7}) {
            while (r % p == 0) r /= p;
        }
        if (r == 1) return m;
    }
}

struct FftwDeleter {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
};

// FFTW planning is not thread-safe; execution of an existing plan on fresh
// arrays is. Plans are created once per padded shape and kept for the process.
PlanPair plans_for(int p, int q) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, PlanPair> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find({p, q});
    if (it != cache.end()) return it->second;

    const std::size_t nreal = static_cast<std::size_t>(p) * q;
    const std::size_t ncplx = static_cast<std::size_t>(p) * (q / 2 + 1);
    RealBuffer r(fftw_alloc_real(nreal));
    ComplexBuffer c(fftw_alloc_complex(ncplx));
    PlanPair plans;
    plans.forward = fftw_plan_dft_r2c_2d(p, q, r.get(), c.get(), FFTW_ESTIMATE);
    plans.inverse = fftw_plan_dft_c2r_2d(p, q, c.get(), r.get(), FFTW_ESTIMATE);
    cache.emplace(std::pair{p, q}, plans);
    return plans;
}

}  // namespace

Grid2D conv2d_same_fft(const Grid2D& h, const Grid2D& k) {
    require_odd_kernel(k);
    const int hr = h.rows();
    const int hc = h.cols();
    const int cr = (k.rows() - 1) / 2;
    const int cc = (k.cols() - 1) / 2;
    // Circular aliasing stays out of the kept window when P >= n + c and every
    // kernel tap lands in a distinct bin.
    const int p = smooth_size(std::max(hr + cr, k.rows()));
    const int q = smooth_size(std::max(hc + cc, k.cols()));
    const int qh = q / 2 + 1;
    const std::size_t nreal = static_cast<std::size_t>(p) * q;
    const std::size_t ncplx = static_cast<std::size_t>(p) * qh;

    const PlanPair plans = plans_for(p, q);
    RealBuffer hbuf(fftw_alloc_real(nreal));
    RealBuffer kbuf(fftw_alloc_real(nreal));
    ComplexBuffer hspec(fftw_alloc_complex(ncplx));
    ComplexBuffer kspec(fftw_alloc_complex(ncplx));

    std::fill_n(hbuf.get(), nreal, 0.0);
    std::fill_n(kbuf.get(), nreal, 0.0);
    for (int y = 0; y < hr; ++y) {
        for (int x = 0; x < hc; ++x) hbuf[static_cast<std::size_t>(y) * q + x] = h(y, x);
    }
    // Kernel center goes to bin (0, 0); negative offsets wrap.
    for (int ky = 0; ky < k.rows(); ++ky) {
        const int row = ((ky - cr) % p + p) % p;
        for (int kx = 0; kx < k.cols(); ++kx) {
            const int col = ((kx - cc) % q + q) % q;
            kbuf[static_cast<std::size_t>(row) * q + col] = k(ky, kx);
        }
    }

    fftw_execute_dft_r2c(plans.forward, hbuf.get(), hspec.get());
    fftw_execute_dft_r2c(plans.forward, kbuf.get(), kspec.get());
    for (std::size_t i = 0; i < ncplx; ++i) {
        const double re = hspec[i][0] * kspec[i][0] - hspec[i][1] * kspec[i][1];
        const double im = hspec[i][0] * kspec[i][1] + hspec[i][1] * kspec[i][0];
        hspec[i][0] = re;
        hspec[i][1] = im;
    }
    fftw_execute_dft_c2r(plans.inverse, hspec.get(), hbuf.get());

    const double scale = 1.0 / static_cast<double>(nreal);
    const bool clamp = std::ranges::all_of(h.values(), [](double v) { return v >= 0.0; }) &&
                       std::ranges::all_of(k.values(), [](double v) { return v >= 0.0; });
    Grid2D out(hr, hc);
    for (int y = 0; y < hr; ++y) {
        for (int x = 0; x < hc; ++x) {
            const double v = hbuf[static_cast<std::size_t>(y) * q + x] * scale;
            out(y, x) = clamp ? std::max(0.0, v) : v;
        }
    }
    return out;
}

Grid2D reflect180(const Grid2D& k) {
    Grid2D out(k.rows(), k.cols());
    for (int r = 0; r < k.rows(); ++r) {
        for (int c = 0; c < k.cols(); ++c) out(r, c) = k(k.rows() - 1 - r, k.cols() - 1 - c);
    }
    return out;
}

Grid2D normalize_sum(const Grid2D& g) {
    for (double v : g.values()) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(Errc::invalid_potential, "normalize_sum needs finite nonnegative entries, found " +
                                                     std::to_string(v));
        }
    }
    const double total = g.sum();
    Grid2D out(g.rows(), g.cols());
    if (total > kNormalizeFloor) {
        auto src = g.values();
        auto dst = out.values();
        for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] / total;
    } else {
        std::ranges::fill(out.values(), 1.0 / static_cast<double>(g.size()));
    }
    return out;
}

Grid2D hadamard(std::span<const Grid2D> factors) {
    if (factors.empty()) throw Error(Errc::invalid_argument, "hadamard needs at least one factor");
    Grid2D out = factors[0];
    for (std::size_t f = 1; f < factors.size(); ++f) {
        if (!factors[f].same_shape(out)) {
            throw Error(Errc::shape_mismatch, "hadamard factor " + std::to_string(f) + " is " +
                                                  shape_str(factors[f].rows(), factors[f].cols()) + ", expected " +
                                                  shape_str(out.rows(), out.cols()));
        }
        auto dst = out.values();
        auto src = factors[f].values();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= src[i];
    }
    return out;
}

GridIndex argmax_cell(const Grid2D& g) {
    auto v = g.values();
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return {static_cast<int>(best / g.cols()), static_cast<int>(best % g.cols())};
}

bool all_finite(std::span<const double> values) noexcept {
    return std::ranges::all_of(values, [](double v) { return std::isfinite(v); });
}

}  // namespace agmn
