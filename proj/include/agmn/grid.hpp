#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace agmn {

struct GridIndex {
    int row = 0;
    int col = 0;

    friend bool operator==(const GridIndex&, const GridIndex&) = default;
};

/// Dense row-major matrix of doubles. Holds score maps, kernels and messages.
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(int rows, int cols, double fill = 0.0);
    Grid2D(int rows, int cols, std::vector<double> data);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool same_shape(const Grid2D& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    double& operator()(int r, int c) noexcept { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const noexcept { return data_[static_cast<std::size_t>(r) * cols_ + c]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    double sum() const noexcept;

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

/// Ordered stack of equally shaped planes, stored channel-major then row-major.
class TensorStack {
public:
    TensorStack() = default;
    TensorStack(int channels, int rows, int cols, double fill = 0.0);
    TensorStack(int channels, int rows, int cols, std::vector<double> data);

    int channels() const noexcept { return channels_; }
    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    std::size_t plane_size() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }

    Grid2D channel(int c) const;
    void set_channel(int c, const Grid2D& plane);

    std::span<double> plane(int c) noexcept { return {data_.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(int c) const noexcept { return {data_.data() + c * plane_size(), plane_size()}; }

    double& at(int c, int r, int col) noexcept { return data_[c * plane_size() + static_cast<std::size_t>(r) * cols_ + col]; }
    double at(int c, int r, int col) const noexcept { return data_[c * plane_size() + static_cast<std::size_t>(r) * cols_ + col]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    friend bool operator==(const TensorStack&, const TensorStack&) = default;

private:
    int channels_ = 0;
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> data_;
};

TensorStack stack_planes(std::span<const Grid2D> planes);

/// True 2D convolution with zero padding; output has the shape of `h`.
///
/// M[y][x] = sum over kernel offsets (dy, dx) of h[y-dy][x-dx] * k[cr+dy][cc+dx],
/// so a kernel impulse at offset (dy, dx) from the center shifts `h` by (dy, dx).
/// Terms are accumulated in kernel row-major order for every output cell, which
/// makes the result bitwise reproducible. Throws Errc::invalid_kernel for even
/// kernel dimensions.
Grid2D conv2d_same(const Grid2D& h, const Grid2D& k);

/// Same contract as conv2d_same, evaluated through real-to-complex FFTs on a
/// wrap-free padded grid. Agrees with the direct path to ~1e-15 of the output
/// maximum; tiny negative round-off is clamped to zero.
Grid2D conv2d_same_fft(const Grid2D& h, const Grid2D& k);

/// Point reflection through the center: out[r][c] = k[rows-1-r][cols-1-c].
Grid2D reflect180(const Grid2D& k);

inline constexpr double kNormalizeFloor = 1e-12;

/// Divides by the total. Totals at or below kNormalizeFloor yield the uniform grid.
Grid2D normalize_sum(const Grid2D& g);

Grid2D hadamard(std::span<const Grid2D> factors);

/// Location of the maximum, ties going to the smallest row-major index.
GridIndex argmax_cell(const Grid2D& g);

bool all_finite(std::span<const double> values) noexcept;

}  // namespace agmn
