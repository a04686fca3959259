#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agmn/grid.hpp"
#include "agmn/hand_graph.hpp"

namespace agmn {

/// Position in grid units: x is the column axis, y the row axis.
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct KeypointSet {
    std::vector<Point2> points;
    std::vector<bool> visible;  // empty when not provided
    std::optional<double> bbox_side;

    std::size_t size() const noexcept { return points.size(); }
};

/// The full, validated input to inference: clamped unary maps (one per node)
/// and clamped directed kernels (one per schedule channel).
struct PotentialSet {
    TensorStack unary;
    TensorStack kernels;
    TreeGraph graph;
    Schedule schedule;
};

/// Checks channel counts, odd kernel sides, nonnegativity and finiteness.
/// Throws Errc::shape_mismatch, Errc::invalid_kernel or Errc::invalid_potential.
void check_potentials(const PotentialSet& p);

PotentialSet make_potential_set(TensorStack unary, TensorStack kernels, TreeGraph graph);

TensorStack clamp_nonneg(const TensorStack& t);

/// exp(-((c - x)^2 + (r - y)^2) / (2 sigma^2)), peak amplitude 1.
Grid2D gaussian_map(int rows, int cols, Point2 center, double sigma);

TensorStack make_unary_targets(const KeypointSet& kp, int rows, int cols, double sigma = 1.0);

/// Channel channel_of(i -> j) holds a Gaussian at kernel center + (l_j - l_i).
/// Displacements that put the peak outside the kernel append a message to
/// `warnings` (when given); the clipped map is still produced.
TensorStack make_kernel_targets(const KeypointSet& kp, const Schedule& schedule, int ksize, double sigma = 1.0,
                                std::vector<std::string>* warnings = nullptr);

TensorStack normalize_targets(const TensorStack& t);

// Keypoints JSON: {"points": [[x, y], ...], "bbox_side": L, "visible": [...]}.
std::string keypoints_to_json(const KeypointSet& kp);
KeypointSet keypoints_from_json(const std::string& text);
KeypointSet read_keypoints(const std::filesystem::path& path);
void write_keypoints(const KeypointSet& kp, const std::filesystem::path& path);

}  // namespace agmn
