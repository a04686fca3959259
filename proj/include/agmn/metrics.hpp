#pragma once

#include <span>
#include <string>
#include <vector>

#include "agmn/grid.hpp"
#include "agmn/potentials.hpp"

namespace agmn {

struct PckCurve {
    std::vector<double> sigmas;
    std::vector<double> values;                     // pooled over samples and keypoints
    std::vector<std::vector<double>> per_keypoint;  // [keypoint][sigma]
};

/// 0.01, 0.02, ..., 0.10.
std::vector<double> default_pck_sigmas();

/// A keypoint is correct at sigma when |pred - gt| / norm_len <= sigma.
PckCurve pck(std::span<const KeypointSet> preds, std::span<const KeypointSet> gts,
             std::span<const double> norm_lens, std::span<const double> sigmas);

/// Grid cells as points: x = col, y = row.
KeypointSet cells_to_keypoints(std::span<const GridIndex> cells);

std::string pck_report_json(const PckCurve& curve);
/// One header row of thresholds, then one row per labelled curve.
std::string pck_report_csv(std::span<const std::string> labels, std::span<const PckCurve> curves);

struct LossWeights {
    double alpha1 = 1.0;
    double alpha2 = 0.1;
    double alpha3 = 0.1;
    double scale = 1.0;
};

/// Squared Frobenius distance sum (a - b)^2.
double frobenius_sq(const Grid2D& a, const Grid2D& b);

/// Sum over stages and channels of frobenius_sq against the targets, times `scale`.
double unary_loss(std::span<const TensorStack> stages, const TensorStack& targets, double scale = 1.0);
double pairwise_loss(std::span<const TensorStack> stages, const TensorStack& targets, double scale = 1.0);

/// Both inputs must be per-channel normalized (|sum - 1| <= 1e-6), else Errc::contract.
double final_loss(const TensorStack& marginals, const TensorStack& normalized_targets, double scale = 1.0);

double total_loss(double unary, double pairwise, double final, const LossWeights& w = {});

}  // namespace agmn
