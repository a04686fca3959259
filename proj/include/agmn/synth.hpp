#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agmn/bp.hpp"
#include "agmn/grid.hpp"
#include "agmn/hand_graph.hpp"
#include "agmn/metrics.hpp"
#include "agmn/potentials.hpp"
#include "agmn/tensor_io.hpp"

namespace agmn::synth {

inline constexpr int kGridSize = 46;
inline constexpr int kKernelSize = 45;
inline constexpr double kKernelSigma = 1.0;
inline constexpr double kMinBone = 4.0;
inline constexpr double kMaxBone = 8.0;
inline constexpr double kMaxBendDegrees = 35.0;

struct CorruptionConfig {
    double occluded_fraction = 0.0;
    int distractor_peaks = 0;
    double noise_amplitude = 0.0;
    double peak_sigma = 1.0;
    std::uint64_t seed = 0;
};

/// Throws Errc::invalid_argument for out-of-range fields.
void validate(const CorruptionConfig& cfg);

struct SyntheticSample {
    KeypointSet gt;
    TensorStack unary;    // 21 x 46 x 46
    TensorStack kernels;  // 40 x 45 x 45
    double norm_len = kGridSize;
    std::uint64_t seed = 0;
};

/// Forward kinematics before rounding and clamping; exposed for the bone-length contract.
KeypointSet sample_pose_unclamped(std::uint64_t seed);

/// Wrist in the central third of the box, four bones of 4-8 cells per finger
/// with successive bends up to 35 degrees, then rounded to grid cells and
/// clamped into [0, 46).
KeypointSet sample_pose(std::uint64_t seed);

/// Number of corrupted keypoints for a fraction, ceil(fraction * n).
int occluded_count(double fraction, int n);

/// Gaussian peak per keypoint plus uniform noise. A seeded subset of
/// occluded_count() keypoints loses its true peak and gains `distractor_peaks`
/// random peaks with amplitude in [0.8, 1.0].
TensorStack render_unary(const KeypointSet& gt, const CorruptionConfig& cfg, int rows = kGridSize,
                         int cols = kGridSize);

/// Indices corrupted by render_unary for this config, ascending.
std::vector<int> occluded_keypoints(const CorruptionConfig& cfg, int n);

TensorStack render_kernels(const KeypointSet& gt, const Schedule& schedule, int ksize = kKernelSize,
                           double sigma = kKernelSigma);

/// Sample `index` of the dataset described by cfg; its seed is mix_seed(cfg.seed, index).
SyntheticSample make_sample(const CorruptionConfig& cfg, std::uint64_t index);

struct ManifestEntry {
    std::filesystem::path unary;
    std::filesystem::path kernels;
    std::filesystem::path keypoints;
    std::optional<std::filesystem::path> predictions;
    double norm_len = kGridSize;
    std::uint64_t seed = 0;
};

struct Manifest {
    CorruptionConfig config;
    int count = 0;
    std::vector<ManifestEntry> samples;
};

/// Paths are stored relative to the manifest's directory.
std::string manifest_to_json(const Manifest& m);
/// Relative paths are resolved against `base_dir`.
Manifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir);
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& m, const std::filesystem::path& path);

/// Writes n samples (unary + kernels AGT1, keypoints JSON) and manifest.json
/// into out_dir. Output is a pure function of (n, cfg, dtype).
std::filesystem::path generate_dataset(int n, const CorruptionConfig& cfg, const std::filesystem::path& out_dir,
                                       DType dtype = DType::f32, int jobs = 1);

struct ExperimentResult {
    PckCurve bp;
    PckCurve unary_only;
};

/// In-memory run of the given-ground-truth-kernel protocol: n samples from cfg,
/// BP with oracle kernels versus plain unary argmax.
ExperimentResult run_experiment(int n, const CorruptionConfig& cfg, ConvPath conv = ConvPath::fft,
                                const std::vector<double>& sigmas = default_pck_sigmas(), int jobs = 1);

}  // namespace agmn::synth
