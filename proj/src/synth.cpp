#include "agmn/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "agmn/error.hpp"
#include "agmn/parallel.hpp"
#include "agmn/random.hpp"

namespace agmn::synth {

namespace {

// Fan of finger base directions around the hand axis, thumb first (radians).
constexpr double kFingerSpread[5] = {-1.10, -0.45, -0.15, 0.15, 0.45};
constexpr double kSpreadJitter = 0.10;

constexpr int kHandNodes = 21;

}  // namespace

void validate(const CorruptionConfig& cfg) {
    if (!(cfg.occluded_fraction >= 0.0 && cfg.occluded_fraction <= 1.0)) {
        throw Error(Errc::invalid_argument, "occluded_fraction must be in [0, 1]");
    }
    if (cfg.distractor_peaks < 0) throw Error(Errc::invalid_argument, "distractor_peaks must be >= 0");
    if (!(cfg.noise_amplitude >= 0.0) || !std::isfinite(cfg.noise_amplitude)) {
        throw Error(Errc::invalid_argument, "noise_amplitude must be >= 0");
    }
    if (!(cfg.peak_sigma > 0.0) || !std::isfinite(cfg.peak_sigma)) {
        throw Error(Errc::invalid_argument, "peak_sigma must be > 0");
    }
}

KeypointSet sample_pose_unclamped(std::uint64_t seed) {
    Rng rng(seed);
    const double lo = kGridSize / 3.0;
    const double hi = 2.0 * kGridSize / 3.0;
    KeypointSet kp;
    kp.points.resize(kHandNodes);
    kp.points[0] = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
    const double axis = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double max_bend = kMaxBendDegrees * std::numbers::pi / 180.0;
    for (int f = 0; f < 5; ++f) {
        double heading = axis + kFingerSpread[f] + rng.uniform(-kSpreadJitter, kSpreadJitter);
        Point2 pos = kp.points[0];
        for (int j = 0; j < 4; ++j) {
            if (j > 0) heading += rng.uniform(-max_bend, max_bend);
            const double len = rng.uniform(kMinBone, kMaxBone);
            pos = {pos.x + len * std::cos(heading), pos.y + len * std::sin(heading)};
            kp.points[1 + 4 * f + j] = pos;
        }
    }
    kp.bbox_side = kGridSize;
    return kp;
}

KeypointSet sample_pose(std::uint64_t seed) {
    KeypointSet kp = sample_pose_unclamped(seed);
    const double top = kGridSize - 1;
    for (auto& p : kp.points) {
        p.x = std::clamp(std::round(p.x), 0.0, top);
        p.y = std::clamp(std::round(p.y), 0.0, top);
    }
    return kp;
}

int occluded_count(double fraction, int n) {
    // The epsilon keeps exact products such as (1/21) * 21 from rounding up.
    return std::clamp(static_cast<int>(std::ceil(fraction * n - 1e-9)), 0, n);
}

std::vector<int> occluded_keypoints(const CorruptionConfig& cfg, int n) {
    Rng rng(mix_seed(cfg.seed, 0xC0FFEE));
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) idx[i] = i;
    const int m = occluded_count(cfg.occluded_fraction, n);
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(static_cast<std::size_t>(m));
    std::ranges::sort(idx);
    return idx;
}

TensorStack render_unary(const KeypointSet& gt, const CorruptionConfig& cfg, int rows, int cols) {
    validate(cfg);
    const int n = static_cast<int>(gt.size());
    std::vector<char> occluded(static_cast<std::size_t>(n), 0);
    for (int k : occluded_keypoints(cfg, n)) occluded[k] = 1;

    Rng rng(mix_seed(cfg.seed, 0xD15EA5E));
    TensorStack out(n, rows, cols);
    for (int k = 0; k < n; ++k) {
        Grid2D g(rows, cols);
        if (!occluded[k]) {
            g = gaussian_map(rows, cols, gt.points[k], cfg.peak_sigma);
        } else {
            for (int d = 0; d < cfg.distractor_peaks; ++d) {
                const double amp = rng.uniform(0.8, 1.0);
                const Point2 at{rng.uniform(0.0, cols), rng.uniform(0.0, rows)};
                const Grid2D peak = gaussian_map(rows, cols, at, cfg.peak_sigma);
                auto dst = g.values();
                auto src = peak.values();
                for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += amp * src[i];
            }
        }
        if (cfg.noise_amplitude > 0.0) {
            for (double& v : g.values()) v += rng.uniform(0.0, cfg.noise_amplitude);
        }
        out.set_channel(k, g);
    }
    return out;
}

TensorStack render_kernels(const KeypointSet& gt, const Schedule& schedule, int ksize, double sigma) {
    return make_kernel_targets(gt, schedule, ksize, sigma);
}

SyntheticSample make_sample(const CorruptionConfig& cfg, std::uint64_t index) {
    static const Schedule schedule = build_schedule(default_hand_tree());
    SyntheticSample s;
    s.seed = mix_seed(cfg.seed, index);
    s.gt = sample_pose(mix_seed(s.seed, 0));
    CorruptionConfig local = cfg;
    local.seed = mix_seed(s.seed, 1);
    s.unary = render_unary(s.gt, local);
    s.kernels = render_kernels(s.gt, schedule);
    s.norm_len = kGridSize;
    return s;
}

namespace {

nlohmann::json config_json(const CorruptionConfig& cfg) {
    return {{"occluded_fraction", cfg.occluded_fraction},
            {"distractor_peaks", cfg.distractor_peaks},
            {"noise_amplitude", cfg.noise_amplitude},
            {"peak_sigma", cfg.peak_sigma},
            {"seed", cfg.seed}};
}

std::string relative_to(const std::filesystem::path& p, const std::filesystem::path& base) {
    if (base.empty()) return p.generic_string();
    return p.lexically_relative(base).generic_string();
}

}  // namespace

std::string manifest_to_json(const Manifest& m) {
    nlohmann::json j;
    j["config"] = config_json(m.config);
    j["config"]["n"] = m.count;
    j["config"]["grid"] = kGridSize;
    j["config"]["kernel"] = kKernelSize;
    j["samples"] = nlohmann::json::array();
    for (const auto& e : m.samples) {
        nlohmann::json s = {{"unary", e.unary.generic_string()},
                            {"kernels", e.kernels.generic_string()},
                            {"keypoints", e.keypoints.generic_string()},
                            {"norm_len", e.norm_len},
                            {"seed", e.seed}};
        if (e.predictions) s["predictions"] = e.predictions->generic_string();
        j["samples"].push_back(std::move(s));
    }
    return j.dump(2);
}

Manifest manifest_from_json(const std::string& text, const std::filesystem::path& base_dir) {
    Manifest m;
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    try {
        const auto j = nlohmann::json::parse(text);
        if (j.contains("config")) {
            const auto& c = j["config"];
            m.config.occluded_fraction = c.value("occluded_fraction", 0.0);
            m.config.distractor_peaks = c.value("distractor_peaks", 0);
            m.config.noise_amplitude = c.value("noise_amplitude", 0.0);
            m.config.peak_sigma = c.value("peak_sigma", 1.0);
            m.config.seed = c.value("seed", std::uint64_t{0});
        }
        for (const auto& s : j.at("samples")) {
            ManifestEntry e;
            e.unary = resolve(s.value("unary", ""));
            e.kernels = resolve(s.value("kernels", ""));
            e.keypoints = resolve(s.at("keypoints").get<std::string>());
            if (s.contains("predictions")) e.predictions = resolve(s["predictions"].get<std::string>());
            e.norm_len = s.value("norm_len", static_cast<double>(kGridSize));
            e.seed = s.value("seed", std::uint64_t{0});
            m.samples.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, std::string("manifest JSON: ") + e.what());
    }
    m.count = static_cast<int>(m.samples.size());
    return m;
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return manifest_from_json(buf.str(), path.parent_path());
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    const auto base = path.parent_path();
    Manifest rel = m;
    for (auto& e : rel.samples) {
        e.unary = relative_to(e.unary, base);
        e.kernels = relative_to(e.kernels, base);
        e.keypoints = relative_to(e.keypoints, base);
        if (e.predictions) e.predictions = relative_to(*e.predictions, base);
    }
    std::ofstream out(path);
    if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
    out << manifest_to_json(rel) << '\n';
    if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

std::filesystem::path generate_dataset(int n, const CorruptionConfig& cfg, const std::filesystem::path& out_dir,
                                       DType dtype, int jobs) {
    if (n < 0) throw Error(Errc::invalid_argument, "sample count must be >= 0");
    validate(cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(Errc::io, "cannot create " + out_dir.string() + ": " + ec.message());

    Manifest m;
    m.config = cfg;
    m.count = n;
    m.samples.resize(static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) {
        const SyntheticSample s = make_sample(cfg, static_cast<std::uint64_t>(i));
        char stem[32];
        std::snprintf(stem, sizeof stem, "sample_%05d", i);
        ManifestEntry e;
        e.unary = out_dir / (std::string(stem) + "_unary.agt");
        e.kernels = out_dir / (std::string(stem) + "_kernels.agt");
        e.keypoints = out_dir / (std::string(stem) + "_keypoints.json");
        e.norm_len = s.norm_len;
        e.seed = s.seed;
        write_tensor(s.unary, e.unary, dtype);
        write_tensor(s.kernels, e.kernels, dtype);
        write_keypoints(s.gt, e.keypoints);
        m.samples[static_cast<std::size_t>(i)] = std::move(e);
    });
    const auto manifest_path = out_dir / "manifest.json";
    write_manifest(m, manifest_path);
    return manifest_path;
}

ExperimentResult run_experiment(int n, const CorruptionConfig& cfg, ConvPath conv, const std::vector<double>& sigmas,
                                int jobs) {
    if (n <= 0) throw Error(Errc::invalid_argument, "experiment needs at least one sample");
    validate(cfg);
    const TreeGraph graph = default_hand_tree();
    std::vector<KeypointSet> gts(static_cast<std::size_t>(n));
    std::vector<KeypointSet> bp_preds(static_cast<std::size_t>(n));
    std::vector<KeypointSet> unary_preds(static_cast<std::size_t>(n));
    std::vector<double> norms(static_cast<std::size_t>(n));
    parallel_for(n, jobs, [&](int i) {
        const SyntheticSample s = make_sample(cfg, static_cast<std::uint64_t>(i));
        InferOptions options;
        options.conv = conv;
        bp_preds[i] = cells_to_keypoints(infer(s.unary, s.kernels, graph, options).predictions);
        unary_preds[i] = cells_to_keypoints(infer_unary_only(s.unary).predictions);
        gts[i] = s.gt;
        norms[i] = s.norm_len;
    });
    return {pck(bp_preds, gts, norms, sigmas), pck(unary_preds, gts, norms, sigmas)};
}

}  // namespace agmn::synth
