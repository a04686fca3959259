#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agmn/error.hpp"
#include "agmn/synth.hpp"
#include "test_support.hpp"

using namespace agmn;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("sample_pose") {
    const KeypointSet a = synth::sample_pose(0);
    const KeypointSet b = synth::sample_pose(0);
    CHECK(a.points.size() == 21);
    for (int k = 0; k < 21; ++k) {
        CHECK(a.points[k].x == b.points[k].x);
        CHECK(a.points[k].y == b.points[k].y);
    }
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const KeypointSet p = synth::sample_pose(seed);
        for (const auto& pt : p.points) {
            CHECK((pt.x >= 0 && pt.x < 46 && pt.y >= 0 && pt.y < 46));
            CHECK(pt.x == std::round(pt.x));
        }
        const KeypointSet raw = synth::sample_pose_unclamped(seed);
        CHECK((raw.points[0].x >= 46.0 / 3 && raw.points[0].x < 92.0 / 3));
        const TreeGraph g = default_hand_tree();
        for (auto [u, v] : g.edges) {
            const double len = std::hypot(raw.points[v].x - raw.points[u].x, raw.points[v].y - raw.points[u].y);
            CHECK((len >= 4.0 && len <= 8.0));
        }
    }
}

TEST_CASE("occlusion subset") {
    CHECK(synth::occluded_count(0.2, 21) == 5);
    CHECK(synth::occluded_count(0.0, 21) == 0);
    CHECK(synth::occluded_count(1.0, 21) == 21);
    CHECK(synth::occluded_count(1.0 / 21, 21) == 1);
    synth::CorruptionConfig cfg;
    cfg.occluded_fraction = 0.2;
    cfg.seed = 9;
    const auto idx = synth::occluded_keypoints(cfg, 21);
    CHECK(idx.size() == 5);
    CHECK(std::ranges::is_sorted(idx));
    CHECK(std::ranges::adjacent_find(idx) == idx.end());
    CHECK(idx == synth::occluded_keypoints(cfg, 21));
}

TEST_CASE("render_unary") {
    const KeypointSet gt = synth::sample_pose(3);
    synth::CorruptionConfig clean;
    const TensorStack u = synth::render_unary(gt, clean);
    CHECK(u.channels() == 21);
    CHECK(u.rows() == 46);
    for (int k = 0; k < 21; ++k) {
        const GridIndex m = argmax_cell(u.channel(k));
        CHECK(m == GridIndex{static_cast<int>(gt.points[k].y), static_cast<int>(gt.points[k].x)});
    }

    synth::CorruptionConfig all;
    all.occluded_fraction = 1.0;
    for (double v : synth::render_unary(gt, all).values()) CHECK(v < 1e-6);

    synth::CorruptionConfig partial;
    partial.occluded_fraction = 0.2;
    partial.distractor_peaks = 2;
    partial.noise_amplitude = 0.05;
    partial.seed = 4;
    const TensorStack c = synth::render_unary(gt, partial);
    const auto occluded = synth::occluded_keypoints(partial, 21);
    int corrupted = 0;
    for (int k = 0; k < 21; ++k) {
        // An intact channel keeps a peak of at least 1 at the true cell.
        const bool intact = c.at(k, static_cast<int>(gt.points[k].y), static_cast<int>(gt.points[k].x)) >= 1.0;
        const bool listed = std::ranges::find(occluded, k) != occluded.end();
        if (!intact) ++corrupted;
        if (!listed) CHECK(intact);
        for (double v : c.plane(k)) CHECK((v >= 0.0 && v <= 2.0 + 0.05));
    }
    CHECK(corrupted <= 5);
    CHECK(c == synth::render_unary(gt, partial));

    synth::CorruptionConfig bad;
    bad.occluded_fraction = 1.5;
    CHECK_THROWS_AS((void)synth::render_unary(gt, bad), Error);
    bad = {};
    bad.noise_amplitude = -1;
    CHECK_THROWS_AS((void)synth::render_unary(gt, bad), Error);
}

TEST_CASE("render_kernels") {
    const KeypointSet gt = synth::sample_pose(11);
    const Schedule s = build_schedule(default_hand_tree());
    const TensorStack k = synth::render_kernels(gt, s);
    CHECK(k.channels() == 40);
    CHECK(k.rows() == 45);
    CHECK(k.cols() == 45);
    CHECK(k == make_kernel_targets(gt, s, 45, 1.0));

    KeypointSet same = gt;
    same.points[1] = same.points[0];
    const TensorStack z = synth::render_kernels(same, s);
    CHECK(argmax_cell(z.channel(s.channel_of(0, 1))) == GridIndex{22, 22});
}

TEST_CASE("make_sample") {
    synth::CorruptionConfig cfg;
    cfg.seed = 42;
    const auto a = synth::make_sample(cfg, 5);
    const auto b = synth::make_sample(cfg, 5);
    CHECK(a.seed == mix_seed(42, 5));
    CHECK(a.unary == b.unary);
    CHECK(a.kernels == b.kernels);
    CHECK(a.norm_len == 46.0);
    CHECK_FALSE(synth::make_sample(cfg, 6).unary == a.unary);
}

TEST_CASE("generate_dataset") {
    test::TempDir dir("synth");
    synth::CorruptionConfig cfg;
    cfg.seed = 7;
    cfg.occluded_fraction = 0.2;
    cfg.distractor_peaks = 2;
    cfg.noise_amplitude = 0.05;
    const auto manifest = synth::generate_dataset(3, cfg, dir / "a");
    CHECK(manifest == dir / "a" / "manifest.json");
    int agt = 0;
    int json = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
        if (e.path().extension() == ".agt") ++agt;
        if (e.path().extension() == ".json") ++json;
    }
    CHECK(agt == 6);
    CHECK(json == 4);

    const synth::Manifest m = synth::read_manifest(manifest);
    CHECK(m.count == 3);
    CHECK(m.samples[2].seed == mix_seed(7, 2));
    CHECK(m.config.distractor_peaks == 2);
    const auto sample = synth::make_sample(cfg, 2);
    const TensorStack stored = read_tensor(m.samples[2].unary);
    CHECK(test::max_abs_diff(stored.values(), sample.unary.values()) <= 1e-6);
    CHECK(read_keypoints(m.samples[2].keypoints).points[4].x == sample.gt.points[4].x);

    // Same config, second directory, and a parallel run: identical bytes.
    synth::generate_dataset(3, cfg, dir / "b");
    synth::generate_dataset(3, cfg, dir / "c", DType::f32, 3);
    for (const char* name : {"manifest.json", "sample_00001_unary.agt", "sample_00002_kernels.agt",
                             "sample_00000_keypoints.json"}) {
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "c" / name));
    }

    const auto empty = synth::generate_dataset(0, cfg, dir / "empty");
    CHECK(synth::read_manifest(empty).samples.empty());
    CHECK_THROWS_AS((void)synth::generate_dataset(-1, cfg, dir / "neg"), Error);
}

TEST_CASE("manifest JSON") {
    CHECK_THROWS_AS((void)synth::manifest_from_json("{", "."), Error);
    CHECK_THROWS_AS((void)synth::manifest_from_json("{\"samples\": [{}]}", "."), Error);
    const auto m = synth::manifest_from_json(
        R"({"samples": [{"unary": "u.agt", "kernels": "/abs/k.agt", "keypoints": "k.json"}]})", "/data");
    CHECK(m.samples[0].unary == std::filesystem::path("/data/u.agt"));
    CHECK(m.samples[0].kernels == std::filesystem::path("/abs/k.agt"));
    CHECK(m.samples[0].norm_len == 46.0);
}

TEST_CASE("experiment on clean data is perfect") {
    const auto r = synth::run_experiment(5, {}, ConvPath::fft, {0.01});
    CHECK(r.bp.values == std::vector<double>{1.0});
    CHECK(r.unary_only.values == std::vector<double>{1.0});
}
