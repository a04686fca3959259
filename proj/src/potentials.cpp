#include "agmn/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agmn/error.hpp"

namespace agmn {

void check_potentials(const PotentialSet& p) {
    const int n = p.graph.num_nodes;
    const int directed = static_cast<int>(2 * p.graph.edges.size());
    if (p.unary.channels() != n) {
        throw Error(Errc::shape_mismatch, "unary stack has " + std::to_string(p.unary.channels()) +
                                              " channels, expected " + std::to_string(n));
    }
    if (p.kernels.channels() != directed) {
        throw Error(Errc::shape_mismatch, "kernel stack has " + std::to_string(p.kernels.channels()) +
                                              " channels, expected " + std::to_string(directed));
    }
    if (p.kernels.rows() % 2 == 0 || p.kernels.cols() % 2 == 0) {
        throw Error(Errc::invalid_kernel, "kernel planes must have odd sides, got " +
                                              std::to_string(p.kernels.rows()) + "x" +
                                              std::to_string(p.kernels.cols()));
    }
    auto nonneg = [](std::span<const double> v) {
        return std::ranges::all_of(v, [](double x) { return std::isfinite(x) && x >= 0.0; });
    };
    if (!nonneg(p.unary.values())) throw Error(Errc::invalid_potential, "unary potentials must be finite and >= 0");
    if (!nonneg(p.kernels.values())) throw Error(Errc::invalid_potential, "kernel potentials must be finite and >= 0");
    if (p.schedule.size() != static_cast<std::size_t>(directed)) {
        throw Error(Errc::schedule_violation, "schedule has " + std::to_string(p.schedule.size()) +
                                                  " messages, expected " + std::to_string(directed));
    }
}

PotentialSet make_potential_set(TensorStack unary, TensorStack kernels, TreeGraph graph) {
    Schedule schedule = build_schedule(graph);
    PotentialSet p{std::move(unary), std::move(kernels), std::move(graph), std::move(schedule)};
    check_potentials(p);
    return p;
}

TensorStack clamp_nonneg(const TensorStack& t) {
    TensorStack out = t;
    for (double& v : out.values()) v = std::max(0.0, v);
    return out;
}

Grid2D gaussian_map(int rows, int cols, Point2 center, double sigma) {
    if (!(sigma > 0.0)) throw Error(Errc::invalid_argument, "sigma must be positive, got " + std::to_string(sigma));
    Grid2D g(rows, cols);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (int r = 0; r < rows; ++r) {
        const double dy = r - center.y;
        for (int c = 0; c < cols; ++c) {
            const double dx = c - center.x;
            g(r, c) = std::exp(-(dx * dx + dy * dy) * inv);
        }
    }
    return g;
}

TensorStack make_unary_targets(const KeypointSet& kp, int rows, int cols, double sigma) {
    if (kp.points.empty()) throw Error(Errc::invalid_argument, "no keypoints");
    TensorStack out(static_cast<int>(kp.size()), rows, cols);
    for (std::size_t k = 0; k < kp.size(); ++k) {
        out.set_channel(static_cast<int>(k), gaussian_map(rows, cols, kp.points[k], sigma));
    }
    return out;
}

TensorStack make_kernel_targets(const KeypointSet& kp, const Schedule& schedule, int ksize, double sigma,
                                std::vector<std::string>* warnings) {
    if (ksize <= 0 || ksize % 2 == 0) {
        throw Error(Errc::invalid_kernel, "kernel size must be odd and positive, got " + std::to_string(ksize));
    }
    if (kp.size() != static_cast<std::size_t>(schedule.num_nodes())) {
        throw Error(Errc::shape_mismatch, std::to_string(kp.size()) + " keypoints for a " +
                                              std::to_string(schedule.num_nodes()) + "-node graph");
    }
    const double center = (ksize - 1) / 2.0;
    TensorStack out(static_cast<int>(schedule.size()), ksize, ksize);
    for (const auto& [from, to] : schedule.order()) {
        const double dx = kp.points[to].x - kp.points[from].x;
        const double dy = kp.points[to].y - kp.points[from].y;
        if (warnings != nullptr && (std::abs(dx) > center || std::abs(dy) > center)) {
            warnings->push_back("displacement " + std::to_string(from) + "->" + std::to_string(to) + " (" +
                                std::to_string(dx) + ", " + std::to_string(dy) + ") exceeds kernel half-width " +
                                std::to_string(static_cast<int>(center)) + "; peak clipped");
        }
        out.set_channel(schedule.channel_of(from, to),
                        gaussian_map(ksize, ksize, {center + dx, center + dy}, sigma));
    }
    return out;
}

TensorStack normalize_targets(const TensorStack& t) {
    TensorStack out(t.channels(), t.rows(), t.cols());
    for (int c = 0; c < t.channels(); ++c) out.set_channel(c, normalize_sum(t.channel(c)));
    return out;
}

std::string keypoints_to_json(const KeypointSet& kp) {
    nlohmann::json j;
    j["points"] = nlohmann::json::array();
    for (const auto& p : kp.points) j["points"].push_back({p.x, p.y});
    if (kp.bbox_side) j["bbox_side"] = *kp.bbox_side;
    if (!kp.visible.empty()) j["visible"] = kp.visible;
    return j.dump(2);
}

KeypointSet keypoints_from_json(const std::string& text) {
    KeypointSet kp;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& p : j.at("points")) {
            kp.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        }
        if (j.contains("bbox_side")) kp.bbox_side = j["bbox_side"].get<double>();
        if (j.contains("visible")) kp.visible = j["visible"].get<std::vector<bool>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, std::string("keypoints JSON: ") + e.what());
    }
    if (kp.points.empty()) throw Error(Errc::format, "keypoints JSON: \"points\" is empty");
    if (!kp.visible.empty() && kp.visible.size() != kp.points.size()) {
        throw Error(Errc::format, "keypoints JSON: \"visible\" length differs from \"points\"");
    }
    for (const auto& p : kp.points) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw Error(Errc::format, "keypoints JSON: non-finite point");
    }
    if (kp.bbox_side && !(*kp.bbox_side > 0.0)) throw Error(Errc::format, "keypoints JSON: bbox_side must be > 0");
    return kp;
}

KeypointSet read_keypoints(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return keypoints_from_json(buf.str());
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

void write_keypoints(const KeypointSet& kp, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
    out << keypoints_to_json(kp) << '\n';
}

}  // namespace agmn
