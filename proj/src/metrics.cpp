#include "agmn/metrics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "agmn/error.hpp"

namespace agmn {

std::vector<double> default_pck_sigmas() {
    std::vector<double> s;
    for (int i = 1; i <= 10; ++i) s.push_back(i / 100.0);
    return s;
}

PckCurve pck(std::span<const KeypointSet> preds, std::span<const KeypointSet> gts,
             std::span<const double> norm_lens, std::span<const double> sigmas) {
    if (preds.size() != gts.size() || preds.size() != norm_lens.size()) {
        throw Error(Errc::shape_mismatch, std::to_string(preds.size()) + " predictions, " +
                                              std::to_string(gts.size()) + " ground truths, " +
                                              std::to_string(norm_lens.size()) + " normalization lengths");
    }
    for (std::size_t s = 1; s < sigmas.size(); ++s) {
        if (!(sigmas[s] > sigmas[s - 1])) throw Error(Errc::invalid_argument, "sigmas must be ascending");
    }
    const std::size_t nk = gts.empty() ? 0 : gts[0].size();
    std::vector<std::vector<long>> correct(nk, std::vector<long>(sigmas.size(), 0));
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i].size() != nk || gts[i].size() != nk) {
            throw Error(Errc::shape_mismatch, "sample " + std::to_string(i) + " has " +
                                                  std::to_string(preds[i].size()) + " predicted and " +
                                                  std::to_string(gts[i].size()) + " true keypoints, expected " +
                                                  std::to_string(nk));
        }
        if (!(norm_lens[i] > 0.0)) throw Error(Errc::invalid_argument, "norm_len must be positive");
        for (std::size_t k = 0; k < nk; ++k) {
            const double dist = std::hypot(preds[i].points[k].x - gts[i].points[k].x,
                                           preds[i].points[k].y - gts[i].points[k].y) /
                                norm_lens[i];
            for (std::size_t s = 0; s < sigmas.size(); ++s) {
                if (dist <= sigmas[s]) ++correct[k][s];
            }
        }
    }

    PckCurve curve;
    curve.sigmas.assign(sigmas.begin(), sigmas.end());
    curve.values.assign(sigmas.size(), 0.0);
    curve.per_keypoint.assign(nk, std::vector<double>(sigmas.size(), 0.0));
    const double samples = static_cast<double>(preds.size());
    for (std::size_t s = 0; s < sigmas.size(); ++s) {
        long pooled = 0;
        for (std::size_t k = 0; k < nk; ++k) {
            pooled += correct[k][s];
            curve.per_keypoint[k][s] = samples > 0 ? correct[k][s] / samples : 0.0;
        }
        const double total = samples * static_cast<double>(nk);
        curve.values[s] = total > 0 ? pooled / total : 0.0;
    }
    return curve;
}

KeypointSet cells_to_keypoints(std::span<const GridIndex> cells) {
    KeypointSet kp;
    for (const auto& c : cells) kp.points.push_back({static_cast<double>(c.col), static_cast<double>(c.row)});
    return kp;
}

std::string pck_report_json(const PckCurve& curve) {
    nlohmann::json j;
    j["sigmas"] = curve.sigmas;
    j["pck"] = curve.values;
    j["per_keypoint"] = curve.per_keypoint;
    return j.dump(2);
}

std::string pck_report_csv(std::span<const std::string> labels, std::span<const PckCurve> curves) {
    if (labels.size() != curves.size()) throw Error(Errc::invalid_argument, "one label per curve");
    std::ostringstream out;
    out.precision(6);
    out << "sigma";
    if (!curves.empty()) {
        for (double s : curves[0].sigmas) out << ',' << s;
    }
    out << '\n';
    for (std::size_t i = 0; i < curves.size(); ++i) {
        out << labels[i];
        for (double v : curves[i].values) out << ',' << 100.0 * v;
        out << '\n';
    }
    return out.str();
}

double frobenius_sq(const Grid2D& a, const Grid2D& b) {
    if (!a.same_shape(b)) throw Error(Errc::shape_mismatch, "frobenius_sq operands differ in shape");
    double s = 0.0;
    auto va = a.values();
    auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = va[i] - vb[i];
        s += d * d;
    }
    return s;
}

namespace {

void require_same_shape(const TensorStack& a, const TensorStack& b, const char* what) {
    if (a.channels() != b.channels() || a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(Errc::shape_mismatch, std::string(what) + ": " + std::to_string(a.channels()) + "x" +
                                              std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " vs " +
                                              std::to_string(b.channels()) + "x" + std::to_string(b.rows()) + "x" +
                                              std::to_string(b.cols()));
    }
}

double stack_distance(const TensorStack& a, const TensorStack& b) {
    double s = 0.0;
    for (int c = 0; c < a.channels(); ++c) s += frobenius_sq(a.channel(c), b.channel(c));
    return s;
}

double staged_loss(std::span<const TensorStack> stages, const TensorStack& targets, double scale, const char* what) {
    double total = 0.0;
    for (const auto& stage : stages) {
        require_same_shape(stage, targets, what);
        total += stack_distance(stage, targets);
    }
    return scale * total;
}

void require_normalized(const TensorStack& t, const char* what) {
    for (int c = 0; c < t.channels(); ++c) {
        double s = 0.0;
        for (double v : t.plane(c)) s += v;
        if (std::abs(s - 1.0) > 1e-6) {
            throw Error(Errc::contract, std::string(what) + " channel " + std::to_string(c) + " sums to " +
                                            std::to_string(s) + ", expected 1");
        }
    }
}

}  // namespace

double unary_loss(std::span<const TensorStack> stages, const TensorStack& targets, double scale) {
    return staged_loss(stages, targets, scale, "unary_loss");
}

double pairwise_loss(std::span<const TensorStack> stages, const TensorStack& targets, double scale) {
    return staged_loss(stages, targets, scale, "pairwise_loss");
}

double final_loss(const TensorStack& marginals, const TensorStack& normalized_targets, double scale) {
    require_same_shape(marginals, normalized_targets, "final_loss");
    require_normalized(marginals, "marginals");
    require_normalized(normalized_targets, "targets");
    return scale * stack_distance(marginals, normalized_targets);
}

double total_loss(double unary, double pairwise, double final, const LossWeights& w) {
    // Auxiliary terms first: with the default weights (1, 0.1, 0.1) this rounds to exactly 1.2 for unit inputs.
    return w.alpha1 * unary + (w.alpha2 * pairwise + w.alpha3 * final);
}

}  // namespace agmn
