#include "agmn/bp.hpp"

#include <cmath>
#include <string>

#include "agmn/error.hpp"

namespace agmn {

MessageStore::MessageStore(const Schedule& schedule) : schedule_(&schedule), messages_(schedule.size()) {}

const Grid2D* MessageStore::find(int from, int to) const noexcept {
    const int c = schedule_->channel_of(from, to);
    if (c < 0 || !messages_[c]) return nullptr;
    return &*messages_[c];
}

void MessageStore::set(int from, int to, Grid2D message) {
    const int c = schedule_->channel_of(from, to);
    if (c < 0) {
        throw Error(Errc::schedule_violation, std::to_string(from) + "->" + std::to_string(to) + " is not an edge");
    }
    if (!messages_[c]) ++computed_;
    messages_[c] = std::move(message);
}

Grid2D pre_message(const PotentialSet& p, int node, std::optional<int> exclude, const MessageStore& store) {
    std::vector<Grid2D> factors{p.unary.channel(node)};
    for (const auto& [a, b] : p.graph.edges) {
        const int k = a == node ? b : (b == node ? a : -1);
        if (k < 0 || (exclude && k == *exclude)) continue;
        const Grid2D* m = store.find(k, node);
        if (m == nullptr) {
            throw Error(Errc::schedule_violation, "message " + std::to_string(k) + "->" + std::to_string(node) +
                                                      " needed but not yet computed");
        }
        factors.push_back(*m);
    }
    return hadamard(factors);
}

Grid2D message_update(const Grid2D& h, const Grid2D& kernel, ConvPath path) {
    return normalize_sum(path == ConvPath::fft ? conv2d_same_fft(h, kernel) : conv2d_same(h, kernel));
}

BeliefResult run_bp(const PotentialSet& p, ConvPath path) {
    check_potentials(p);
    check_schedule(p.graph, p.schedule);

    MessageStore store(p.schedule);
    int updates = 0;
    for (const auto& [from, to] : p.schedule.order()) {
        const Grid2D h = pre_message(p, from, to, store);
        store.set(from, to, message_update(h, p.kernels.channel(p.schedule.channel_of(from, to)), path));
        ++updates;
    }

    const int n = p.graph.num_nodes;
    BeliefResult result;
    result.marginals = TensorStack(n, p.unary.rows(), p.unary.cols());
    result.messages_computed = updates;
    for (int i = 0; i < n; ++i) {
        Grid2D belief = normalize_sum(pre_message(p, i, std::nullopt, store));
        const GridIndex best = argmax_cell(belief);
        result.predictions.push_back(best);
        result.max_marginal.push_back(belief(best.row, best.col));
        result.marginals.set_channel(i, belief);
    }
    return result;
}

TensorStack expand_shared_kernels(const TensorStack& shared, const TreeGraph& g, const Schedule& schedule) {
    if (shared.channels() != static_cast<int>(g.edges.size())) {
        throw Error(Errc::shape_mismatch, "shared kernel stack has " + std::to_string(shared.channels()) +
                                              " channels, expected " + std::to_string(g.edges.size()));
    }
    TensorStack out(2 * shared.channels(), shared.rows(), shared.cols());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        const auto [a, b] = g.edges[e];
        const Grid2D k = shared.channel(static_cast<int>(e));
        out.set_channel(schedule.channel_of(a, b), k);
        out.set_channel(schedule.channel_of(b, a), reflect180(k));
    }
    return out;
}

namespace {

void require_finite(const TensorStack& t, const char* what) {
    if (!all_finite(t.values())) throw Error(Errc::invalid_potential, std::string(what) + " contains NaN or Inf");
}

}  // namespace

BeliefResult infer(const TensorStack& raw_unary, const TensorStack& raw_kernels, const TreeGraph& g,
                   const InferOptions& options) {
    validate(g);
    require_finite(raw_unary, "unary input");
    require_finite(raw_kernels, "kernel input");
    if (raw_unary.channels() != g.num_nodes) {
        throw Error(Errc::shape_mismatch, "unary input has " + std::to_string(raw_unary.channels()) +
                                              " channels, expected " + std::to_string(g.num_nodes));
    }
    const int expected = static_cast<int>(options.shared_kernels ? g.edges.size() : 2 * g.edges.size());
    if (raw_kernels.channels() != expected) {
        throw Error(Errc::shape_mismatch, "kernel input has " + std::to_string(raw_kernels.channels()) +
                                              " channels, expected " + std::to_string(expected) +
                                              (options.shared_kernels ? " (shared mode)" : " (directed mode)"));
    }

    Schedule schedule = build_schedule(g);
    TensorStack kernels = clamp_nonneg(raw_kernels);
    if (options.shared_kernels) kernels = expand_shared_kernels(kernels, g, schedule);
    PotentialSet p{clamp_nonneg(raw_unary), std::move(kernels), g, std::move(schedule)};
    return run_bp(p, options.conv);
}

BeliefResult infer_unary_only(const TensorStack& raw_unary) {
    require_finite(raw_unary, "unary input");
    const TensorStack clamped = clamp_nonneg(raw_unary);
    BeliefResult result;
    result.marginals = TensorStack(clamped.channels(), clamped.rows(), clamped.cols());
    for (int i = 0; i < clamped.channels(); ++i) {
        Grid2D belief = normalize_sum(clamped.channel(i));
        const GridIndex best = argmax_cell(belief);
        result.predictions.push_back(best);
        result.max_marginal.push_back(belief(best.row, best.col));
        result.marginals.set_channel(i, belief);
    }
    return result;
}

}  // namespace agmn
