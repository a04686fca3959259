#pragma once

#include <optional>
#include <vector>

#include "agmn/grid.hpp"
#include "agmn/hand_graph.hpp"
#include "agmn/potentials.hpp"

namespace agmn {

enum class ConvPath { direct, fft };

/// Messages indexed by kernel channel, i.e. by directed edge.
class MessageStore {
public:
    explicit MessageStore(const Schedule& schedule);

    const Grid2D* find(int from, int to) const noexcept;
    void set(int from, int to, Grid2D message);
    std::size_t computed() const noexcept { return computed_; }
    bool complete() const noexcept { return computed_ == messages_.size(); }

private:
    const Schedule* schedule_;
    std::vector<std::optional<Grid2D>> messages_;
    std::size_t computed_ = 0;
};

struct BeliefResult {
    TensorStack marginals;                // one normalized channel per node
    std::vector<GridIndex> predictions;   // argmax_cell of each marginal
    std::vector<double> max_marginal;
    int messages_computed = 0;
};

/// phi_i times every incoming message except the one from `exclude`; with no
/// exclusion this is the unnormalized belief. Throws Errc::schedule_violation
/// when a required message has not been computed.
Grid2D pre_message(const PotentialSet& p, int node, std::optional<int> exclude, const MessageStore& store);

/// conv2d_same(h, kernel) normalized to unit sum. With the kernel indexed by
/// d = x_to - x_from this is sum_{x_from} kernel[d] h[x_from] up to a constant.
Grid2D message_update(const Grid2D& h, const Grid2D& kernel, ConvPath path = ConvPath::direct);

/// Sum-product over the whole schedule; exact on trees.
BeliefResult run_bp(const PotentialSet& p, ConvPath path = ConvPath::direct);

struct InferOptions {
    /// Kernel stack holds one channel per undirected edge (graph edge order,
    /// oriented low -> high index); reverse directions use reflect180.
    bool shared_kernels = false;
    ConvPath conv = ConvPath::direct;
};

/// Expands |E| shared kernels into the 2|E| directed channel layout of `schedule`.
TensorStack expand_shared_kernels(const TensorStack& shared, const TreeGraph& g, const Schedule& schedule);

/// Raw branch outputs in, beliefs out: clamp, assemble, run_bp.
BeliefResult infer(const TensorStack& raw_unary, const TensorStack& raw_kernels, const TreeGraph& g,
                   const InferOptions& options = {});

/// Baseline without the graphical model: clamped, normalized unary maps and their argmax.
BeliefResult infer_unary_only(const TensorStack& raw_unary);

}  // namespace agmn
