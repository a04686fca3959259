#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace agmn {

struct TreeGraph {
    int num_nodes = 0;
    std::vector<std::pair<int, int>> edges;  // undirected, stored with first < second
    int root = 0;
    std::vector<std::string> names;          // optional, empty or num_nodes long
};

struct DirectedEdge {
    int from = 0;
    int to = 0;

    friend bool operator==(const DirectedEdge&, const DirectedEdge&) = default;
};

enum class TreeCheck { ok, bad_node_count, bad_root, node_out_of_range, self_loop, cycle, disconnected };

const char* to_string(TreeCheck check) noexcept;

/// First violated tree invariant, or TreeCheck::ok.
TreeCheck check_tree(const TreeGraph& g);

/// Throws Errc::not_a_tree naming the violation.
void validate(const TreeGraph& g);

/// Sorted adjacency lists.
std::vector<std::vector<int>> neighbors(const TreeGraph& g);

/// 21 keypoints rooted at the wrist (node 0), five four-joint chains
/// 0-(1+4f)-(2+4f)-(3+4f)-(4+4f) for fingers f = thumb, index, middle, ring, little.
TreeGraph default_hand_tree();

/// Execution order of the 2|E| directed messages plus the fixed mapping from a
/// directed edge to its channel in the kernel stack.
class Schedule {
public:
    Schedule() = default;
    Schedule(int num_nodes, std::vector<DirectedEdge> order, std::vector<int> channel_table);

    const std::vector<DirectedEdge>& order() const noexcept { return order_; }
    std::size_t size() const noexcept { return order_.size(); }
    int num_nodes() const noexcept { return num_nodes_; }

    /// Channel of (from -> to), or -1 if that is not an edge.
    int channel_of(int from, int to) const noexcept;

    /// Same channel assignment, different execution order.
    Schedule with_order(std::vector<DirectedEdge> order) const;

private:
    int num_nodes_ = 0;
    std::vector<DirectedEdge> order_;
    std::vector<int> channel_table_;  // num_nodes x num_nodes, -1 for non-edges
};

/// Leaves-to-root pass (post-order, siblings ascending) followed by the
/// root-to-leaves pass (pre-order, siblings ascending). Channels are numbered
/// in schedule order.
Schedule build_schedule(const TreeGraph& g);

/// Replays the order and throws Errc::schedule_violation on a missing or
/// repeated message, a message sent before its prerequisites, or a channel
/// table that is not a bijection onto 0..2|E|-1.
void check_schedule(const TreeGraph& g, const Schedule& s);

std::string graph_to_json(const TreeGraph& g);
TreeGraph graph_from_json(const std::string& text);
TreeGraph read_graph(const std::filesystem::path& path);
void write_graph(const TreeGraph& g, const std::filesystem::path& path);

}  // namespace agmn
