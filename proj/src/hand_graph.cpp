#include "agmn/hand_graph.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "agmn/error.hpp"

namespace agmn {

const char* to_string(TreeCheck check) noexcept {
    switch (check) {
        case TreeCheck::ok: return "ok";
        case TreeCheck::bad_node_count: return "node count must be positive";
        case TreeCheck::bad_root: return "root out of range";
        case TreeCheck::node_out_of_range: return "edge endpoint out of range";
        case TreeCheck::self_loop: return "self loop";
        case TreeCheck::cycle: return "cycle";
        case TreeCheck::disconnected: return "disconnected";
    }
    return "unknown";
}

TreeCheck check_tree(const TreeGraph& g) {
    if (g.num_nodes <= 0) return TreeCheck::bad_node_count;
    if (g.root < 0 || g.root >= g.num_nodes) return TreeCheck::bad_root;

    std::vector<int> parent(static_cast<std::size_t>(g.num_nodes));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    int components = g.num_nodes;
    for (auto [a, b] : g.edges) {
        if (a < 0 || b < 0 || a >= g.num_nodes || b >= g.num_nodes) return TreeCheck::node_out_of_range;
        if (a == b) return TreeCheck::self_loop;
        const int ra = find(a);
        const int rb = find(b);
        if (ra == rb) return TreeCheck::cycle;
        parent[ra] = rb;
        --components;
    }
    // Acyclic with one component implies exactly num_nodes - 1 edges.
    return components == 1 ? TreeCheck::ok : TreeCheck::disconnected;
}

void validate(const TreeGraph& g) {
    const TreeCheck check = check_tree(g);
    if (check != TreeCheck::ok) {
        throw Error(Errc::not_a_tree, std::string(to_string(check)) + " (" + std::to_string(g.num_nodes) +
                                          " nodes, " + std::to_string(g.edges.size()) + " edges)");
    }
}

std::vector<std::vector<int>> neighbors(const TreeGraph& g) {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_nodes));
    for (auto [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    for (auto& list : adj) std::ranges::sort(list);
    return adj;
}

TreeGraph default_hand_tree() {
    static const char* fingers[] = {"thumb", "index", "middle", "ring", "little"};
    static const char* joints[] = {"mcp", "pip", "dip", "tip"};
    static const char* thumb_joints[] = {"cmc", "mcp", "ip", "tip"};

    TreeGraph g;
    g.num_nodes = 21;
    g.root = 0;
    g.names.emplace_back("wrist");
    for (int f = 0; f < 5; ++f) {
        int prev = 0;
        for (int j = 0; j < 4; ++j) {
            const int node = 1 + 4 * f + j;
            g.edges.emplace_back(std::min(prev, node), std::max(prev, node));
            g.names.push_back(std::string(fingers[f]) + "_" + (f == 0 ? thumb_joints[j] : joints[j]));
            prev = node;
        }
    }
    return g;
}

Schedule::Schedule(int num_nodes, std::vector<DirectedEdge> order, std::vector<int> channel_table)
    : num_nodes_(num_nodes), order_(std::move(order)), channel_table_(std::move(channel_table)) {
    if (channel_table_.size() != static_cast<std::size_t>(num_nodes) * num_nodes) {
        throw Error(Errc::schedule_violation, "channel table size does not match node count");
    }
}

int Schedule::channel_of(int from, int to) const noexcept {
    if (from < 0 || to < 0 || from >= num_nodes_ || to >= num_nodes_) return -1;
    return channel_table_[static_cast<std::size_t>(from) * num_nodes_ + to];
}

Schedule Schedule::with_order(std::vector<DirectedEdge> order) const {
    return Schedule(num_nodes_, std::move(order), channel_table_);
}

Schedule build_schedule(const TreeGraph& g) {
    validate(g);
    const auto adj = neighbors(g);
    std::vector<DirectedEdge> inward;
    std::vector<DirectedEdge> outward;

    // Iterative DFS so 20-deep chains or larger trees never stress the stack.
    struct Frame {
        int node;
        int parent;
        std::size_t next;
    };
    std::vector<Frame> stack{{g.root, -1, 0}};
    while (!stack.empty()) {
        Frame& top = stack.back();
        const auto& nbrs = adj[top.node];
        while (top.next < nbrs.size() && nbrs[top.next] == top.parent) ++top.next;
        if (top.next < nbrs.size()) {
            const int child = nbrs[top.next++];
            outward.push_back({top.node, child});
            stack.push_back({child, top.node, 0});
        } else {
            if (top.parent >= 0) inward.push_back({top.node, top.parent});
            stack.pop_back();
        }
    }

    std::vector<DirectedEdge> order = std::move(inward);
    order.insert(order.end(), outward.begin(), outward.end());
    std::vector<int> table(static_cast<std::size_t>(g.num_nodes) * g.num_nodes, -1);
    for (std::size_t c = 0; c < order.size(); ++c) {
        table[static_cast<std::size_t>(order[c].from) * g.num_nodes + order[c].to] = static_cast<int>(c);
    }
    return Schedule(g.num_nodes, std::move(order), std::move(table));
}

void check_schedule(const TreeGraph& g, const Schedule& s) {
    validate(g);
    const auto adj = neighbors(g);
    const std::size_t expected = 2 * g.edges.size();
    if (s.num_nodes() != g.num_nodes) throw Error(Errc::schedule_violation, "schedule built for a different graph");
    if (s.size() != expected) {
        throw Error(Errc::schedule_violation, "expected " + std::to_string(expected) + " messages, found " +
                                                  std::to_string(s.size()));
    }

    std::vector<char> channel_used(expected, 0);
    for (int i = 0; i < g.num_nodes; ++i) {
        for (int j : adj[i]) {
            const int c = s.channel_of(i, j);
            if (c < 0 || static_cast<std::size_t>(c) >= expected || channel_used[c]) {
                throw Error(Errc::schedule_violation, "channel table is not a bijection at " + std::to_string(i) +
                                                          "->" + std::to_string(j));
            }
            channel_used[c] = 1;
        }
    }

    std::vector<char> sent(static_cast<std::size_t>(g.num_nodes) * g.num_nodes, 0);
    for (std::size_t pos = 0; pos < s.size(); ++pos) {
        const auto [from, to] = s.order()[pos];
        const std::string label = std::to_string(from) + "->" + std::to_string(to);
        if (s.channel_of(from, to) < 0) {
            throw Error(Errc::schedule_violation, "position " + std::to_string(pos) + ": " + label + " is not an edge");
        }
        if (sent[static_cast<std::size_t>(from) * g.num_nodes + to]) {
            throw Error(Errc::schedule_violation, "position " + std::to_string(pos) + ": " + label + " repeated");
        }
        for (int k : adj[from]) {
            if (k != to && !sent[static_cast<std::size_t>(k) * g.num_nodes + from]) {
                throw Error(Errc::schedule_violation, "position " + std::to_string(pos) + ": " + label +
                                                          " sent before " + std::to_string(k) + "->" +
                                                          std::to_string(from));
            }
        }
        sent[static_cast<std::size_t>(from) * g.num_nodes + to] = 1;
    }
}

std::string graph_to_json(const TreeGraph& g) {
    nlohmann::json j;
    j["num_nodes"] = g.num_nodes;
    j["root"] = g.root;
    j["edges"] = nlohmann::json::array();
    for (auto [a, b] : g.edges) j["edges"].push_back({a, b});
    if (!g.names.empty()) j["names"] = g.names;
    return j.dump(2);
}

TreeGraph graph_from_json(const std::string& text) {
    TreeGraph g;
    try {
        const auto j = nlohmann::json::parse(text);
        g.num_nodes = j.at("num_nodes").get<int>();
        g.root = j.value("root", 0);
        for (const auto& e : j.at("edges")) {
            const int a = e.at(0).get<int>();
            const int b = e.at(1).get<int>();
            g.edges.emplace_back(std::min(a, b), std::max(a, b));
        }
        if (j.contains("names")) g.names = j["names"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::format, std::string("graph JSON: ") + e.what());
    }
    if (!g.names.empty() && g.names.size() != static_cast<std::size_t>(g.num_nodes)) {
        throw Error(Errc::format, "graph JSON: names must list every node");
    }
    validate(g);
    return g;
}

TreeGraph read_graph(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return graph_from_json(buf.str());
}

void write_graph(const TreeGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
    out << graph_to_json(g) << '\n';
}

}  // namespace agmn
