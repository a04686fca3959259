#include "agmn/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "agmn/error.hpp"
#include "agmn/random.hpp"

namespace agmn::oracle {

std::uint64_t joint_config_count(const PotentialSet& p) {
    const std::uint64_t states = static_cast<std::uint64_t>(p.unary.rows()) * p.unary.cols();
    std::uint64_t total = 1;
    for (int i = 0; i < p.graph.num_nodes; ++i) {
        if (total > UINT64_MAX / states) return UINT64_MAX;
        total *= states;
    }
    return total;
}

TensorStack exact_marginals_bruteforce(const PotentialSet& p, EnumerationBudget budget) {
    const std::uint64_t configs = joint_config_count(p);
    if (configs > budget.max_configs) {
        throw Error(Errc::budget_exceeded,
                    "enumeration needs " + (configs == UINT64_MAX ? std::string("more than 2^64")
                                                                  : std::to_string(configs)) +
                        " configurations, budget is " + std::to_string(budget.max_configs));
    }

    const int n = p.graph.num_nodes;
    const int rows = p.unary.rows();
    const int cols = p.unary.cols();
    const int states = rows * cols;
    const int kr = p.kernels.rows();
    const int kc = p.kernels.cols();
    const int cr = (kr - 1) / 2;
    const int cc = (kc - 1) / 2;

    struct Pair {
        int a;
        int b;
        int channel;
    };
    std::vector<Pair> pairs;
    for (auto [a, b] : p.graph.edges) pairs.push_back({a, b, p.schedule.channel_of(a, b)});

    auto pairwise = [&](const Pair& e, int xa, int xb) {
        const int dy = xb / cols - xa / cols;
        const int dx = xb % cols - xa % cols;
        if (dy < -cr || dy > cr || dx < -cc || dx > cc) return 0.0;
        return p.kernels.at(e.channel, cr + dy, cc + dx);
    };

    std::vector<double> acc(static_cast<std::size_t>(n) * states, 0.0);
    std::vector<int> x(static_cast<std::size_t>(n), 0);
    for (std::uint64_t config = 0; config < configs; ++config) {
        double weight = 1.0;
        for (int i = 0; i < n && weight != 0.0; ++i) weight *= p.unary.values()[static_cast<std::size_t>(i) * states + x[i]];
        for (const auto& e : pairs) {
            if (weight == 0.0) break;
            weight *= pairwise(e, x[e.a], x[e.b]);
        }
        if (weight != 0.0) {
            for (int i = 0; i < n; ++i) acc[static_cast<std::size_t>(i) * states + x[i]] += weight;
        }
        for (int i = 0; i < n; ++i) {
            if (++x[i] < states) break;
            x[i] = 0;
        }
    }

    TensorStack out(n, rows, cols);
    for (int i = 0; i < n; ++i) {
        const auto first = acc.begin() + static_cast<std::ptrdiff_t>(i) * states;
        const double total = std::accumulate(first, first + states, 0.0);
        for (int s = 0; s < states; ++s) {
            out.values()[static_cast<std::size_t>(i) * states + s] =
                total > 1e-12 ? first[s] / total : 1.0 / states;
        }
    }
    return out;
}

Grid2D naive_message(const Grid2D& h, const Grid2D& kernel) {
    const int cr = (kernel.rows() - 1) / 2;
    const int cc = (kernel.cols() - 1) / 2;
    Grid2D out(h.rows(), h.cols());
    for (int yt = 0; yt < h.rows(); ++yt) {
        for (int xt = 0; xt < h.cols(); ++xt) {
            double s = 0.0;
            for (int yf = 0; yf < h.rows(); ++yf) {
                for (int xf = 0; xf < h.cols(); ++xf) {
                    const int ky = cr + yt - yf;
                    const int kx = cc + xt - xf;
                    if (ky < 0 || kx < 0 || ky >= kernel.rows() || kx >= kernel.cols()) continue;
                    s += kernel(ky, kx) * h(yf, xf);
                }
            }
            out(yt, xt) = s;
        }
    }
    return out;
}

Grid2D naive_message_normalized(const Grid2D& h, const Grid2D& kernel) {
    Grid2D m = naive_message(h, kernel);
    double total = 0.0;
    for (double v : m.values()) total += v;
    for (double& v : m.values()) v = total > 1e-12 ? v / total : 1.0 / static_cast<double>(m.size());
    return m;
}

PotentialSet random_potentials(std::uint64_t seed, int n, int grid_size, int kernel_size) {
    if (kernel_size <= 0 || kernel_size % 2 == 0) {
        throw Error(Errc::invalid_kernel, "kernel size must be odd, got " + std::to_string(kernel_size));
    }
    if (n <= 0 || grid_size <= 0) throw Error(Errc::invalid_argument, "node count and grid size must be positive");
    Rng rng(seed);

    std::vector<int> label(static_cast<std::size_t>(n));
    std::iota(label.begin(), label.end(), 0);
    for (int i = n - 1; i > 0; --i) std::swap(label[i], label[rng.below(static_cast<std::uint64_t>(i) + 1)]);

    TreeGraph g;
    g.num_nodes = n;
    g.root = label[0];
    for (int v = 1; v < n; ++v) {
        const int parent = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
        const int a = label[parent];
        const int b = label[v];
        g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
    Schedule schedule = build_schedule(g);

    TensorStack unary(n, grid_size, grid_size);
    for (double& v : unary.values()) v = rng.uniform();
    TensorStack kernels(static_cast<int>(2 * g.edges.size()), kernel_size, kernel_size);
    for (auto [a, b] : g.edges) {
        const int fwd = schedule.channel_of(a, b);
        const int rev = schedule.channel_of(b, a);
        for (int r = 0; r < kernel_size; ++r) {
            for (int c = 0; c < kernel_size; ++c) {
                const double v = rng.uniform();
                kernels.at(fwd, r, c) = v;
                kernels.at(rev, kernel_size - 1 - r, kernel_size - 1 - c) = v;
            }
        }
    }
    return PotentialSet{std::move(unary), std::move(kernels), std::move(g), std::move(schedule)};
}

Schedule random_valid_schedule(const TreeGraph& g, const Schedule& base, std::uint64_t seed) {
    Rng rng(seed);
    const int n = g.num_nodes;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (auto [a, b] : g.edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::vector<char> sent(static_cast<std::size_t>(n) * n, 0);
    auto ready = [&](int from, int to) {
        if (sent[static_cast<std::size_t>(from) * n + to]) return false;
        return std::ranges::all_of(adj[from], [&](int k) { return k == to || sent[static_cast<std::size_t>(k) * n + from]; });
    };

    std::vector<DirectedEdge> order;
    const std::size_t total = 2 * g.edges.size();
    while (order.size() < total) {
        std::vector<DirectedEdge> candidates;
        for (int i = 0; i < n; ++i) {
            for (int j : adj[i]) {
                if (ready(i, j)) candidates.push_back({i, j});
            }
        }
        const DirectedEdge pick = candidates[rng.below(candidates.size())];
        sent[static_cast<std::size_t>(pick.from) * n + pick.to] = 1;
        order.push_back(pick);
    }
    return base.with_order(std::move(order));
}

}  // namespace agmn::oracle
