#include <doctest.h>

#include <algorithm>

#include "agmn/error.hpp"
#include "agmn/hand_graph.hpp"
#include "agmn/oracle.hpp"

using namespace agmn;

TEST_CASE("default hand tree") {
    const TreeGraph g = default_hand_tree();
    CHECK(g.num_nodes == 21);
    CHECK(g.edges.size() == 20);
    CHECK(g.root == 0);
    CHECK(g.names.size() == 21);
    CHECK_NOTHROW(validate(g));
    const auto adj = neighbors(g);
    CHECK(adj[0] == std::vector<int>{1, 5, 9, 13, 17});
    for (int f = 0; f < 5; ++f) {
        CHECK(adj[4 + 4 * f].size() == 1);
        CHECK(adj[1 + 4 * f] == std::vector<int>{0, 2 + 4 * f});
    }
}

TEST_CASE("validate names the violation") {
    TreeGraph g{3, {{0, 1}, {1, 2}}, 0, {}};
    CHECK(check_tree(g) == TreeCheck::ok);

    g.edges.push_back({0, 2});
    CHECK(check_tree(g) == TreeCheck::cycle);
    try {
        validate(g);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::not_a_tree);
        CHECK(std::string(e.what()).find("cycle") != std::string::npos);
    }

    CHECK(check_tree(TreeGraph{4, {{0, 1}, {2, 3}}, 0, {}}) == TreeCheck::disconnected);
    CHECK(check_tree(TreeGraph{3, {{0, 1}}, 0, {}}) == TreeCheck::disconnected);
    CHECK(check_tree(TreeGraph{3, {{0, 1}, {1, 3}}, 0, {}}) == TreeCheck::node_out_of_range);
    CHECK(check_tree(TreeGraph{3, {{0, 1}, {1, 1}}, 0, {}}) == TreeCheck::self_loop);
    CHECK(check_tree(TreeGraph{2, {{0, 1}}, 5, {}}) == TreeCheck::bad_root);
    CHECK(check_tree(TreeGraph{2, {{0, 1}, {0, 1}}, 0, {}}) == TreeCheck::cycle);
    CHECK(check_tree(TreeGraph{1, {}, 0, {}}) == TreeCheck::ok);
}

TEST_CASE("schedule on the hand tree") {
    const TreeGraph g = default_hand_tree();
    const Schedule s = build_schedule(g);
    CHECK(s.size() == 40);
    CHECK_NOTHROW(check_schedule(g, s));
    // Leaves first: the thumb tip sends before anything else.
    CHECK(s.order().front() == DirectedEdge{4, 3});
    CHECK(s.order()[19] == DirectedEdge{17, 0});
    CHECK(s.order()[20] == DirectedEdge{0, 1});
    CHECK(s.order().back() == DirectedEdge{19, 20});
    for (std::size_t c = 0; c < s.size(); ++c) {
        CHECK(s.channel_of(s.order()[c].from, s.order()[c].to) == static_cast<int>(c));
    }
    CHECK(s.channel_of(0, 2) == -1);
}

TEST_CASE("two-node schedule") {
    const TreeGraph g{2, {{0, 1}}, 0, {}};
    const Schedule s = build_schedule(g);
    REQUIRE(s.size() == 2);
    CHECK(s.order()[0] == DirectedEdge{1, 0});
    CHECK(s.order()[1] == DirectedEdge{0, 1});
}

TEST_CASE("check_schedule rejects broken orders") {
    const TreeGraph g{3, {{0, 1}, {1, 2}}, 0, {}};
    const Schedule s = build_schedule(g);
    auto order = s.order();
    std::swap(order[0], order[1]);  // 1->0 before 2->1
    CHECK_THROWS_AS(check_schedule(g, s.with_order(order)), Error);

    auto repeated = s.order();
    repeated[3] = repeated[2];
    CHECK_THROWS_AS(check_schedule(g, s.with_order(repeated)), Error);

    auto short_order = s.order();
    short_order.pop_back();
    CHECK_THROWS_AS(check_schedule(g, s.with_order(short_order)), Error);
}

TEST_CASE("schedules of random trees replay cleanly") {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const int n = 3 + static_cast<int>(seed % 13);
        const auto p = oracle::random_potentials(seed, n, 1, 1);
        const Schedule s = build_schedule(p.graph);
        CHECK(s.size() == static_cast<std::size_t>(2 * (n - 1)));
        CHECK_NOTHROW(check_schedule(p.graph, s));
        CHECK_NOTHROW(check_schedule(p.graph, oracle::random_valid_schedule(p.graph, s, seed)));
    }
}

TEST_CASE("graph JSON round trip") {
    const TreeGraph g = default_hand_tree();
    const TreeGraph back = graph_from_json(graph_to_json(g));
    CHECK(back.num_nodes == g.num_nodes);
    CHECK(back.edges == g.edges);
    CHECK(back.root == g.root);
    CHECK(back.names == g.names);

    const TreeGraph minimal = graph_from_json(R"({"num_nodes": 3, "edges": [[2, 1], [0, 1]]})");
    CHECK(minimal.edges == std::vector<std::pair<int, int>>{{1, 2}, {0, 1}});

    CHECK_THROWS_AS((void)graph_from_json(R"({"num_nodes": 3, "edges": [[0, 1], [1, 2], [0, 2]]})"), Error);
    CHECK_THROWS_AS((void)graph_from_json("not json"), Error);
    CHECK_THROWS_AS((void)graph_from_json(R"({"edges": []})"), Error);
}
