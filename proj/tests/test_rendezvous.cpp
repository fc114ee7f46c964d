#include "shrink/rendezvous.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace shrink;

TEST(Graph, InclusiveRange)
{
    const std::vector<Vec2> at{{0, 0}, {0.3, 0}};
    EXPECT_EQ(build_graph(at, 0.3).edge_count(), 1U);
    const std::vector<Vec2> far{{0, 0}, {0.303, 0}};
    EXPECT_EQ(build_graph(far, 0.3).edge_count(), 0U);
}

TEST(Graph, CollinearPath)
{
    const std::vector<Vec2> p{{0, 0}, {0.27, 0}, {0.54, 0}};
    const auto g = build_graph(p, 0.3);
    EXPECT_EQ(g.edge_count(), 2U);
    EXPECT_TRUE(g.weight(0, 1).has_value());
    EXPECT_FALSE(g.weight(0, 2).has_value());
    EXPECT_NEAR(*g.weight(1, 2), 0.27, 1e-12);
}

TEST(Election, SeesBoundary)
{
    const std::vector<char> all(5, 1);
    EXPECT_EQ(select_rendezvous_points(all).size(), 5U);
    const std::vector<char> none(5, 0);
    EXPECT_TRUE(select_rendezvous_points(none).empty());
    const std::vector<char> some{0, 1, 0, 1};
    EXPECT_EQ(select_rendezvous_points(some), (std::vector<int>{1, 3}));
}

TEST(Assign, FourNodeExample)
{
    // R1 - R2 (1), R2 - D1 (3), R2 - D2 (1): R1 reaches D2 at cost 2.
    ConnectivityGraph g;
    g.adjacency.resize(4);
    auto link = [&](int a, int b, double w) {
        g.adjacency[static_cast<std::size_t>(a)].push_back({b, w});
        g.adjacency[static_cast<std::size_t>(b)].push_back({a, w});
    };
    link(0, 1, 1.0);
    link(1, 2, 3.0);
    link(1, 3, 1.0);
    const std::vector<int> roots{2, 3};
    const auto a = assign(g, roots);
    EXPECT_EQ(a.root[0], 3);
    EXPECT_DOUBLE_EQ(a.cost[0], 2.0);
    EXPECT_EQ(a.root[1], 3);
    EXPECT_EQ(a.root[2], 2);
    const auto z = a.matrix();
    EXPECT_EQ(z[0], (std::vector<int>{0, 1}));
}

TEST(Assign, SingleOptionAndStranded)
{
    const std::vector<Vec2> p{{0, 0}, {0.2, 0}, {5, 5}};
    const auto g = build_graph(p, 0.3);
    const std::vector<int> roots{0};
    const auto a = assign(g, roots);
    EXPECT_EQ(a.root[1], 0);
    EXPECT_TRUE(a.stranded(2));
}

TEST(Assign, MatchesBruteForce)
{
    std::mt19937_64 rng(2024);
    for (int t = 0; t < 200; ++t) {
        const auto rg = oracle::random_graph(rng);
        const auto g = build_graph(rg.positions, rg.r_C);
        const auto a = assign(g, rg.roots);
        const auto expect = oracle::brute_force_assignment(oracle::weight_matrix(rg.positions, rg.r_C), rg.roots);
        EXPECT_EQ(a.root, expect) << "graph " << t;
    }
}

TEST(Dijkstra, DistancesMatchEnumeration)
{
    std::mt19937_64 rng(99);
    for (int t = 0; t < 50; ++t) {
        const auto rg = oracle::random_graph(rng);
        const auto w = oracle::weight_matrix(rg.positions, rg.r_C);
        const auto best = oracle::all_paths_min(w);
        const auto g = build_graph(rg.positions, rg.r_C);
        for (std::size_t s = 0; s < w.size(); ++s) {
            const auto sp = dijkstra(g, static_cast<int>(s));
            for (std::size_t v = 0; v < w.size(); ++v) {
                if (std::isinf(best[s][v]))
                    EXPECT_TRUE(std::isinf(sp.dist[v]));
                else
                    EXPECT_NEAR(sp.dist[v], best[s][v], 1e-12);
            }
        }
    }
}

TEST(Trees, SingletonStarAndChain)
{
    {
        const std::vector<Vec2> p{{0, 0}};
        const std::vector<int> roots{0};
        const auto g = build_graph(p, 0.3);
        const auto t = build_trees(g, assign(g, roots));
        ASSERT_EQ(t.size(), 1U);
        EXPECT_EQ(t[0].members, (std::vector<int>{0}));
        EXPECT_TRUE(t[0].parent.empty());
    }
    {
        const std::vector<Vec2> p{{0, 0}, {0.2, 0}, {0, 0.2}, {-0.2, 0}};
        const std::vector<int> roots{0};
        const auto g = build_graph(p, 0.25);
        const auto t = build_trees(g, assign(g, roots));
        for (int m : {1, 2, 3}) {
            EXPECT_EQ(t[0].parent_of(m), 0);
            EXPECT_EQ(t[0].level_of(m), 1);
        }
    }
    {
        const std::vector<Vec2> p{{0, 0}, {0.2, 0}, {0.4, 0}, {0.6, 0}};
        const std::vector<int> roots{0};
        const auto g = build_graph(p, 0.25);
        const auto t = build_trees(g, assign(g, roots));
        for (int m = 1; m < 4; ++m) {
            EXPECT_EQ(t[0].parent_of(m), m - 1);
            EXPECT_EQ(t[0].level_of(m), m);
        }
    }
}

TEST(Step, LeafReachesRoot)
{
    RendezvousInput in;
    in.self = {0.0, 0.0};
    in.parent = 4;
    in.parent_position = {0.03, 0.0};
    const auto d = rendezvous_step(in);
    EXPECT_TRUE(d.reached_root);
}

TEST(Step, PromotionToGrandparent)
{
    RendezvousInput in;
    in.self = {0.0, 0.0};
    in.parent = 4;
    in.grandparent = 9;
    in.parent_position = {0.03, 0.0};
    in.grandparent_position = Vec2{0.25, 0.0};
    const auto d = rendezvous_step(in);
    EXPECT_FALSE(d.reached_root);
    EXPECT_EQ(d.new_parent, 9);
    EXPECT_EQ(d.goal, (Vec2{0.25, 0.0}));
}

TEST(Step, FarParentIsTheGoal)
{
    RendezvousInput in;
    in.self = {0.0, 0.0};
    in.parent = 4;
    in.parent_position = {0.2, 0.0};
    const auto d = rendezvous_step(in);
    EXPECT_FALSE(d.reached_root);
    EXPECT_FALSE(d.new_parent);
    EXPECT_EQ(d.goal, in.parent_position);
}

TEST(Herd, KeepsHalfRangeAndChildren)
{
    const std::vector<Vec2> none;
    const Vec2 t = herd({0.5, 0}, {0, 0}, 0.3, none, 0.3);
    EXPECT_NEAR(t.x, 0.15, 1e-12);
    const std::vector<Vec2> child{{0.8, 0}};
    EXPECT_EQ(herd({0.5, 0}, {0, 0}, 0.3, child, 0.3), (Vec2{0.5, 0}));
}
