#pragma once
/**
 * @file   rendezvous.hpp
 * @brief  Connectivity graph, rendezvous-point election, shortest-path
 *         assignment and the per-root trees that robots climb toward the boundary.
 *
 * Vertices are robot indices (0-based). Every tie is broken toward the lowest index.
 */

#include "shrink/vec2.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

namespace shrink {

struct Edge
{
    int to;
    double weight;
};

struct ConnectivityGraph
{
    std::vector<std::vector<Edge>> adjacency; ///< sorted by neighbour index

    std::size_t size() const { return adjacency.size(); }
    std::size_t edge_count() const
    {
        std::size_t n = 0;
        for (const auto& a : adjacency)
            n += a.size();
        return n / 2;
    }
    std::optional<double> weight(int a, int b) const
    {
        for (const Edge& e : adjacency.at(static_cast<std::size_t>(a)))
            if (e.to == b)
                return e.weight;
        return std::nullopt;
    }
};

/// Edge iff distance <= r_C; weight is the distance.
inline ConnectivityGraph build_graph(std::span<const Vec2> positions, double r_C)
{
    ConnectivityGraph g;
    g.adjacency.resize(positions.size());
    for (std::size_t i = 0; i < positions.size(); ++i)
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            const double w = distance(positions[i], positions[j]);
            if (w <= r_C) {
                // Coincident robots still get a strictly positive weight.
                const double ww = std::max(w, 1e-12);
                g.adjacency[i].push_back({static_cast<int>(j), ww});
                g.adjacency[j].push_back({static_cast<int>(i), ww});
            }
        }
    return g;
}

struct ShortestPaths
{
    std::vector<double> dist;  ///< infinity when unreachable
    std::vector<int> parent;   ///< -1 for the source and unreachable vertices
    std::vector<int> hops;
};

/**
 * Dijkstra from `source`, restricted to vertices with allowed[v] (all if empty).
 * Among equal-length paths the predecessor with the lowest index wins.
 */
inline ShortestPaths dijkstra(const ConnectivityGraph& g, int source, std::span<const char> allowed = {})
{
    const std::size_t n = g.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    ShortestPaths sp{std::vector<double>(n, kInf), std::vector<int>(n, -1), std::vector<int>(n, 0)};
    auto ok = [&](int v) { return allowed.empty() || allowed[static_cast<std::size_t>(v)]; };
    if (source < 0 || static_cast<std::size_t>(source) >= n || !ok(source))
        return sp;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    std::vector<char> done(n, 0);
    sp.dist[static_cast<std::size_t>(source)] = 0.0;
    pq.emplace(0.0, source);
    constexpr double kTieTol = 1e-12;
    while (!pq.empty()) {
        const auto [d, v] = pq.top();
        pq.pop();
        const auto vi = static_cast<std::size_t>(v);
        if (done[vi])
            continue;
        done[vi] = 1;
        for (const Edge& e : g.adjacency[vi]) {
            if (!ok(e.to))
                continue;
            const auto ti = static_cast<std::size_t>(e.to);
            if (done[ti])
                continue;
            const double nd = d + e.weight;
            const double cur = sp.dist[ti];
            if (nd < cur - kTieTol) {
                sp.dist[ti] = nd;
                sp.parent[ti] = v;
                sp.hops[ti] = sp.hops[vi] + 1;
                pq.emplace(nd, e.to);
            } else if (nd <= cur + kTieTol && v < sp.parent[ti]) {
                sp.parent[ti] = v;
                sp.hops[ti] = sp.hops[vi] + 1;
            }
        }
    }
    return sp;
}

/// Rendezvous points: exactly the robots that see a boundary.
inline std::vector<int> select_rendezvous_points(std::span<const char> sees_boundary)
{
    std::vector<int> out;
    for (std::size_t i = 0; i < sees_boundary.size(); ++i)
        if (sees_boundary[i])
            out.push_back(static_cast<int>(i));
    return out;
}

struct Assignment
{
    std::vector<int> root;        ///< per robot: assigned rendezvous point, -1 if stranded
    std::vector<double> cost;     ///< shortest-path distance to that root
    std::vector<int> roots;       ///< rendezvous points, ascending

    bool stranded(int i) const { return root.at(static_cast<std::size_t>(i)) < 0; }

    /// Membership matrix: rows robots, columns rendezvous points.
    std::vector<std::vector<int>> matrix() const
    {
        std::vector<std::vector<int>> z(root.size(), std::vector<int>(roots.size(), 0));
        for (std::size_t i = 0; i < root.size(); ++i)
            for (std::size_t m = 0; m < roots.size(); ++m)
                z[i][m] = root[i] == roots[m] ? 1 : 0;
        return z;
    }
};

/// Each robot goes to the rendezvous point with the shortest path distance.
inline Assignment assign(const ConnectivityGraph& g, std::span<const int> rendezvous_points)
{
    const std::size_t n = g.size();
    Assignment a;
    a.roots.assign(rendezvous_points.begin(), rendezvous_points.end());
    std::sort(a.roots.begin(), a.roots.end());
    a.roots.erase(std::unique(a.roots.begin(), a.roots.end()), a.roots.end());
    a.root.assign(n, -1);
    a.cost.assign(n, std::numeric_limits<double>::infinity());
    constexpr double kTieTol = 1e-12;
    for (int r : a.roots) {
        const ShortestPaths sp = dijkstra(g, r);
        for (std::size_t i = 0; i < n; ++i)
            if (sp.dist[i] < a.cost[i] - kTieTol) {
                a.cost[i] = sp.dist[i];
                a.root[i] = r;
            }
    }
    // A rendezvous point always belongs to itself.
    for (int r : a.roots) {
        a.root[static_cast<std::size_t>(r)] = r;
        a.cost[static_cast<std::size_t>(r)] = 0.0;
    }
    return a;
}

struct RendezvousTree
{
    int root{-1};
    std::vector<int> members;                ///< ascending, root included
    std::vector<std::pair<int, int>> parent; ///< (child, parent) for every non-root member
    std::vector<std::pair<int, int>> level;  ///< (member, hops to root)
    std::vector<int> stranded;               ///< assigned members unreachable inside the subgraph

    std::optional<int> parent_of(int v) const
    {
        for (const auto& [c, p] : parent)
            if (c == v)
                return p;
        return std::nullopt;
    }
    int level_of(int v) const
    {
        for (const auto& [m, l] : level)
            if (m == v)
                return l;
        return -1;
    }
};

/// Shortest-path tree of each root over the subgraph of robots assigned to it.
inline std::vector<RendezvousTree> build_trees(const ConnectivityGraph& g, const Assignment& a)
{
    std::vector<RendezvousTree> trees;
    const std::size_t n = g.size();
    for (int r : a.roots) {
        RendezvousTree t;
        t.root = r;
        std::vector<char> allowed(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            if (a.root[i] == r) {
                allowed[i] = 1;
                t.members.push_back(static_cast<int>(i));
            }
        const ShortestPaths sp = dijkstra(g, r, allowed);
        for (int m : t.members) {
            const auto mi = static_cast<std::size_t>(m);
            if (m == r) {
                t.level.emplace_back(m, 0);
            } else if (sp.parent[mi] >= 0) {
                t.parent.emplace_back(m, sp.parent[mi]);
                t.level.emplace_back(m, sp.hops[mi]);
            } else {
                t.stranded.push_back(m);
            }
        }
        trees.push_back(std::move(t));
    }
    return trees;
}

// ---------------------------------------------------------------------------
// Parent following

struct RendezvousInput
{
    Vec2 self;
    int parent{-1};                ///< current parent index, -1 for a root
    std::optional<int> grandparent; ///< parent's parent, absent when the parent is the root
    Vec2 parent_position;
    std::optional<Vec2> grandparent_position;
    double robot_radius{0.01};
    double promotion{0.02};        ///< surface-to-surface closeness that counts as reaching a parent
    double r_C{0.3};
};

struct RendezvousDecision
{
    Vec2 goal;
    std::optional<int> new_parent; ///< promotion one level up
    bool reached_root{false};
};

/// Goal is the current parent; close enough means climb one level, or stop at the root.
inline RendezvousDecision rendezvous_step(const RendezvousInput& in)
{
    RendezvousDecision d;
    d.goal = in.parent_position;
    const bool close = distance(in.self, in.parent_position) <= 2.0 * in.robot_radius + in.promotion;
    if (!close)
        return d;
    if (!in.grandparent) {
        d.reached_root = true;
        return d;
    }
    if (in.grandparent_position && distance(in.self, *in.grandparent_position) <= in.r_C) {
        d.new_parent = *in.grandparent;
        d.goal = *in.grandparent_position;
    }
    return d;
}

/**
 * Root goal that keeps a moving boundary in view: hold half the vision range
 * from the nearest boundary point, unless that would break contact with a child.
 */
inline Vec2 herd(Vec2 root, Vec2 boundary_point, double r_A, std::span<const Vec2> children, double r_C)
{
    const Vec2 away = root - boundary_point;
    const Vec2 dir = away.squared_norm() > 0.0 ? away.normalized() : Vec2{1.0, 0.0};
    const Vec2 target = boundary_point + dir * (0.5 * r_A);
    for (const Vec2& c : children)
        if (distance(target, c) > r_C)
            return root;
    return target;
}

} // namespace shrink
