#pragma once
// Independent reference computations shared by the unit and acceptance tests.

#include "shrink/control.hpp"
#include "shrink/rendezvous.hpp"

#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace oracle {

// Shortest simple-path cost between every pair, by exhaustive DFS over an adjacency matrix.
inline std::vector<std::vector<double>> all_paths_min(const std::vector<std::vector<double>>& w)
{
    const std::size_t n = w.size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(n, std::vector<double>(n, inf));
    std::vector<char> seen(n, 0);
    std::function<void(std::size_t, std::size_t, double)> dfs = [&](std::size_t s, std::size_t v, double c) {
        if (c < best[s][v])
            best[s][v] = c;
        for (std::size_t u = 0; u < n; ++u)
            if (!seen[u] && std::isfinite(w[v][u])) {
                seen[u] = 1;
                dfs(s, u, c + w[v][u]);
                seen[u] = 0;
            }
    };
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(seen.begin(), seen.end(), 0);
        seen[s] = 1;
        dfs(s, s, 0.0);
    }
    return best;
}

// Root for every robot by enumeration; ties go to the lowest root index, roots belong to themselves.
inline std::vector<int> brute_force_assignment(const std::vector<std::vector<double>>& w, const std::vector<int>& roots)
{
    const auto best = all_paths_min(w);
    std::vector<int> out(w.size(), -1);
    for (std::size_t i = 0; i < w.size(); ++i) {
        double c = std::numeric_limits<double>::infinity();
        for (int r : roots) {
            if (static_cast<std::size_t>(r) == i) {
                out[i] = r;
                break;
            }
            if (best[i][static_cast<std::size_t>(r)] < c - 1e-12) {
                c = best[i][static_cast<std::size_t>(r)];
                out[i] = r;
            }
        }
    }
    return out;
}

struct RandomGraph
{
    std::vector<shrink::Vec2> positions;
    std::vector<int> roots;
    double r_C{0.0};
};

inline RandomGraph random_graph(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> size(2, 8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomGraph g;
    const int n = size(rng);
    for (int i = 0; i < n; ++i)
        g.positions.push_back({unit(rng), unit(rng)});
    g.r_C = 0.2 + 0.5 * unit(rng);
    for (int i = 0; i < n; ++i)
        if (unit(rng) < 0.3)
            g.roots.push_back(i);
    if (g.roots.empty())
        g.roots.push_back(static_cast<int>(unit(rng) * n) % n);
    return g;
}

inline std::vector<std::vector<double>> weight_matrix(const std::vector<shrink::Vec2>& p, double r_C)
{
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> w(p.size(), std::vector<double>(p.size(), inf));
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < p.size(); ++j)
            if (i != j && shrink::distance(p[i], p[j]) <= r_C)
                w[i][j] = std::max(shrink::distance(p[i], p[j]), 1e-12);
    return w;
}

// Central-difference gradient of the searching potential.
inline shrink::Vec2 fd_gradient(shrink::Vec2 q, shrink::Vec2 goal, const std::vector<shrink::Vec2>& rep,
                                const shrink::ControlGains& k, double h)
{
    auto U = [&](shrink::Vec2 p) { return shrink::searching_field(p, goal, rep, k).potential; };
    return {(U({q.x + h, q.y}) - U({q.x - h, q.y})) / (2 * h), (U({q.x, q.y + h}) - U({q.x, q.y - h})) / (2 * h)};
}

struct FieldCase
{
    shrink::Vec2 q, goal;
    std::vector<shrink::Vec2> repulsors;
};

// Random configuration with every repulsor comfortably inside (0, d0) and away from the kinks.
inline FieldCase random_field_case(std::mt19937_64& rng, const shrink::ControlGains& k)
{
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> rho(0.05, 0.9);
    std::uniform_int_distribution<int> count(0, 4);
    FieldCase c;
    c.q = {unit(rng), unit(rng)};
    c.goal = {unit(rng), unit(rng)};
    const int m = count(rng);
    for (int i = 0; i < m; ++i) {
        const double r = rho(rng) * k.d0;
        c.repulsors.push_back(c.q + shrink::Vec2::from_angle(3.2 * unit(rng)) * r);
    }
    return c;
}

} // namespace oracle
