#pragma once
/**
 * @file   metrics.hpp
 * @brief  Evaluation metrics: Lyapunov candidate, distance travelled, completeness
 *         and the per-iteration record.
 */

#include "shrink/vec2.hpp"

#include <cstddef>
#include <iomanip>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace shrink {

/// Sum of pairwise distances for two or more robots, distance to `centroid` for one, 0 for none.
inline double lyapunov(std::span<const Vec2> robots, Vec2 centroid)
{
    if (robots.empty())
        return 0.0;
    if (robots.size() == 1)
        return distance(robots[0], centroid);
    double s = 0.0;
    for (std::size_t i = 0; i < robots.size(); ++i)
        for (std::size_t j = i + 1; j < robots.size(); ++j)
            s += distance(robots[i], robots[j]);
    return s;
}

/// Path length summed over robots; history[k][i] is robot i at iteration k.
inline double total_distance(const std::vector<std::vector<Vec2>>& history)
{
    double s = 0.0;
    for (std::size_t k = 1; k < history.size(); ++k)
        for (std::size_t i = 0; i < history[k].size() && i < history[k - 1].size(); ++i)
            s += distance(history[k][i], history[k - 1][i]);
    return s;
}

/// Percentage of the initial area removed.
inline double completeness(double area, double initial_area)
{
    if (!(initial_area > 0.0))
        return 100.0;
    return 100.0 * (1.0 - area / initial_area);
}

struct SpillMetrics
{
    double area{0.0};
    double perimeter{0.0};
    double lyapunov{0.0};
    int robots{0};
    std::optional<int> k_stop;
};

struct MetricsRecord
{
    int iteration{0};
    std::vector<SpillMetrics> spills;
    double sum_lyapunov{0.0};
    double cumulative_distance{0.0};
    int n_tracking{0};
    int n_searching{0};
    int n_rendezvous{0};
};

inline void write_metrics_header(std::ostream& os)
{
    os << "iteration,spill_id,area,perimeter,L_x,sum_L,cumulative_distance,n_tracking,n_searching,n_rendezvous\n";
}

/// One CSV row per spill; fixed notation with 9 decimals.
inline void write_metrics_rows(std::ostream& os, const MetricsRecord& r)
{
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::fixed << std::setprecision(9);
    for (std::size_t s = 0; s < r.spills.size(); ++s) {
        const auto& m = r.spills[s];
        os << r.iteration << ',' << (s + 1) << ',' << m.area << ',' << m.perimeter << ',' << m.lyapunov << ','
           << r.sum_lyapunov << ',' << r.cumulative_distance << ',' << r.n_tracking << ',' << r.n_searching << ','
           << r.n_rendezvous << '\n';
    }
    os.flags(flags);
    os.precision(prec);
}

} // namespace shrink
