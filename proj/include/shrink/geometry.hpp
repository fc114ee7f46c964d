#pragma once
/**
 * @file   geometry.hpp
 * @brief  Spill boundaries as closed CCW polylines, local queries on them, and
 *         swept-rectangle erosion.
 *
 * A boundary keeps its reference point as vertex 0, so the arc coordinate of
 * any boundary point is measured counterclockwise from there. Vertex spacing is
 * held within [h/10, h] by resampling after every construction and erosion.
 */

#include "shrink/vec2.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shrink {

class GeometryError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised by arc queries when a point is farther than the snap tolerance from the boundary.
class OffBoundaryError : public GeometryError
{
public:
    OffBoundaryError(char which, double dist)
        : GeometryError(std::string("point ") + which + " is " + std::to_string(dist) +
                        " m off the boundary"),
          which_(which), distance_(dist)
    {
    }
    char which() const { return which_; }
    double distance() const { return distance_; }

private:
    char which_;
    double distance_;
};

/// Raised when a spill is asked to move faster than its permitted speed.
class SpeedBoundError : public GeometryError
{
public:
    SpeedBoundError(double speed, double bound)
        : GeometryError("spill speed " + std::to_string(speed) + " m/s exceeds bound " +
                        std::to_string(bound) + " m/s"),
          speed_(speed), bound_(bound)
    {
    }
    double speed() const { return speed_; }
    double bound() const { return bound_; }

private:
    double speed_;
    double bound_;
};

namespace detail {

inline double signed_area(std::span<const Vec2> pts)
{
    const std::size_t n = pts.size();
    if (n < 3)
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += cross(pts[i], pts[(i + 1) % n]);
    return 0.5 * acc;
}

// Area lost when vertex `v` is dropped from a CCW ring (negative means the ring grows).
inline double removal_loss(Vec2 prev, Vec2 v, Vec2 next) { return 0.5 * cross(v - prev, next - v); }

/// Drops short edges without ever growing the enclosed area, then splits long edges.
inline std::vector<Vec2> resample(std::vector<Vec2> pts, double h)
{
    const double min_edge = h / 10.0;
    bool changed = true;
    while (changed && pts.size() >= 3) {
        changed = false;
        for (std::size_t i = 0; i < pts.size() && pts.size() >= 3; ++i) {
            const std::size_t n = pts.size();
            const std::size_t j = (i + 1) % n;
            if (distance(pts[i], pts[j]) >= min_edge)
                continue;
            const Vec2 before = pts[(i + n - 1) % n];
            const Vec2 after = pts[(j + 1) % n];
            const double loss_i = removal_loss(before, pts[i], pts[j]);
            const double loss_j = removal_loss(pts[i], pts[j], after);
            std::optional<std::size_t> victim;
            if (loss_i >= 0.0 && (loss_j < 0.0 || loss_i <= loss_j))
                victim = i;
            else if (loss_j >= 0.0)
                victim = j;
            if (!victim)
                continue; // both ends reflex; dropping either would add area
            pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(*victim));
            changed = true;
        }
    }
    if (pts.size() < 3)
        return {};

    std::vector<Vec2> out;
    out.reserve(pts.size() * 2);
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = pts[i];
        const Vec2 b = pts[(i + 1) % n];
        out.push_back(a);
        const double len = distance(a, b);
        if (len > h) {
            const auto pieces = static_cast<std::size_t>(std::ceil(len / h));
            for (std::size_t k = 1; k < pieces; ++k)
                out.push_back(a + (b - a) * (static_cast<double>(k) / static_cast<double>(pieces)));
        }
    }
    return out;
}

} // namespace detail

/// Closest point on a boundary, with its CCW arc coordinate and travel direction.
struct BoundaryPoint
{
    Vec2 point;
    double distance{std::numeric_limits<double>::infinity()};
    double tangent{0.0}; ///< CCW travel direction at the point (rad)
    double arc{0.0};     ///< arc coordinate measured from the reference point
    std::size_t edge{0};
};

/**
 * Closed, counterclockwise, resampled polyline bounding one spill.
 *
 * An empty boundary (fewer than three vertices) stands for a fully covered
 * spill: its area and perimeter are zero and it is never visible.
 */
class SpillBoundary
{
public:
    SpillBoundary() = default;

    /// Builds a boundary from an arbitrary simple ring; orientation is normalized to CCW.
    static SpillBoundary from_vertices(std::vector<Vec2> pts, double resolution,
                                       std::optional<Vec2> reference = std::nullopt)
    {
        if (!(resolution > 0.0))
            throw GeometryError("boundary resolution must be positive");
        if (pts.size() >= 2 && pts.front() == pts.back())
            pts.pop_back();
        if (detail::signed_area(pts) < 0.0)
            std::reverse(pts.begin(), pts.end());
        SpillBoundary b;
        b.resolution_ = resolution;
        b.assign(detail::resample(std::move(pts), resolution), reference);
        b.initial_area_ = b.area();
        return b;
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    bool empty() const { return vertices_.size() < 3; }
    double resolution() const { return resolution_; }
    double initial_area() const { return initial_area_; }

    /// Arc-length origin p0 (always vertex 0 of a non-empty boundary).
    Vec2 reference_point() const { return empty() ? reference_ : vertices_.front(); }

    double area() const { return empty() ? 0.0 : area_; }
    double perimeter() const { return empty() ? 0.0 : cumulative_.back(); }

    /// Arc coordinate of vertex i; index size() maps to the full perimeter.
    double arc_at_vertex(std::size_t i) const { return cumulative_.at(i); }

    /// Point at CCW arc coordinate s (taken modulo the perimeter).
    Vec2 point_at_arc(double s) const
    {
        if (empty())
            return reference_;
        const double p = perimeter();
        s = std::fmod(s, p);
        if (s < 0.0)
            s += p;
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
        const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - cumulative_.begin() - 1));
        const std::size_t n = vertices_.size();
        const Vec2 a = vertices_[i % n];
        const Vec2 b = vertices_[(i + 1) % n];
        const double len = cumulative_[i + 1] - cumulative_[i];
        const double t = len > 0.0 ? (s - cumulative_[i]) / len : 0.0;
        return a + (b - a) * std::clamp(t, 0.0, 1.0);
    }

    /// Same shape and bookkeeping with a new vertex ring (already CCW and resampled).
    SpillBoundary with_ring(std::vector<Vec2> ring) const
    {
        SpillBoundary b;
        b.resolution_ = resolution_;
        b.initial_area_ = initial_area_;
        b.assign(std::move(ring), reference_point());
        return b;
    }

    /// Rigidly shifted copy; area and arc lengths are carried over unchanged.
    SpillBoundary shifted(Vec2 offset) const
    {
        SpillBoundary b = *this;
        for (auto& p : b.vertices_)
            p += offset;
        b.reference_ += offset;
        return b;
    }

private:
    void assign(std::vector<Vec2> ring, std::optional<Vec2> reference)
    {
        if (ring.size() < 3 || detail::signed_area(ring) <= 0.0) {
            vertices_.clear();
            cumulative_.assign(1, 0.0);
            reference_ = reference.value_or(ring.empty() ? Vec2{} : ring.front());
            area_ = 0.0;
            return;
        }
        // The reference point snaps to the nearest vertex so the spacing invariant survives.
        std::size_t start = 0;
        if (reference) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < ring.size(); ++i) {
                const double dd = (ring[i] - *reference).squared_norm();
                if (dd < best) {
                    best = dd;
                    start = i;
                }
            }
        }
        std::rotate(ring.begin(), ring.begin() + static_cast<std::ptrdiff_t>(start), ring.end());
        vertices_ = std::move(ring);
        reference_ = vertices_.front();
        area_ = detail::signed_area(vertices_);
        cumulative_.resize(vertices_.size() + 1);
        cumulative_[0] = 0.0;
        for (std::size_t i = 0; i < vertices_.size(); ++i)
            cumulative_[i + 1] = cumulative_[i] + distance(vertices_[i], vertices_[(i + 1) % vertices_.size()]);
    }

    std::vector<Vec2> vertices_;
    std::vector<double> cumulative_{0.0};
    Vec2 reference_;
    double resolution_{0.01};
    double area_{0.0};
    double initial_area_{0.0};
};

struct Bounds
{
    double xmin{0.0};
    double ymin{0.0};
    double xmax{0.0};
    double ymax{0.0};

    bool contains(Vec2 p) const { return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax; }
};

// ---------------------------------------------------------------------------
// Shape factories

inline SpillBoundary make_polygon(std::vector<Vec2> vertices, double resolution)
{
    return SpillBoundary::from_vertices(std::move(vertices), resolution);
}

inline SpillBoundary make_ellipse(Vec2 center, double semi_major, double semi_minor, double angle,
                                  double resolution, std::size_t segments = 0)
{
    if (!(semi_major > 0.0) || !(semi_minor > 0.0))
        throw GeometryError("ellipse semi-axes must be positive");
    if (segments == 0) {
        // Ramanujan's perimeter estimate; keeps chords close to the resolution.
        const double a = semi_major, b = semi_minor;
        const double perim = kPi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
        segments = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(perim / resolution)));
    }
    std::vector<Vec2> pts;
    pts.reserve(segments);
    const double c = std::cos(angle), s = std::sin(angle);
    for (std::size_t i = 0; i < segments; ++i) {
        const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(segments);
        const double lx = semi_major * std::cos(t), ly = semi_minor * std::sin(t);
        pts.emplace_back(center.x + c * lx - s * ly, center.y + s * lx + c * ly);
    }
    return SpillBoundary::from_vertices(std::move(pts), resolution);
}

inline SpillBoundary make_circle(Vec2 center, double radius, double resolution, std::size_t segments = 0)
{
    return make_ellipse(center, radius, radius, 0.0, resolution, segments);
}

// ---------------------------------------------------------------------------
// Measures and queries

inline double area(const SpillBoundary& b) { return b.area(); }
inline double perimeter(const SpillBoundary& b) { return b.perimeter(); }

/// Area centroid of the enclosed region; the reference point for an empty boundary.
inline Vec2 centroid(const SpillBoundary& b)
{
    if (b.empty())
        return b.reference_point();
    const auto& v = b.vertices();
    const std::size_t n = v.size();
    double a = 0.0;
    Vec2 c;
    for (std::size_t i = 0; i < n; ++i) {
        const double k = cross(v[i], v[(i + 1) % n]);
        a += k;
        c += (v[i] + v[(i + 1) % n]) * k;
    }
    return c / (3.0 * a);
}

/// Nearest point on the polyline. Ties resolve to the lowest arc coordinate.
inline BoundaryPoint nearest_boundary_point(const SpillBoundary& b, Vec2 q)
{
    BoundaryPoint best;
    if (b.empty())
        return best;
    const auto& v = b.vertices();
    const std::size_t n = v.size();
    double best_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i];
        const Vec2 e = v[(i + 1) % n] - a;
        const double len2 = e.squared_norm();
        const double t = len2 > 0.0 ? std::clamp(dot(q - a, e) / len2, 0.0, 1.0) : 0.0;
        const Vec2 p = a + e * t;
        const double dd = distance(q, p);
        if (dd < best.distance - 1e-12) {
            best.distance = dd;
            best.point = p;
            best.edge = i;
            best_t = t;
        }
    }
    const std::size_t i = best.edge;
    const Vec2 e = v[(i + 1) % n] - v[i];
    best.arc = b.arc_at_vertex(i) + e.norm() * best_t;
    if (best.arc >= b.perimeter())
        best.arc -= b.perimeter();
    Vec2 dir = e.normalized();
    constexpr double kVertexEps = 1e-9;
    if (best_t <= kVertexEps) {
        dir = ((v[i] - v[(i + n - 1) % n]).normalized() + dir).normalized();
    } else if (best_t >= 1.0 - kVertexEps) {
        dir = (dir + (v[(i + 2) % n] - v[(i + 1) % n]).normalized()).normalized();
    }
    if (dir.squared_norm() == 0.0)
        dir = e.normalized();
    best.tangent = dir.angle();
    return best;
}

/// CCW arc length from pA to pB, in [0, perimeter). Both points must lie within snap_tol of the boundary.
inline double arc_length_between(const SpillBoundary& b, Vec2 pA, Vec2 pB, double snap_tol)
{
    if (b.empty())
        throw GeometryError("arc length on an empty boundary");
    const BoundaryPoint a = nearest_boundary_point(b, pA);
    if (a.distance > snap_tol)
        throw OffBoundaryError('A', a.distance);
    const BoundaryPoint c = nearest_boundary_point(b, pB);
    if (c.distance > snap_tol)
        throw OffBoundaryError('B', c.distance);
    const double p = b.perimeter();
    double s = c.arc - a.arc;
    if (s < 0.0)
        s += p;
    return s >= p ? 0.0 : s;
}

/// Point-in-polygon; points on the boundary count as interior.
inline bool contains(const SpillBoundary& b, Vec2 q)
{
    if (b.empty())
        return false;
    if (nearest_boundary_point(b, q).distance <= 1e-12)
        return true;
    const auto& v = b.vertices();
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        if ((v[i].y > q.y) != (v[j].y > q.y)) {
            const double xint = v[j].x + (q.y - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
            if (q.x < xint)
                inside = !inside;
        }
    }
    return inside;
}

/// Rigid translation by velocity*dt; rejects speeds above `speed_bound`.
inline SpillBoundary translate(const SpillBoundary& b, Vec2 velocity, double dt, double speed_bound)
{
    const double speed = velocity.norm();
    if (speed > speed_bound + 1e-15)
        throw SpeedBoundError(speed, speed_bound);
    if (speed == 0.0 || b.empty())
        return b;
    return b.shifted(velocity * dt);
}

// ---------------------------------------------------------------------------
// Swept-rectangle erosion

/// One straight sweep of a robot's cutting edge.
struct Sweep
{
    Vec2 from;
    Vec2 to;
};

struct ErosionResult
{
    SpillBoundary boundary;                ///< largest surviving component
    std::vector<SpillBoundary> components; ///< every surviving component, largest first
    bool topology_changed{false};          ///< region split into several pieces
    double removed_area{0.0};              ///< area lost by the tracked boundary
    double orphaned_area{0.0};             ///< area of split-off pieces no longer tracked
    std::size_t failed_sweeps{0};          ///< sweeps skipped because the overlay rejected them
};

/**
 * Corners of the coverage rectangle for a sweep: the segment plus `depth` to its left.
 * A positive `margin` widens it on the right and lengthens it backwards, which
 * covers the strip under the robot body between the path and the boundary.
 */
inline std::array<Vec2, 4> coverage_rectangle(Vec2 from, Vec2 to, double depth, double margin = 0.0)
{
    const Vec2 dir = (to - from).normalized();
    const Vec2 left = dir.perp();
    const Vec2 a = from - dir * margin - left * margin;
    const Vec2 b = to - left * margin;
    return {a, b, b + left * (depth + margin), a + left * (depth + margin)};
}

namespace detail {

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;

inline BgPolygon to_bg(std::span<const Vec2> ring)
{
    BgPolygon poly;
    auto& outer = poly.outer();
    outer.reserve(ring.size() + 1);
    for (const Vec2& p : ring)
        outer.emplace_back(p.x, p.y);
    if (!ring.empty())
        outer.emplace_back(ring.front().x, ring.front().y);
    return poly;
}

inline std::vector<Vec2> outer_ring(const BgPolygon& poly)
{
    std::vector<Vec2> ring;
    const auto& outer = poly.outer();
    ring.reserve(outer.size());
    for (const auto& p : outer)
        ring.emplace_back(p.x(), p.y());
    if (ring.size() >= 2 && ring.front() == ring.back())
        ring.pop_back();
    return ring;
}

} // namespace detail

/**
 * Removes the coverage rectangles of several sweeps from a spill.
 *
 * Each sweep removes the rectangle spanned by its segment and `depth` metres to
 * the left of travel. Holes are filled from the tracked boundary (the outer ring
 * of a component always lies within the original region), and if the region
 * splits, the largest piece stays tracked while the rest is reported.
 */
inline ErosionResult erode_swept_batch(const SpillBoundary& b, std::span<const Sweep> sweeps, double depth,
                                       double margin = 0.0)
{
    namespace bg = boost::geometry;
    ErosionResult result;
    result.boundary = b;
    if (b.empty())
        return result;
    if (!(depth > 0.0))
        throw GeometryError("erosion depth must be positive");

    const double before = b.area();
    detail::BgMulti region;
    region.push_back(detail::to_bg(b.vertices()));
    bool touched = false;
    for (const Sweep& s : sweeps) {
        if (distance(s.from, s.to) <= 0.0)
            continue;
        const auto rect = coverage_rectangle(s.from, s.to, depth, margin);
        const detail::BgPolygon cutter = detail::to_bg(rect);
        if (!bg::intersects(bg::return_envelope<bg::model::box<detail::BgPoint>>(cutter),
                            bg::return_envelope<bg::model::box<detail::BgPoint>>(region)))
            continue;
        try {
            detail::BgMulti next;
            bg::difference(region, cutter, next);
            region = std::move(next);
            touched = true;
        } catch (const bg::exception&) {
            ++result.failed_sweeps;
        }
        if (region.empty())
            break;
    }
    if (!touched)
        return result;

    std::vector<std::pair<double, std::vector<Vec2>>> pieces;
    for (const auto& poly : region) {
        std::vector<Vec2> ring = detail::outer_ring(poly);
        if (detail::signed_area(ring) < 0.0)
            std::reverse(ring.begin(), ring.end());
        ring = detail::resample(std::move(ring), b.resolution());
        const double a = detail::signed_area(ring);
        if (ring.size() >= 3 && a > 1e-14)
            pieces.emplace_back(a, std::move(ring));
    }
    std::stable_sort(pieces.begin(), pieces.end(), [](const auto& l, const auto& r) { return l.first > r.first; });

    if (pieces.empty()) {
        result.boundary = b.with_ring({});
        result.removed_area = before;
        return result;
    }
    // Rounding in the overlay must never make a spill grow.
    if (pieces.front().first > before)
        return result;

    for (auto& [a, ring] : pieces)
        result.components.push_back(b.with_ring(std::move(ring)));
    result.boundary = result.components.front();
    result.topology_changed = result.components.size() > 1;
    for (std::size_t i = 1; i < result.components.size(); ++i)
        result.orphaned_area += result.components[i].area();
    result.removed_area = before - result.boundary.area();
    return result;
}

/// Single-sweep erosion; see erode_swept_batch.
inline ErosionResult erode_swept(const SpillBoundary& b, Vec2 from, Vec2 to, double depth, double margin = 0.0)
{
    const Sweep s{from, to};
    return erode_swept_batch(b, std::span<const Sweep>(&s, 1), depth, margin);
}

// ---------------------------------------------------------------------------

struct Workspace
{
    Bounds bounds;
    std::vector<SpillBoundary> spills;
    Vec2 dock;

    /// Every violated placement constraint, one message each.
    std::vector<std::string> violations() const
    {
        namespace bg = boost::geometry;
        std::vector<std::string> out;
        if (!(bounds.xmax > bounds.xmin) || !(bounds.ymax > bounds.ymin))
            out.emplace_back("workspace bounds are empty");
        if (!bounds.contains(dock))
            out.emplace_back("dock lies outside the workspace bounds");
        for (std::size_t i = 0; i < spills.size(); ++i) {
            if (contains(spills[i], dock))
                out.push_back("dock lies inside spill " + std::to_string(i + 1) +
                              "; the dock cannot be inside a spill");
            for (const Vec2& p : spills[i].vertices())
                if (!bounds.contains(p)) {
                    out.push_back("spill " + std::to_string(i + 1) + " extends past the workspace bounds");
                    break;
                }
        }
        for (std::size_t i = 0; i < spills.size(); ++i)
            for (std::size_t j = i + 1; j < spills.size(); ++j) {
                if (spills[i].empty() || spills[j].empty())
                    continue;
                const auto a = detail::to_bg(spills[i].vertices());
                const auto c = detail::to_bg(spills[j].vertices());
                if (bg::intersects(a, c))
                    out.push_back("spills " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " overlap");
            }
        return out;
    }
};

} // namespace shrink
