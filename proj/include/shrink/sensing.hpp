#pragma once
/**
 * @file   sensing.hpp
 * @brief  Geometric stand-in for the vision pipeline: boundary visibility,
 *         FOV/FOT sectors and the leader arc distance.
 */

#include "shrink/geometry.hpp"
#include "shrink/kinematics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace shrink {

struct VisionConfig
{
    double r_A{1.0};          ///< vision range (m)
    double phi{kPi / 4};      ///< FOV half-angle (rad)
    double eps_phi{kPi / 36}; ///< FOT half-angle (rad)
    double snap_tol{0.009};   ///< on-boundary threshold (m)
    double lookahead{0.009};  ///< arc offset used to read the boundary direction (m)

    void validate() const
    {
        if (!(r_A > 0.0))
            throw std::invalid_argument("vision range must be positive");
        if (!(eps_phi > 0.0 && eps_phi < phi && phi <= kPi))
            throw std::invalid_argument("need 0 < eps_phi < phi <= pi");
        if (!(snap_tol > 0.0) || !(lookahead > 0.0))
            throw std::invalid_argument("snap tolerance and lookahead must be positive");
    }
};

enum class Side { Left, Right };
enum class Sector { FOT, LeftFOV, RightFOV, Outside };

struct BoundaryObservation
{
    bool visible{false};
    double bearing{0.0};         ///< to the closest visible point, relative to heading
    Vec2 nearest_point;          ///< closest visible boundary point
    double distance{std::numeric_limits<double>::infinity()};
    bool on_boundary{false};
    Side spill_side{Side::Left};
    double tangent_bearing{0.0}; ///< boundary travel direction relative to heading
    double theta_d{0.0};         ///< boundary travel direction, world frame
    double back_bearing{0.0};    ///< reverse travel direction relative to heading
    double arc{0.0};             ///< arc coordinate of nearest_point (engine bookkeeping)
};

struct LeaderObservation
{
    std::optional<int> leader_id;
    double l_star{0.0};
};

/// FOT iff |bearing| <= eps_phi; FOV edges are inclusive.
inline Sector classify_sector(double bearing, const VisionConfig& v)
{
    const double b = wrap_angle(bearing);
    if (std::abs(b) <= v.eps_phi)
        return Sector::FOT;
    if (std::abs(b) <= v.phi)
        return b > 0.0 ? Sector::LeftFOV : Sector::RightFOV;
    return Sector::Outside;
}

namespace detail {

// Restricts t in [lo, hi] to where cross(dir, a + t*e - q) * sign >= 0.
inline bool clip_halfplane(Vec2 q, Vec2 dir, double sign, Vec2 a, Vec2 e, double& lo, double& hi)
{
    const double c0 = sign * cross(dir, a - q);
    const double c1 = sign * cross(dir, e);
    constexpr double kTol = 1e-15;
    if (std::abs(c1) < kTol)
        return c0 >= -kTol;
    const double t = -c0 / c1;
    if (c1 > 0.0)
        lo = std::max(lo, t);
    else
        hi = std::min(hi, t);
    return lo <= hi;
}

// Closest point of segment a + t*e, t in [lo, hi], to q.
inline double closest_on_interval(Vec2 q, Vec2 a, Vec2 e, double lo, double hi)
{
    const double len2 = e.squared_norm();
    const double t = len2 > 0.0 ? dot(q - a, e) / len2 : lo;
    return std::clamp(t, lo, hi);
}

struct VisiblePoint
{
    Vec2 point;
    double distance{std::numeric_limits<double>::infinity()};
    std::size_t edge{0};
    double t{0.0};
};

// Closest boundary point inside the disc of radius r and the cone [heading-phi, heading+phi].
inline VisiblePoint closest_visible(const SpillBoundary& b, Vec2 q, double heading, double phi, double r)
{
    VisiblePoint best;
    const auto& v = b.vertices();
    const std::size_t n = v.size();
    // A cone wider than pi is not convex; split it into two halves of width phi each.
    struct Cone { double right; double left; };
    std::array<Cone, 2> cones{};
    std::size_t ncones = 0;
    const bool full = phi >= kPi;
    if (!full) {
        if (phi <= kPi / 2)
            cones[ncones++] = {heading - phi, heading + phi};
        else {
            cones[ncones++] = {heading - phi, heading};
            cones[ncones++] = {heading, heading + phi};
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i];
        const Vec2 e = v[(i + 1) % n] - a;
        auto consider = [&](double lo, double hi) {
            const double t = closest_on_interval(q, a, e, lo, hi);
            const Vec2 p = a + e * t;
            const double dd = distance(p, q);
            if (dd <= r && dd < best.distance - 1e-12) {
                best = {p, dd, i, t};
            }
        };
        if (full) {
            consider(0.0, 1.0);
            continue;
        }
        for (std::size_t c = 0; c < ncones; ++c) {
            double lo = 0.0, hi = 1.0;
            const Vec2 right = Vec2::from_angle(cones[c].right);
            const Vec2 left = Vec2::from_angle(cones[c].left);
            // Inside the cone: left of the right ray and right of the left ray.
            if (!clip_halfplane(q, right, 1.0, a, e, lo, hi))
                continue;
            if (!clip_halfplane(q, left, -1.0, a, e, lo, hi))
                continue;
            consider(lo, hi);
        }
    }
    return best;
}

} // namespace detail

/**
 * Observes one spill from a pose.
 *
 * The boundary direction is read from a point `lookahead` metres further along
 * the boundary (CCW) than the closest visible point; the reverse direction
 * uses the point the same distance behind. Spill side is decided by the
 * sensed boundary direction.
 */
inline BoundaryObservation observe_boundary(const Pose& pose, const VisionConfig& vision, const SpillBoundary& spill)
{
    BoundaryObservation obs;
    if (spill.empty())
        return obs;
    const Vec2 q = pose.position();
    const auto vp = detail::closest_visible(spill, q, pose.theta, vision.phi, vision.r_A);
    if (!std::isfinite(vp.distance))
        return obs;
    const auto& v = spill.vertices();
    const std::size_t n = v.size();
    const Vec2 e = v[(vp.edge + 1) % n] - v[vp.edge];

    obs.visible = true;
    obs.nearest_point = vp.point;
    obs.distance = vp.distance;
    obs.on_boundary = vp.distance <= vision.snap_tol;
    obs.bearing = vp.distance > 0.0 ? wrap_angle((vp.point - q).angle() - pose.theta) : 0.0;
    obs.arc = spill.arc_at_vertex(vp.edge) + e.norm() * vp.t;

    const Vec2 ahead = spill.point_at_arc(obs.arc + vision.lookahead);
    const Vec2 behind = spill.point_at_arc(obs.arc - vision.lookahead);
    const Vec2 fwd = ahead - q;
    const Vec2 back = behind - q;
    obs.theta_d = fwd.squared_norm() > 0.0 ? fwd.angle() : e.angle();
    obs.tangent_bearing = wrap_angle(obs.theta_d - pose.theta);
    obs.back_bearing = wrap_angle((back.squared_norm() > 0.0 ? back.angle() : (-e).angle()) - pose.theta);

    // The interior lies left of the CCW boundary direction, so it is on the left of the
    // heading whenever the heading has a forward component along that direction.
    obs.spill_side = std::cos(obs.tangent_bearing) >= 0.0 ? Side::Left : Side::Right;
    return obs;
}

/// Boundary counts as in view for a searching robot if either travel direction is inside the FOV.
inline bool in_fov_searching(const BoundaryObservation& o, const VisionConfig& v)
{
    return o.visible && (classify_sector(o.tangent_bearing, v) != Sector::Outside ||
                         classify_sector(o.back_bearing, v) != Sector::Outside);
}

/// Virtual distance from arc coordinates; `s_leader` absent means no leader identified.
inline double virtual_distance(double s_i, std::optional<double> s_leader, double perimeter, double r_A)
{
    if (!s_leader)
        return r_A;
    double l = *s_leader - s_i;
    if (l < 0.0)
        l += perimeter;
    if (l >= perimeter)
        l -= perimeter;
    return std::clamp(l, 0.0, r_A);
}

/// l* toward a leader on the same spill. q_i must lie within snap_tol of the boundary.
inline LeaderObservation leader_arc_distance(const SpillBoundary& spill, Vec2 q_i, std::optional<Vec2> q_leader,
                                             const VisionConfig& vision, std::optional<int> leader_id = std::nullopt)
{
    const BoundaryPoint own = nearest_boundary_point(spill, q_i);
    if (spill.empty() || own.distance > vision.snap_tol)
        throw OffBoundaryError('A', own.distance);
    LeaderObservation out;
    if (!q_leader) {
        out.l_star = vision.r_A;
        return out;
    }
    const BoundaryPoint lead = nearest_boundary_point(spill, *q_leader);
    out.leader_id = leader_id;
    out.l_star = virtual_distance(own.arc, lead.arc, spill.perimeter(), vision.r_A);
    return out;
}

} // namespace shrink
