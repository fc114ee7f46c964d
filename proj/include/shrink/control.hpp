#pragma once
/**
 * @file   control.hpp
 * @brief  Per-robot hybrid controller: potential-field searching, boundary
 *         acquisition, PD alignment and leader-following boundary tracking.
 */

#include "shrink/kinematics.hpp"
#include "shrink/sensing.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace shrink {

enum class RobotState { Rendezvous, Searching, Tracking };
enum class Mode { Normal, Idle };

inline std::string_view to_string(RobotState s)
{
    switch (s) {
    case RobotState::Rendezvous: return "rendezvous";
    case RobotState::Searching: return "searching";
    case RobotState::Tracking: return "tracking";
    }
    return "?";
}

/// Fig. 2 edges only.
inline bool legal_transition(RobotState from, RobotState to)
{
    if (from == to)
        return true;
    return (from == RobotState::Rendezvous && to == RobotState::Searching) ||
           (from == RobotState::Searching && to == RobotState::Tracking) ||
           (from == RobotState::Tracking && to == RobotState::Searching);
}

struct SearchFlags
{
    bool on_the_boundary{false};
    bool boundary_within_fov{false};
    bool tracking_enable{false};
    bool no_boundary_detected{false};
};

struct ControlGains
{
    double xi1{1.0};
    double xi2{0.01};
    double xi3{0.01};      ///< tracking attraction (1/s)
    double K_p{2.0};
    double K_d{0.1};
    double d0{1.0};        ///< repulsion range (m)
    double epsilon{0.01};  ///< goal dead zone (m)
    double alpha{0.5};     ///< idle-mode fraction of r_C
    double delta_l{0.009}; ///< lookahead offset (m)
    double k_u{0.01};      ///< searching speed gain (m/s)
    double k_w{2.0};       ///< searching heading gain (1/s)
    double rho_floor{1e-3}; ///< below this separation repulsion stops growing (m)

    void validate() const
    {
        if (!(xi1 > 0 && xi2 > 0 && xi3 > 0 && K_p > 0 && K_d >= 0 && d0 > 0 && epsilon > 0 && delta_l > 0 &&
              k_u > 0 && k_w > 0 && rho_floor > 0))
            throw std::invalid_argument("control gains must be positive");
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0, 1)");
    }
};

/// Defaults tied to the physical limits: xi3 = v_max/r_A, d0 = r_A, k_u = v_max, delta_l = h.
inline ControlGains default_gains(const ActuatorLimits& lim, const VisionConfig& vision, double robot_radius)
{
    ControlGains g;
    g.xi3 = lim.v_max() / vision.r_A;
    g.d0 = vision.r_A;
    g.epsilon = robot_radius;
    g.delta_l = lim.d / 10.0;
    g.k_u = lim.v_max();
    return g;
}

// ---------------------------------------------------------------------------
// Searching potential field

struct FieldSample
{
    double potential{0.0};
    Vec2 gradient;
    std::array<double, 3> hessian{}; ///< xx, xy, yy
};

namespace detail {

// g(rho) = xi2/2 (1/rho - 1/d0)^2 and its first two derivatives, linearly extended below rho_floor.
struct Radial
{
    double g, dg, ddg;
};

inline Radial repulsion_profile(double rho, const ControlGains& k)
{
    auto exact = [&](double r) {
        const double a = 1.0 / r - 1.0 / k.d0;
        return Radial{0.5 * k.xi2 * a * a, -k.xi2 * a / (r * r),
                      k.xi2 * (3.0 / (r * r * r * r) - 2.0 / (k.d0 * r * r * r))};
    };
    if (rho >= k.rho_floor)
        return exact(rho);
    const Radial f = exact(k.rho_floor);
    return {f.g + f.dg * (rho - k.rho_floor), f.dg, 0.0};
}

} // namespace detail

/// U* = xi1/2 |q-g|^2 + sum over repulsors within d0 of xi2/2 (1/rho - 1/d0)^2, with analytic derivatives.
inline FieldSample searching_field(Vec2 q, Vec2 goal, std::span<const Vec2> repulsors, const ControlGains& k)
{
    FieldSample f;
    const Vec2 dq = q - goal;
    f.potential = 0.5 * k.xi1 * dq.squared_norm();
    f.gradient = dq * k.xi1;
    f.hessian = {k.xi1, 0.0, k.xi1};
    for (const Vec2& p : repulsors) {
        const Vec2 r = q - p;
        const double rho = r.norm();
        if (rho > k.d0 || rho == 0.0)
            continue;
        const auto g = detail::repulsion_profile(rho, k);
        f.potential += g.g;
        const Vec2 u = r / rho;
        f.gradient += u * g.dg;
        const double t = g.dg / rho;
        f.hessian[0] += g.ddg * u.x * u.x + t * (1.0 - u.x * u.x);
        f.hessian[1] += g.ddg * u.x * u.y - t * u.x * u.y;
        f.hessian[2] += g.ddg * u.y * u.y + t * (1.0 - u.y * u.y);
    }
    return f;
}

/**
 * Steering toward the descent direction of the field.
 *
 * u = k_u tanh(|g - q|^2); w = -k_w (theta - phi_dir) + d(phi_dir)/dt with
 * phi_dir the heading of -grad U and its rate taken along the current motion.
 * The rate uses the linear speed after `speed_limit`, i.e. the motion that is
 * actually realized.
 */
inline VelocityCommand searching_command(const Pose& pose, Vec2 goal, const FieldSample& field, const ControlGains& k,
                                         double speed_limit = std::numeric_limits<double>::infinity())
{
    const Vec2 q = pose.position();
    const double dist = distance(q, goal);
    if (dist < k.epsilon)
        return {};
    const double u = k.k_u * std::tanh(dist * dist);
    Vec2 G = -field.gradient;
    std::array<double, 3> H = field.hessian;
    if (G.norm() < 1e-9) {
        G = (goal - q) * k.xi1;
        H = {k.xi1, 0.0, k.xi1};
    }
    const double phi_dir = G.angle();
    const Vec2 qdot = Vec2::from_angle(pose.theta) * std::min(u, speed_limit);
    const Vec2 dG{-(H[0] * qdot.x + H[1] * qdot.y), -(H[1] * qdot.x + H[2] * qdot.y)};
    const double phi_rate = cross(G, dG) / G.squared_norm();
    const double w = -k.k_w * wrap_angle(pose.theta - phi_dir) + phi_rate;
    return {u, w};
}

// ---------------------------------------------------------------------------
// Angular alignment and tracking

/// Discrete PD on theta_e = heading - boundary direction; zero inside the FOT.
inline double angular_pd(double theta_e, double theta_e_prev, Sector sector, const ControlGains& k,
                         const ActuatorLimits& lim)
{
    if (sector == Sector::FOT || sector == Sector::Outside)
        return 0.0;
    const double w = -k.K_p * theta_e - (k.K_d / lim.T_c) * wrap_angle(theta_e - theta_e_prev);
    const double wmax = lim.omega_max();
    return std::clamp(w, -wmax, wmax);
}

/// Body-frame velocity (vx, vy) seen with heading offset vartheta, mapped to (u, w) through the offset point delta_l.
inline VelocityCommand velocity_to_unicycle(double vx, double vy, double vartheta, double delta_l)
{
    if (!(delta_l > 0.0))
        throw std::invalid_argument("lookahead offset must be positive");
    const double c = std::cos(vartheta), s = std::sin(vartheta);
    return {vx * c + vy * s, (-vx * s + vy * c) / delta_l};
}

/// Speed min(xi3 l*, v_max) along the boundary; vartheta = heading minus boundary direction.
inline VelocityCommand tracking_command(double l_star, double vartheta, const ControlGains& k,
                                        const ActuatorLimits& lim)
{
    const double speed = std::min(k.xi3 * l_star, lim.v_max());
    return velocity_to_unicycle(speed, 0.0, vartheta, k.delta_l);
}

/// Idle iff within alpha*r_C (inclusive) of a static rendezvous robot that still has children.
inline Mode mode_select(Vec2 q, std::span<const Vec2> roots_with_children, double alpha, double r_C)
{
    for (const Vec2& p : roots_with_children)
        if (distance(q, p) <= alpha * r_C)
            return Mode::Idle;
    return Mode::Normal;
}

/// Goal on a moving boundary sighted at range delta and bearing phi.
inline Vec2 dynamic_goal(const Pose& pose, double phi, double delta)
{
    return {pose.x + delta * std::cos(phi + pose.theta), pose.y + delta * std::sin(phi + pose.theta)};
}

/// Largest spill speed that keeps the boundary inside the FOV between two control ticks.
inline double max_spill_speed(double phi, double vartheta, double r_A, double T_c)
{
    return std::min((phi - vartheta) * r_A / T_c, (phi + vartheta) * r_A / T_c);
}

// ---------------------------------------------------------------------------
// Robot controller state

struct Robot
{
    int id{0}; ///< 1-based
    Pose pose;
    VelocityCommand cmd;
    RobotState state{RobotState::Rendezvous};
    Mode mode{Mode::Normal};
    SearchFlags flags;

    int spill{-1};              ///< spill being tracked, -1 if none
    double scanned{0.0};        ///< accumulated in-place scan angle (rad)
    double theta_e_prev{0.0};
    double last_track_u{0.0};
    bool in_fot{false};         ///< tracked with the boundary in the FOT this tick
    std::optional<Vec2> memory_goal;

    // rendezvous bookkeeping
    int root{-1};   ///< rendezvous point (robot index), -1 if unassigned
    int parent{-1}; ///< current parent (robot index), -1 for roots
    bool stranded{false};

    // searching deadlock guard
    std::optional<Vec2> last_dir;
    int conflict_ticks{0};
    int backoff{0};

    double distance{0.0};
};

struct StepResult
{
    VelocityCommand cmd;
    std::optional<RobotState> next;
};

struct SearchPerception
{
    BoundaryObservation fov;   ///< closest boundary point inside the FOV
    BoundaryObservation omni;  ///< closest boundary point over a full scan
    std::span<const Vec2> repulsors;
};

/// One Algorithm-1 scan step: CCW rotation by phi_temp, or the terminal flag after a full turn.
inline VelocityCommand search_init(Robot& r, const BoundaryObservation& omni, const ActuatorLimits& lim)
{
    if (omni.visible) {
        r.flags.no_boundary_detected = false;
        r.flags.on_the_boundary = omni.on_boundary;
        r.flags.boundary_within_fov = !omni.on_boundary;
        r.scanned = 0.0;
        return {};
    }
    if (r.scanned >= 2.0 * kPi - 1e-12) {
        r.flags.no_boundary_detected = true;
        return {};
    }
    r.scanned += lim.omega_max() * lim.T_c;
    return {0.0, lim.omega_max()};
}

namespace detail {

inline bool update_deadlock(Robot& r, Vec2 dir, std::mt19937_64& rng)
{
    constexpr int kConflictTicks = 10;
    if (r.last_dir && dot(*r.last_dir, dir) < -0.9)
        ++r.conflict_ticks;
    else
        r.conflict_ticks = 0;
    r.last_dir = dir;
    if (r.conflict_ticks >= kConflictTicks) {
        r.conflict_ticks = 0;
        r.backoff = std::uniform_int_distribution<int>(1, 5)(rng);
        return true;
    }
    return false;
}

inline VelocityCommand navigate(Robot& r, Vec2 goal, std::span<const Vec2> repulsors, const ControlGains& k,
                                const ActuatorLimits& lim, std::mt19937_64& rng)
{
    const FieldSample f = searching_field(r.pose.position(), goal, repulsors, k);
    VelocityCommand c = searching_command(r.pose, goal, f, k, lim.v_max());
    const Vec2 dir = (-f.gradient).normalized();
    if (dir.squared_norm() > 0.0 && update_deadlock(r, dir, rng))
        return {};
    return c;
}

} // namespace detail

/**
 * One tick of boundary searching.
 *
 * Arrival at the boundary leads to alignment: a CCW rotation step when the
 * spill is on the right, PD toward the CCW boundary direction when it is on
 * the left, and the switch to tracking once that direction is in the FOT.
 * Away from the boundary the robot descends the potential field toward the
 * nearest boundary point, or scans in place when nothing is in view.
 */
inline StepResult search_step(Robot& r, const SearchPerception& p, const ControlGains& k, const VisionConfig& vision,
                              const ActuatorLimits& lim, std::mt19937_64& rng)
{
    const BoundaryObservation& o = p.omni;
    const double w_temp = lim.omega_max();
    if (r.backoff > 0) {
        --r.backoff;
        return {};
    }
    if (r.flags.no_boundary_detected) {
        if (!o.visible)
            return {};
        r.flags.no_boundary_detected = false;
        r.scanned = 0.0;
    }

    // Once arrived, a robot stays arrived within 2 epsilon while it turns, since nearby sweeps move the edge.
    const bool arrived = o.visible && (o.on_boundary || o.distance < k.epsilon ||
                                       (r.flags.on_the_boundary && o.distance < 2.0 * k.epsilon));
    if (arrived) {
        r.flags.on_the_boundary = true;
        r.scanned = 0.0;
        r.memory_goal.reset();
        const Sector s = classify_sector(o.tangent_bearing, vision);
        if (o.spill_side == Side::Left && s == Sector::FOT) {
            r.flags.tracking_enable = true;
            r.theta_e_prev = -o.tangent_bearing;
            return {{}, RobotState::Tracking};
        }
        if (o.spill_side == Side::Right) {
            r.flags.boundary_within_fov = false;
            return {{0.0, w_temp}};
        }
        // Spill on the left: turn toward the boundary direction even if it sits just outside the FOV.
        const double theta_e = -o.tangent_bearing;
        const Sector turn = o.tangent_bearing > 0.0 ? Sector::LeftFOV : Sector::RightFOV;
        const double w = angular_pd(theta_e, r.theta_e_prev, turn, k, lim);
        r.theta_e_prev = theta_e;
        return {{0.0, w}};
    }
    r.flags.on_the_boundary = false;

    if (o.visible && (p.fov.visible || r.flags.boundary_within_fov)) {
        r.flags.boundary_within_fov = true;
        r.scanned = 0.0;
        r.memory_goal.reset();
        return {detail::navigate(r, o.nearest_point, p.repulsors, k, lim, rng)};
    }
    if (!o.visible && r.memory_goal) {
        if (distance(r.pose.position(), *r.memory_goal) >= k.epsilon)
            return {detail::navigate(r, *r.memory_goal, p.repulsors, k, lim, rng)};
        r.memory_goal.reset();
        r.scanned = 0.0;
    }
    return {search_init(r, o, lim)};
}

/// One tick of Algorithm 3 for a robot tracking its spill. The boundary counts as lost once it is out of
/// the FOV or farther than the operation range d.
inline StepResult track_step(Robot& r, const BoundaryObservation& o, double l_star,
                             std::span<const Vec2> roots_with_children, double r_C, const ControlGains& k,
                             const VisionConfig& vision, const ActuatorLimits& lim)
{
    r.in_fot = false;
    if (!o.visible || o.distance > lim.d)
        return {{}, RobotState::Searching};
    const Sector s = classify_sector(o.tangent_bearing, vision);
    const double theta_e = -o.tangent_bearing;
    if (s == Sector::FOT) {
        VelocityCommand c = tracking_command(l_star, theta_e, k, lim);
        r.mode = mode_select(r.pose.position(), roots_with_children, k.alpha, r_C);
        r.in_fot = true;
        r.theta_e_prev = theta_e;
        r.last_track_u = c.u;
        return {c};
    }
    if (s == Sector::Outside)
        return {{}, RobotState::Searching};
    const double w = angular_pd(theta_e, r.theta_e_prev, s, k, lim);
    r.theta_e_prev = theta_e;
    r.last_track_u = std::max(0.0, r.last_track_u - lim.a_max * lim.T_c);
    return {{r.last_track_u, w}};
}

} // namespace shrink
