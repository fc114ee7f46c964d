#pragma once
/**
 * @file   kinematics.hpp
 * @brief  Unicycle integration, differential-drive wheel transform and command limits.
 */

#include "shrink/vec2.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shrink {

struct Pose
{
    double x{0.0};
    double y{0.0};
    double theta{0.0};

    Vec2 position() const { return {x, y}; }
    bool operator==(const Pose&) const = default;
};

struct VelocityCommand
{
    double u{0.0}; ///< linear speed (m/s)
    double w{0.0}; ///< angular rate (rad/s)
    bool operator==(const VelocityCommand&) const = default;
};

struct ActuatorLimits
{
    double V{9e-4};     ///< processing capacity (m^2/s)
    double d{0.09};     ///< operation range (m)
    double a_max{0.1};  ///< linear acceleration bound (m/s^2)
    double L{0.05};     ///< tread width (m)
    double T_c{0.033};  ///< control period (s)
    double phi{kPi / 4}; ///< FOV half-angle (rad)

    double v_max() const { return V / d; }
    double omega_max() const { return 2.0 * phi / T_c; }

    void validate() const
    {
        if (!(V > 0.0 && d > 0.0 && a_max > 0.0 && L > 0.0 && T_c > 0.0 && phi > 0.0))
            throw std::invalid_argument("actuator limits must be strictly positive");
    }
};

/// Explicit Euler step of the unicycle model.
inline Pose step_unicycle(const Pose& p, const VelocityCommand& c, double T_c)
{
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.theta) || !std::isfinite(c.u) ||
        !std::isfinite(c.w) || !std::isfinite(T_c))
        throw std::invalid_argument("step_unicycle: non-finite input");
    return {p.x + c.u * std::cos(p.theta) * T_c, p.y + c.u * std::sin(p.theta) * T_c,
            wrap_angle(p.theta + c.w * T_c)};
}

struct WheelSpeeds
{
    double right{0.0};
    double left{0.0};
};

inline WheelSpeeds wheel_speeds(const VelocityCommand& c, double L)
{
    if (!(L > 0.0))
        throw std::invalid_argument("tread width must be positive");
    return {c.u + c.w * L / 2.0, c.u - c.w * L / 2.0};
}

inline VelocityCommand body_velocity(const WheelSpeeds& s, double L)
{
    if (!(L > 0.0))
        throw std::invalid_argument("tread width must be positive");
    return {(s.right + s.left) / 2.0, (s.right - s.left) / L};
}

/**
 * Applies the speed, acceleration and angular-rate limits.
 *
 * Each channel is clamped in magnitude only, so the sign of u and of w is kept.
 * The acceleration band is centred on the previous linear speed.
 */
inline VelocityCommand clamp_command(const VelocityCommand& c, const VelocityCommand& prev, const ActuatorLimits& lim)
{
    const double vmax = lim.v_max();
    const double dv = lim.a_max * lim.T_c;
    double u = std::clamp(c.u, -vmax, vmax);
    u = std::clamp(u, prev.u - dv, prev.u + dv);
    u = std::clamp(u, -vmax, vmax);
    const double wmax = lim.omega_max();
    const double w = std::clamp(c.w, -wmax, wmax);
    return {u, w};
}

} // namespace shrink
