#include "shrink/kinematics.hpp"
#include "shrink/sensing.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace shrink;

TEST(Unicycle, RestLeavesPoseUnchanged)
{
    const Pose p{0.3, -0.2, 1.1};
    const Pose q = step_unicycle(p, {}, 0.1);
    EXPECT_EQ(q.x, p.x);
    EXPECT_EQ(q.y, p.y);
    EXPECT_EQ(q.theta, p.theta);
}

TEST(Unicycle, StraightAndTurn)
{
    const Pose a = step_unicycle({0, 0, 0}, {0.01, 0.0}, 0.1);
    EXPECT_NEAR(a.x, 0.001, 1e-15);
    EXPECT_EQ(a.y, 0.0);
    const Pose b = step_unicycle({0, 0, 0}, {0.0, 1.0}, 0.1);
    EXPECT_NEAR(b.theta, 0.1, 1e-15);
}

TEST(Unicycle, HeadingStaysWrapped)
{
    const Pose p = step_unicycle({0, 0, kPi - 0.01}, {0.0, 1.0}, 0.1);
    EXPECT_GT(p.theta, -kPi);
    EXPECT_LE(p.theta, kPi);
    EXPECT_NEAR(p.theta, -kPi + 0.09, 1e-12);
}

TEST(Unicycle, RejectsNonFinite)
{
    EXPECT_THROW(step_unicycle({0, 0, 0}, {std::nan(""), 0.0}, 0.1), std::invalid_argument);
}

TEST(Wheels, Transform)
{
    const auto s = wheel_speeds({0.2, 0.0}, 0.05);
    EXPECT_EQ(s.right, 0.2);
    EXPECT_EQ(s.left, 0.2);
    const auto t = wheel_speeds({0.0, 2.0 / 0.05}, 0.05);
    EXPECT_NEAR(t.right, 1.0, 1e-15);
    EXPECT_NEAR(t.left, -1.0, 1e-15);
}

TEST(Wheels, RoundTrip)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const VelocityCommand c{u(rng), 10 * u(rng)};
        const auto back = body_velocity(wheel_speeds(c, 0.05), 0.05);
        EXPECT_NEAR(back.u, c.u, 1e-12);
        EXPECT_NEAR(back.w, c.w, 1e-12);
    }
}

TEST(Limits, DerivedBounds)
{
    ActuatorLimits lim;
    lim.T_c = 0.1;
    EXPECT_NEAR(lim.v_max(), 0.01, 1e-15);
    EXPECT_NEAR(lim.omega_max(), 15.708, 1e-3);
    const auto c = clamp_command({0.05, 20.0}, {0.01, 0.0}, lim);
    EXPECT_NEAR(c.u, 0.01, 1e-15);
    EXPECT_NEAR(c.w, lim.omega_max(), 1e-12);
}

TEST(Limits, InteriorCommandUnchanged)
{
    ActuatorLimits lim;
    lim.T_c = 0.1;
    const VelocityCommand c{0.005, 1.0};
    EXPECT_EQ(clamp_command(c, {0.005, 0.0}, lim), c);
}

TEST(Limits, AccelerationBand)
{
    ActuatorLimits lim;
    lim.T_c = 0.1;
    lim.a_max = 0.01;
    const auto c = clamp_command({0.01, 0.0}, {0.0, 0.0}, lim);
    EXPECT_NEAR(c.u, 0.001, 1e-15);
    const auto r = clamp_command({-0.01, -1.0}, {0.0, 0.0}, lim);
    EXPECT_NEAR(r.u, -0.001, 1e-15);
    EXPECT_EQ(r.w, -1.0);
}

TEST(Limits, Validation)
{
    ActuatorLimits lim;
    lim.d = 0.0;
    EXPECT_THROW(lim.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------

namespace {

VisionConfig vision()
{
    VisionConfig v;
    v.r_A = 0.3;
    return v;
}

// Interior is left of the heading iff a point just left of the robot lies inside the spill.
Side probe_side(const SpillBoundary& b, const Pose& p)
{
    const Vec2 probe = p.position() + Vec2::from_angle(p.theta + kPi / 2) * 1e-3;
    return contains(b, probe) ? Side::Left : Side::Right;
}

} // namespace

TEST(Sector, Classification)
{
    const auto v = vision();
    EXPECT_EQ(classify_sector(0.0, v), Sector::FOT);
    EXPECT_EQ(classify_sector(v.eps_phi, v), Sector::FOT);
    EXPECT_EQ(classify_sector(v.phi, v), Sector::LeftFOV);
    EXPECT_EQ(classify_sector(-v.phi, v), Sector::RightFOV);
    EXPECT_EQ(classify_sector(kPi, v), Sector::Outside);
}

TEST(Observe, OutOfRange)
{
    const auto c = make_circle({0, 0}, 0.1, 0.009);
    const auto o = observe_boundary({0.1 + 0.6, 0.0, kPi}, vision(), c);
    EXPECT_FALSE(o.visible);
}

TEST(Observe, AlignedOnBoundary)
{
    const auto c = make_circle({0, 0}, 0.1, 0.009);
    const Pose p{0.1, 0.0, kPi / 2};
    const auto o = observe_boundary(p, vision(), c);
    ASSERT_TRUE(o.visible);
    EXPECT_TRUE(o.on_boundary);
    EXPECT_EQ(classify_sector(o.tangent_bearing, vision()), Sector::FOT);
    EXPECT_EQ(o.spill_side, Side::Left);
    EXPECT_EQ(probe_side(c, p), Side::Left);
}

TEST(Observe, ReversedOnBoundary)
{
    const auto c = make_circle({0, 0}, 0.1, 0.009);
    const Pose p{0.1, 0.0, -kPi / 2};
    const auto o = observe_boundary(p, vision(), c);
    ASSERT_TRUE(o.visible);
    EXPECT_EQ(o.spill_side, Side::Right);
    EXPECT_EQ(probe_side(c, p), Side::Right);
}

TEST(Observe, SpillSideAgreesWithProbe)
{
    const auto b = make_ellipse({0, 0}, 0.3, 0.15, 0.3, 0.009);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_int_distribution<std::size_t> pick(0, b.size() - 1);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const Vec2 v = b.vertices()[pick(rng)];
        const Pose p{v.x, v.y, ang(rng)};
        const auto o = observe_boundary(p, vision(), b);
        // skip headings nearly perpendicular to the boundary, where the probe is ambiguous
        if (!o.visible || std::abs(std::cos(o.tangent_bearing)) < 0.2)
            continue;
        EXPECT_EQ(o.spill_side, probe_side(b, p)) << "heading " << p.theta;
        ++checked;
    }
    EXPECT_GT(checked, 200);
}

TEST(Observe, FovHidesBoundaryBehind)
{
    const auto c = make_circle({0, 0}, 0.1, 0.009);
    const auto ahead = observe_boundary({0.2, 0.0, kPi}, vision(), c);
    const auto behind = observe_boundary({0.2, 0.0, 0.0}, vision(), c);
    EXPECT_TRUE(ahead.visible);
    EXPECT_NEAR(ahead.distance, 0.1, 1e-3);
    EXPECT_FALSE(behind.visible);
}

TEST(LeaderDistance, WrapAround)
{
    EXPECT_NEAR(virtual_distance(0.5, 0.1, 0.6283, 1.0), 0.2283, 1e-12);
    EXPECT_EQ(virtual_distance(0.0, 2.0, 10.0, 1.0), 1.0);
    EXPECT_EQ(virtual_distance(0.3, 0.3, 1.0, 1.0), 0.0);
    EXPECT_EQ(virtual_distance(0.3, std::nullopt, 1.0, 0.13), 0.13);
}

TEST(LeaderDistance, FromPositions)
{
    const auto c = make_circle({0, 0}, 0.1, 0.001);
    auto v = vision();
    v.r_A = 1.0;
    const auto o = leader_arc_distance(c, {0.1, 0.0}, Vec2{0.0, 0.1}, v, 7);
    EXPECT_NEAR(o.l_star, 0.1 * kPi / 2, 0.1 * kPi / 2 * 0.01);
    EXPECT_EQ(o.leader_id, 7);
    EXPECT_EQ(leader_arc_distance(c, {0.1, 0.0}, std::nullopt, v).l_star, 1.0);
    EXPECT_THROW(leader_arc_distance(c, {0.5, 0.0}, std::nullopt, v), OffBoundaryError);
}
