#pragma once
/**
 * @file   engine.hpp
 * @brief  Discrete-time simulation loop.
 *
 * Each tick: sense over a snapshot, dispatch controllers by state, apply the
 * collision guard and limits, integrate, erode along realized motion, move
 * dynamic spills, commit transitions and append a metrics record.
 */

#include "shrink/control.hpp"
#include "shrink/geometry.hpp"
#include "shrink/kinematics.hpp"
#include "shrink/metrics.hpp"
#include "shrink/rendezvous.hpp"
#include "shrink/scenario.hpp"
#include "shrink/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace shrink {

struct Observation
{
    BoundaryObservation obs;
    int spill{-1};
};

struct TransitionEvent
{
    int iteration;
    int robot; ///< 1-based id
    RobotState from;
    RobotState to;
};

/// Per-tick quantities used by invariant checks.
struct TickStats
{
    double min_pair_distance{std::numeric_limits<double>::infinity()};
    double max_u{0.0};
    double max_w{0.0};
    double max_accel{0.0};
    int overlaps_reverted{0};
};

struct SpillSummary
{
    double initial_area{0.0};
    double residual_area{0.0};
    double orphaned_area{0.0};
    double completeness{0.0};
    int allocated{0};
    std::vector<int> rendezvous_ids; ///< 1-based
    std::optional<int> k_stop;
};

struct RunSummary
{
    std::vector<SpillSummary> spills;
    double d_sum{0.0};
    int iterations{0};
    int stranded{0};
    int overlap_events{0};
    int topology_events{0};
    bool complete{false};

    std::optional<int> max_k_stop() const
    {
        std::optional<int> m;
        for (const auto& s : spills) {
            if (!s.k_stop)
                return std::nullopt;
            m = std::max(m.value_or(0), *s.k_stop);
        }
        return m;
    }
};

class Simulation
{
public:
    explicit Simulation(ScenarioConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed)
    {
        lim_ = cfg_.limits;
        lim_.phi = cfg_.vision.phi;
        vision_ = cfg_.vision;
        vision_.r_A = cfg_.r_A;
        omni_ = vision_;
        omni_.phi = kPi;
        spills_ = build_spills(cfg_);
        for (std::size_t s = 0; s < spills_.size(); ++s) {
            velocity_.push_back(cfg_.spills[s].velocity);
            centroid_.push_back(centroid(spills_[s]));
        }
        orphaned_.assign(spills_.size(), 0.0);
        k_stop_.assign(spills_.size(), std::nullopt);
        place_robots();
        elect();
        record();
    }

    const ScenarioConfig& config() const { return cfg_; }
    const ActuatorLimits& limits() const { return lim_; }
    const VisionConfig& vision() const { return vision_; }
    int iteration() const { return k_; }
    const std::vector<Robot>& robots() const { return robots_; }
    const std::vector<SpillBoundary>& spills() const { return spills_; }
    const std::vector<MetricsRecord>& trace() const { return trace_; }
    const std::vector<TransitionEvent>& transitions() const { return transitions_; }
    const std::vector<std::string>& events() const { return events_; }
    const TickStats& last_stats() const { return stats_; }
    const Assignment& assignment() const { return assignment_; }
    const std::vector<RendezvousTree>& trees() const { return trees_; }
    const std::vector<int>& allocation() const { return allocation_; }
    std::vector<int> rendezvous_points() const { return assignment_.roots; }
    double orphaned_area(std::size_t s) const { return orphaned_.at(s); }

    /// Spill whose boundary a robot saw at election, if any (index-aligned with robots()).
    const std::vector<int>& sighting_spill() const { return sighting_spill_; }

    bool spill_done(std::size_t s) const
    {
        return spills_[s].area() <= cfg_.a_min_fraction * spills_[s].initial_area();
    }
    bool done() const
    {
        for (std::size_t s = 0; s < spills_.size(); ++s)
            if (!spill_done(s))
                return false;
        return true;
    }

    /// Runs until every spill is done or k_max; `on_tick` sees the state after each tick.
    RunSummary run(const std::function<void(const Simulation&)>& on_tick = {})
    {
        while (!done() && k_ < cfg_.k_max) {
            tick();
            if (on_tick)
                on_tick(*this);
        }
        return summary();
    }

    RunSummary summary() const
    {
        RunSummary s;
        for (std::size_t i = 0; i < spills_.size(); ++i) {
            SpillSummary ss;
            ss.initial_area = spills_[i].initial_area();
            ss.residual_area = spills_[i].area();
            ss.orphaned_area = orphaned_[i];
            ss.completeness = completeness(ss.residual_area, ss.initial_area);
            ss.k_stop = k_stop_[i];
            for (std::size_t r = 0; r < robots_.size(); ++r)
                if (allocation_[r] == static_cast<int>(i))
                    ++ss.allocated;
            for (int root : assignment_.roots)
                if (sighting_spill_[static_cast<std::size_t>(root)] == static_cast<int>(i))
                    ss.rendezvous_ids.push_back(root + 1);
            s.spills.push_back(std::move(ss));
        }
        s.d_sum = trace_.empty() ? 0.0 : trace_.back().cumulative_distance;
        s.iterations = k_;
        for (const auto& r : robots_)
            s.stranded += r.stranded ? 1 : 0;
        s.overlap_events = overlap_events_;
        s.topology_events = topology_events_;
        s.complete = done();
        return s;
    }

    /// Closest boundary point within r_A over all spills, ignoring heading.
    Observation observe_omni(const Pose& p) const { return observe_all(p, omni_); }
    Observation observe_fov(const Pose& p) const { return observe_all(p, vision_); }

    void tick()
    {
        const std::size_t n = robots_.size();
        std::vector<Vec2> pos(n);
        for (std::size_t i = 0; i < n; ++i)
            pos[i] = robots_[i].pose.position();

        std::vector<Observation> omni(n), fov(n);
        for (std::size_t i = 0; i < n; ++i) {
            omni[i] = observe_omni(robots_[i].pose);
            fov[i] = observe_fov(robots_[i].pose);
        }

        std::vector<Vec2> tracking, searching;
        for (std::size_t i = 0; i < n; ++i) {
            if (robots_[i].state == RobotState::Tracking)
                tracking.push_back(pos[i]);
            else if (robots_[i].state == RobotState::Searching)
                searching.push_back(pos[i]);
        }
        const auto busy_roots = roots_with_rendezvous_children();
        std::vector<Vec2> busy_root_pos;
        for (int r : busy_roots)
            busy_root_pos.push_back(pos[static_cast<std::size_t>(r)]);

        std::vector<Robot> next = robots_;
        std::vector<std::optional<RobotState>> transition(n);
        for (std::size_t i = 0; i < n; ++i) {
            Robot& r = next[i];
            StepResult res;
            switch (r.state) {
            case RobotState::Rendezvous:
                res = rendezvous_dispatch(i, r, pos, omni[i], busy_roots, tracking, searching);
                break;
            case RobotState::Searching: {
                const SearchPerception sp{fov[i].obs, omni[i].obs, tracking};
                res = search_step(r, sp, cfg_.gains, vision_, lim_, rng_);
                if (res.next == RobotState::Tracking)
                    r.spill = omni[i].spill;
                break;
            }
            case RobotState::Tracking: {
                const auto& spill = spills_[static_cast<std::size_t>(r.spill)];
                // direction read at the robot's own boundary point; the sector test is on that direction
                const BoundaryObservation o = observe_boundary(r.pose, omni_, spill);
                const double l_star = leader_distance(i, pos);
                res = track_step(r, o, l_star, busy_root_pos, cfg_.r_C, cfg_.gains, vision_, lim_);
                break;
            }
            }
            if (res.next && *res.next != r.state) {
                transition[i] = res.next;
                res.cmd = {};
            }
            r.cmd = res.cmd;
        }

        // limits, then the collision guard
        stats_ = TickStats{};
        for (std::size_t i = 0; i < n; ++i) {
            Robot& r = next[i];
            const VelocityCommand prev = robots_[i].cmd;
            VelocityCommand c = clamp_command(r.cmd, prev, lim_);
            if (c.u != 0.0 && guard_blocks(i, pos, Pose{r.pose.x, r.pose.y, r.pose.theta}, c)) {
                const double dv = lim_.a_max * lim_.T_c;
                c.u = std::clamp(0.0, prev.u - dv, prev.u + dv);
            }
            r.cmd = c;
            stats_.max_u = std::max(stats_.max_u, std::abs(c.u));
            stats_.max_w = std::max(stats_.max_w, std::abs(c.w));
            stats_.max_accel = std::max(stats_.max_accel, std::abs(c.u - prev.u) / lim_.T_c);
        }

        // integrate with wall reflection
        for (std::size_t i = 0; i < n; ++i) {
            Robot& r = next[i];
            Pose p = step_unicycle(r.pose, r.cmd, lim_.T_c);
            const auto& b = cfg_.bounds;
            const double m = cfg_.robot_radius;
            if (p.x < b.xmin + m || p.x > b.xmax - m) {
                p.x = r.pose.x;
                p.y = r.pose.y;
                p.theta = wrap_angle(kPi - p.theta);
            }
            if (p.y < b.ymin + m || p.y > b.ymax - m) {
                p.x = r.pose.x;
                p.y = r.pose.y;
                p.theta = wrap_angle(-p.theta);
            }
            r.pose = p;
        }

        // physical overlap: revert offending robots to their previous positions
        const double contact = 2.0 * cfg_.robot_radius;
        std::string halted;
        for (bool again = true; again;) {
            again = false;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    if (distance(next[i].pose.position(), next[j].pose.position()) >= contact)
                        continue;
                    halted += " " + std::to_string(i + 1) + "/" + std::to_string(j + 1);
                    for (std::size_t v : {i, j}) {
                        if (next[v].pose.position() == pos[v])
                            continue;
                        next[v].pose.x = pos[v].x;
                        next[v].pose.y = pos[v].y;
                        again = true;
                        ++stats_.overlaps_reverted;
                    }
                }
        }
        if (stats_.overlaps_reverted > 0) {
            ++overlap_events_;
            events_.push_back("k=" + std::to_string(k_ + 1) + ": overlap, " +
                              std::to_string(stats_.overlaps_reverted) + " robot(s) halted, pairs" + halted);
        }

        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                stats_.min_pair_distance =
                    std::min(stats_.min_pair_distance, distance(next[i].pose.position(), next[j].pose.position()));

        // erosion along realized displacement
        std::vector<std::vector<Sweep>> sweeps(spills_.size());
        for (std::size_t i = 0; i < n; ++i) {
            const Robot& r = next[i];
            next[i].distance += distance(pos[i], r.pose.position());
            if (r.state == RobotState::Tracking && !transition[i] && r.in_fot && r.mode == Mode::Normal &&
                r.spill >= 0 && r.pose.position() != pos[i])
                sweeps[static_cast<std::size_t>(r.spill)].push_back({pos[i], r.pose.position()});
        }
        for (std::size_t s = 0; s < spills_.size(); ++s) {
            if (sweeps[s].empty())
                continue;
            ErosionResult e = erode_swept_batch(spills_[s], sweeps[s], lim_.d, cfg_.robot_radius);
            if (e.topology_changed) {
                ++topology_events_;
                orphaned_[s] += e.orphaned_area;
                events_.push_back("k=" + std::to_string(k_ + 1) + ": spill " + std::to_string(s + 1) +
                                  " split, kept the largest piece");
            }
            spills_[s] = std::move(e.boundary);
        }

        for (std::size_t s = 0; s < spills_.size(); ++s)
            if (velocity_[s].squared_norm() > 0.0)
                spills_[s] = translate(spills_[s], velocity_[s], lim_.T_c, cfg_.spill_speed_bound());

        for (std::size_t i = 0; i < n; ++i) {
            if (!transition[i])
                continue;
            Robot& r = next[i];
            transitions_.push_back({k_ + 1, r.id, r.state, *transition[i]});
            enter(r, *transition[i]);
        }
        robots_ = std::move(next);
        ++k_;
        if (k_ % cfg_.graph_rebuild_period == 0)
            rebuild_graph();
        record();
    }

    std::string trees_text() const
    {
        std::ostringstream os;
        os << "robot_id,parent_id,level\n";
        for (const auto& t : initial_trees_) {
            for (int m : t.members) {
                const auto p = t.parent_of(m);
                const int lvl = t.level_of(m);
                if (m == t.root)
                    os << (m + 1) << ",0,0\n";
                else if (p)
                    os << (m + 1) << ',' << (*p + 1) << ',' << lvl << '\n';
            }
        }
        for (std::size_t i = 0; i < robots_.size(); ++i)
            if (assignment_.root.empty() || assignment_.root[i] < 0)
                os << (i + 1) << ",-1,-1\n";
        return os.str();
    }

private:
    Observation observe_all(const Pose& p, const VisionConfig& v) const
    {
        Observation best;
        for (std::size_t s = 0; s < spills_.size(); ++s) {
            BoundaryObservation o = observe_boundary(p, v, spills_[s]);
            if (o.visible && o.distance < best.obs.distance) {
                best.obs = o;
                best.spill = static_cast<int>(s);
            }
        }
        return best;
    }

    void place_robots()
    {
        const int n = cfg_.robot_count;
        robots_.resize(static_cast<std::size_t>(n));
        if (!cfg_.poses.empty()) {
            for (int i = 0; i < n; ++i) {
                robots_[static_cast<std::size_t>(i)].id = i + 1;
                robots_[static_cast<std::size_t>(i)].pose = cfg_.poses[static_cast<std::size_t>(i)];
            }
            return;
        }
        std::uniform_real_distribution<double> unit(-1.0, 1.0);
        const auto& w = cfg_.random_walk;
        std::vector<Vec2> placed;
        for (int i = 0; i < n; ++i) {
            bool ok = false;
            Pose pose;
            for (int attempt = 0; attempt <= w.retries && !ok; ++attempt) {
                pose = {cfg_.dock.x, cfg_.dock.y, kPi * unit(rng_)};
                for (int s = 0; s < w.max_steps; ++s) {
                    if (observe_omni(pose).spill >= 0)
                        break;
                    pose.theta = wrap_angle(pose.theta + w.heading_jitter * unit(rng_));
                    const Vec2 cand = pose.position() + Vec2::from_angle(pose.theta) * w.step;
                    bool blocked = !cfg_.bounds.contains(cand);
                    for (const auto& sp : spills_)
                        blocked = blocked || contains(sp, cand) ||
                                  nearest_boundary_point(sp, cand).distance < 2.0 * cfg_.robot_radius;
                    if (blocked) {
                        pose.theta = wrap_angle(pose.theta + kPi * (0.5 + 0.5 * unit(rng_)));
                        continue;
                    }
                    pose.x = cand.x;
                    pose.y = cand.y;
                }
                ok = std::all_of(placed.begin(), placed.end(), [&](Vec2 q) {
                    return distance(q, pose.position()) >= 2.0 * cfg_.robot_radius + 1e-9;
                });
            }
            if (!ok)
                throw ScenarioError({"robots: could not place robot " + std::to_string(i + 1) + " without collision"});
            placed.push_back(pose.position());
            robots_[static_cast<std::size_t>(i)].id = i + 1;
            robots_[static_cast<std::size_t>(i)].pose = pose;
        }
    }

    void elect()
    {
        const std::size_t n = robots_.size();
        std::vector<char> sees(n, 0);
        sighting_spill_.assign(n, -1);
        sighting_point_.assign(n, Vec2{});
        for (std::size_t i = 0; i < n; ++i) {
            const Observation o = observe_omni(robots_[i].pose);
            if (o.spill >= 0) {
                sees[i] = 1;
                sighting_spill_[i] = o.spill;
                sighting_point_[i] = o.obs.nearest_point;
            }
        }
        const auto roots = select_rendezvous_points(sees);
        std::vector<Vec2> pos(n);
        for (std::size_t i = 0; i < n; ++i)
            pos[i] = robots_[i].pose.position();
        graph_ = build_graph(pos, cfg_.r_C);
        assignment_ = assign(graph_, roots);
        trees_ = build_trees(graph_, assignment_);
        initial_trees_ = trees_;
        allocation_.assign(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            Robot& r = robots_[i];
            r.state = RobotState::Rendezvous;
            r.root = assignment_.root[i];
            r.stranded = r.root < 0;
            if (r.root >= 0)
                allocation_[i] = sighting_spill_[static_cast<std::size_t>(r.root)];
        }
        for (const auto& t : trees_) {
            for (const auto& [c, p] : t.parent)
                robots_[static_cast<std::size_t>(c)].parent = p;
            for (int s : t.stranded) {
                robots_[static_cast<std::size_t>(s)].stranded = true;
                robots_[static_cast<std::size_t>(s)].root = -1;
                allocation_[static_cast<std::size_t>(s)] = -1;
            }
        }
    }

    // Stranded robots join a tree as soon as the graph connects them to one.
    void rebuild_graph()
    {
        const std::size_t n = robots_.size();
        std::vector<Vec2> pos(n);
        for (std::size_t i = 0; i < n; ++i)
            pos[i] = robots_[i].pose.position();
        graph_ = build_graph(pos, cfg_.r_C);
        bool any = false;
        for (const auto& r : robots_)
            any = any || (r.stranded && r.state == RobotState::Rendezvous);
        if (!any)
            return;
        std::vector<char> allowed(n, 0);
        std::vector<int> anchors;
        for (std::size_t i = 0; i < n; ++i)
            if (robots_[i].state == RobotState::Rendezvous && !robots_[i].stranded) {
                allowed[i] = 1;
                anchors.push_back(static_cast<int>(i));
            }
        for (std::size_t i = 0; i < n; ++i) {
            Robot& r = robots_[i];
            if (!r.stranded || r.state != RobotState::Rendezvous)
                continue;
            allowed[i] = 1;
            const ShortestPaths sp = dijkstra(graph_, static_cast<int>(i), allowed);
            int best = -1;
            for (int a : anchors)
                if (std::isfinite(sp.dist[static_cast<std::size_t>(a)]) &&
                    (best < 0 || sp.dist[static_cast<std::size_t>(a)] < sp.dist[static_cast<std::size_t>(best)]))
                    best = a;
            allowed[i] = 0;
            if (best < 0)
                continue;
            // parent: first hop on the path from this robot toward the anchor
            int hop = best;
            while (sp.parent[static_cast<std::size_t>(hop)] != static_cast<int>(i))
                hop = sp.parent[static_cast<std::size_t>(hop)];
            r.parent = hop;
            r.root = robots_[static_cast<std::size_t>(best)].root;
            r.stranded = false;
            allocation_[i] = sighting_spill_[static_cast<std::size_t>(r.root)];
        }
    }

    std::vector<int> roots_with_rendezvous_children() const
    {
        std::vector<int> out;
        for (std::size_t i = 0; i < robots_.size(); ++i) {
            const Robot& r = robots_[i];
            if (r.state != RobotState::Rendezvous || r.root != static_cast<int>(i))
                continue;
            if (has_rendezvous_descendants(static_cast<int>(i)))
                out.push_back(static_cast<int>(i));
        }
        return out;
    }

    bool has_rendezvous_descendants(int root) const
    {
        for (std::size_t j = 0; j < robots_.size(); ++j)
            if (static_cast<int>(j) != root && robots_[j].root == root && robots_[j].state == RobotState::Rendezvous &&
                !robots_[j].stranded)
                return true;
        return false;
    }

    StepResult rendezvous_dispatch(std::size_t i, Robot& r, const std::vector<Vec2>& pos, const Observation& omni,
                                   const std::vector<int>& busy_roots, const std::vector<Vec2>& tracking,
                                   const std::vector<Vec2>& searching)
    {
        const int self = static_cast<int>(i);
        if (r.root == self) {
            if (std::find(busy_roots.begin(), busy_roots.end(), self) == busy_roots.end())
                return {{}, RobotState::Searching};
            if (omni.spill >= 0 && velocity_[static_cast<std::size_t>(omni.spill)].squared_norm() > 0.0) {
                std::vector<Vec2> children;
                for (std::size_t j = 0; j < robots_.size(); ++j)
                    if (robots_[j].state == RobotState::Rendezvous && robots_[j].parent == self)
                        children.push_back(pos[j]);
                const Vec2 goal = herd(pos[i], omni.obs.nearest_point, cfg_.r_A, children, cfg_.r_C);
                if (distance(goal, pos[i]) < cfg_.gains.epsilon)
                    return {};
                return {detail::navigate(r, goal, tracking, cfg_.gains, lim_, rng_)};
            }
            return {};
        }
        if (omni.spill >= 0)
            return {{}, RobotState::Searching};
        if (r.stranded || r.parent < 0)
            return {};

        const auto pi = static_cast<std::size_t>(r.parent);
        RendezvousInput in;
        in.self = pos[i];
        in.parent = r.parent;
        in.parent_position = pos[pi];
        const int gp = robots_[pi].parent;
        if (r.parent != r.root && gp >= 0) {
            in.grandparent = gp;
            in.grandparent_position = pos[static_cast<std::size_t>(gp)];
        }
        in.robot_radius = cfg_.robot_radius;
        in.promotion = cfg_.promotion;
        in.r_C = cfg_.r_C;
        const RendezvousDecision d = rendezvous_step(in);
        if (d.reached_root) {
            r.memory_goal = sighting_point_[static_cast<std::size_t>(r.root)];
            return {{}, RobotState::Searching};
        }
        if (d.new_parent)
            r.parent = *d.new_parent;
        const int goal_robot = r.parent;

        std::vector<Vec2> repulsors;
        for (std::size_t j = 0; j < robots_.size(); ++j) {
            if (j == i || static_cast<int>(j) == goal_robot)
                continue;
            if (robots_[j].state != RobotState::Rendezvous)
                repulsors.push_back(pos[j]);
        }
        (void)tracking;
        (void)searching;
        VelocityCommand c = detail::navigate(r, d.goal, repulsors, cfg_.gains, lim_, rng_);
        // keep every child that still follows this robot within r_C
        const Pose p = step_unicycle(r.pose, clamp_command(c, robots_[i].cmd, lim_), lim_.T_c);
        for (std::size_t j = 0; j < robots_.size(); ++j)
            if (robots_[j].state == RobotState::Rendezvous && robots_[j].parent == self &&
                distance(p.position(), pos[j]) > cfg_.r_C) {
                c.u = 0.0;
                break;
            }
        return {c};
    }

    // Gap along the boundary to the nearest tracking robot ahead on the same spill that sits on the boundary.
    double leader_distance(std::size_t i, const std::vector<Vec2>& pos) const
    {
        const Robot& r = robots_[i];
        const auto& spill = spills_[static_cast<std::size_t>(r.spill)];
        if (spill.empty())
            return vision_.r_A;
        const double per = spill.perimeter();
        const double s_i = nearest_boundary_point(spill, pos[i]).arc;
        std::optional<double> best;
        for (std::size_t j = 0; j < robots_.size(); ++j) {
            if (j == i || robots_[j].state != RobotState::Tracking || robots_[j].spill != r.spill)
                continue;
            const BoundaryPoint bj = nearest_boundary_point(spill, pos[j]);
            if (bj.distance > vision_.snap_tol)
                continue; // not yet on the boundary
            const double s_j = bj.arc;
            double l = s_j - s_i;
            if (l < 0.0)
                l += per;
            if (l == 0.0 && j > i)
                l = per; // coincident arcs: the lower id leads
            if (!best || l < *best)
                best = l;
        }
        if (!best)
            return vision_.r_A;
        return std::clamp(*best, 0.0, vision_.r_A);
    }

    bool guard_blocks(std::size_t i, const std::vector<Vec2>& pos, const Pose& pose, const VelocityCommand& c) const
    {
        const Vec2 here = pos[i];
        const Vec2 there = step_unicycle(pose, c, lim_.T_c).position();
        const double zone = 2.0 * cfg_.robot_radius + lim_.v_max() * lim_.T_c;
        const auto rank = [](RobotState s) { return s == RobotState::Tracking ? 2 : s == RobotState::Searching ? 1 : 0; };
        const Robot& ri = robots_[i];
        const bool on_spill = ri.state == RobotState::Tracking && ri.spill >= 0;
        const SpillBoundary* spill = on_spill ? &spills_[static_cast<std::size_t>(ri.spill)] : nullptr;
        const double s_i = spill && !spill->empty() ? nearest_boundary_point(*spill, here).arc : 0.0;
        for (std::size_t j = 0; j < pos.size(); ++j) {
            if (j == i || rank(robots_[j].state) < rank(ri.state))
                continue;
            // two trackers closing head-on: the one behind in arc order yields
            const bool facing = dot(Vec2::from_angle(robots_[j].pose.theta), here - pos[j]) > 0.0;
            if (spill && !spill->empty() && facing && robots_[j].state == RobotState::Tracking &&
                robots_[j].spill == ri.spill) {
                const double per = spill->perimeter();
                double l = nearest_boundary_point(*spill, pos[j]).arc - s_i;
                if (l < 0.0)
                    l += per;
                if ((l == 0.0 && j > i) || l > 0.5 * per)
                    continue;
            }
            const double now = distance(here, pos[j]);
            const double later = distance(there, pos[j]);
            if (later < zone && later < now)
                return true;
        }
        return false;
    }

    void enter(Robot& r, RobotState s)
    {
        r.state = s;
        r.flags = {};
        r.scanned = 0.0;
        r.conflict_ticks = 0;
        r.last_dir.reset();
        if (s == RobotState::Searching) {
            r.spill = -1;
            r.in_fot = false;
            r.mode = Mode::Normal;
        } else if (s == RobotState::Tracking) {
            r.flags.tracking_enable = true;
            r.flags.on_the_boundary = true;
            r.last_track_u = 0.0;
            r.memory_goal.reset();
        }
    }

    void record()
    {
        MetricsRecord m;
        m.iteration = k_;
        const std::size_t n = robots_.size();
        for (std::size_t s = 0; s < spills_.size(); ++s) {
            SpillMetrics sm;
            sm.area = spills_[s].area();
            sm.perimeter = spills_[s].perimeter();
            std::vector<Vec2> members;
            for (std::size_t i = 0; i < n; ++i)
                if (allocation_[i] == static_cast<int>(s))
                    members.push_back(robots_[i].pose.position());
            sm.robots = static_cast<int>(members.size());
            sm.lyapunov = lyapunov(members, centroid_[s]);
            if (!k_stop_[s] && spill_done(s))
                k_stop_[s] = k_;
            sm.k_stop = k_stop_[s];
            m.sum_lyapunov += sm.lyapunov;
            m.spills.push_back(sm);
        }
        for (const auto& r : robots_) {
            m.cumulative_distance += r.distance;
            m.n_tracking += r.state == RobotState::Tracking;
            m.n_searching += r.state == RobotState::Searching;
            m.n_rendezvous += r.state == RobotState::Rendezvous;
        }
        trace_.push_back(std::move(m));
    }

    ScenarioConfig cfg_;
    ActuatorLimits lim_;
    VisionConfig vision_;
    VisionConfig omni_;
    std::mt19937_64 rng_;
    int k_{0};

    std::vector<SpillBoundary> spills_;
    std::vector<Vec2> velocity_;
    std::vector<Vec2> centroid_;
    std::vector<double> orphaned_;
    std::vector<std::optional<int>> k_stop_;

    std::vector<Robot> robots_;
    ConnectivityGraph graph_;
    Assignment assignment_;
    std::vector<RendezvousTree> trees_;
    std::vector<RendezvousTree> initial_trees_;
    std::vector<int> sighting_spill_;
    std::vector<Vec2> sighting_point_;
    std::vector<int> allocation_;

    std::vector<MetricsRecord> trace_;
    std::vector<TransitionEvent> transitions_;
    std::vector<std::string> events_;
    TickStats stats_;
    int overlap_events_{0};
    int topology_events_{0};
};

/// FNV-1a over a byte string; used for run digests.
inline std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string metrics_csv(const std::vector<MetricsRecord>& trace)
{
    std::ostringstream os;
    write_metrics_header(os);
    for (const auto& r : trace)
        write_metrics_rows(os, r);
    return os.str();
}

} // namespace shrink
