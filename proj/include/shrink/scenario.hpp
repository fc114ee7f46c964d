#pragma once
/**
 * @file   scenario.hpp
 * @brief  Scenario configuration: JSON schema, validation and serialization.
 */

#include "shrink/control.hpp"
#include "shrink/geometry.hpp"
#include "shrink/kinematics.hpp"
#include "shrink/sensing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace shrink {

using json = nlohmann::json;

struct SpillSpec
{
    std::string type{"circle"}; ///< circle | ellipse | polygon
    Vec2 center;
    double radius{0.0};
    double semi_major{0.0};
    double semi_minor{0.0};
    double angle{0.0};
    std::vector<Vec2> vertices;
    Vec2 velocity;
};

struct RandomWalkSpec
{
    double step{0.02};
    double heading_jitter{0.5};
    int max_steps{200};
    int retries{50};
};

struct ScenarioConfig
{
    std::string name{"scenario"};
    Bounds bounds{-1.5, -1.5, 1.5, 1.5};
    Vec2 dock;
    std::vector<SpillSpec> spills;

    int robot_count{0};
    double robot_radius{0.01};
    std::vector<Pose> poses;
    RandomWalkSpec random_walk;

    double r_A{1.0};
    double r_C{0.3};
    ActuatorLimits limits;
    VisionConfig vision;
    ControlGains gains;

    double a_min_fraction{0.01};
    int k_max{1000};
    int graph_rebuild_period{10};
    double resolution{0.009};
    double promotion{0.02};
    std::uint64_t seed{1};

    double v_max() const { return limits.v_max(); }
    /// Spill speed bound: the sensing bound of a robot aligned with the boundary, capped at robot speed.
    double spill_speed_bound() const
    {
        return std::min(max_spill_speed(vision.phi, 0.0, r_A, limits.T_c), limits.v_max());
    }
};

class ScenarioError : public std::runtime_error
{
public:
    explicit ScenarioError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems))
    {
    }
    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& p)
    {
        std::string s = "invalid scenario:";
        for (const auto& x : p)
            s += "\n  " + x;
        return s;
    }
    std::vector<std::string> problems_;
};

inline std::vector<SpillBoundary> build_spills(const ScenarioConfig& c)
{
    std::vector<SpillBoundary> out;
    for (const auto& s : c.spills) {
        if (s.type == "circle")
            out.push_back(make_circle(s.center, s.radius, c.resolution));
        else if (s.type == "ellipse")
            out.push_back(make_ellipse(s.center, s.semi_major, s.semi_minor, s.angle, c.resolution));
        else
            out.push_back(make_polygon(s.vertices, c.resolution));
    }
    return out;
}

namespace detail {

class Reader
{
public:
    Reader(std::vector<std::string>& problems, bool strict) : problems_(problems), strict_(strict) {}

    void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed)
    {
        if (!obj.is_object()) {
            problems_.push_back(path + ": expected an object");
            return;
        }
        if (!strict_)
            return;
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items())
            if (!ok.count(k))
                problems_.push_back(path + "." + k + ": unknown key");
    }

    template <class T>
    void get(const json& obj, const std::string& path, const char* key, T& out, bool required = false)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                problems_.push_back(path + "." + key + ": missing");
            return;
        }
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception&) {
            problems_.push_back(path + "." + key + ": wrong type");
        }
    }

    void point(const json& obj, const std::string& path, const char* key, Vec2& out, bool required = false)
    {
        if (!obj.is_object() || !obj.contains(key)) {
            if (required)
                problems_.push_back(path + "." + key + ": missing");
            return;
        }
        const json& v = obj.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            problems_.push_back(path + "." + key + ": expected [x, y]");
            return;
        }
        out = {v[0].get<double>(), v[1].get<double>()};
    }

    void error(std::string s) { problems_.push_back(std::move(s)); }

private:
    std::vector<std::string>& problems_;
    bool strict_;
};

inline json point_json(Vec2 p) { return json::array({p.x, p.y}); }

} // namespace detail

/// Every violated constraint, each prefixed with its field path.
inline std::vector<std::string> validate(const ScenarioConfig& c)
{
    std::vector<std::string> p;
    auto positive = [&](double v, const char* path) {
        if (!(v > 0.0))
            p.push_back(std::string(path) + ": must be positive");
    };
    positive(c.r_A, "ranges.r_A");
    positive(c.r_C, "ranges.r_C");
    positive(c.limits.d, "ranges.d");
    positive(c.limits.V, "limits.V");
    positive(c.limits.a_max, "limits.a_max");
    positive(c.limits.L, "limits.L");
    positive(c.limits.T_c, "limits.T_c");
    positive(c.robot_radius, "robots.radius");
    positive(c.resolution, "engine.resolution");
    if (c.limits.d > c.r_A)
        p.emplace_back("ranges.d: operation range must not exceed r_A");
    if (!(c.vision.eps_phi > 0.0 && c.vision.eps_phi < c.vision.phi && c.vision.phi <= kPi))
        p.emplace_back("vision: need 0 < eps_phi < phi <= pi");
    if (!(c.a_min_fraction > 0.0 && c.a_min_fraction < 1.0))
        p.emplace_back("stop.a_min_fraction: must lie in (0, 1)");
    if (c.k_max < 0)
        p.emplace_back("stop.k_max: must be non-negative");
    if (c.graph_rebuild_period < 1)
        p.emplace_back("engine.graph_rebuild_period: must be at least 1");
    if (c.robot_count < 0)
        p.emplace_back("robots.count: must be non-negative");
    if (!c.poses.empty() && static_cast<int>(c.poses.size()) < c.robot_count)
        p.emplace_back("robots.poses: fewer poses than robots.count");
    try {
        c.gains.validate();
    } catch (const std::exception& e) {
        p.push_back(std::string("gains: ") + e.what());
    }
    const double bound = c.spill_speed_bound();
    for (std::size_t i = 0; i < c.spills.size(); ++i) {
        const auto& s = c.spills[i];
        const std::string path = "spills[" + std::to_string(i) + "]";
        if (s.type == "circle") {
            if (!(s.radius > 0.0))
                p.push_back(path + ".radius: must be positive");
        } else if (s.type == "ellipse") {
            if (!(s.semi_major > 0.0 && s.semi_minor > 0.0))
                p.push_back(path + ": semi-axes must be positive");
        } else if (s.type == "polygon") {
            if (s.vertices.size() < 3)
                p.push_back(path + ".vertices: need at least 3 vertices");
        } else {
            p.push_back(path + ".type: unknown spill type '" + s.type + "'");
        }
        if (s.velocity.norm() > bound + 1e-15)
            p.push_back(path + ".velocity: speed " + std::to_string(s.velocity.norm()) + " m/s exceeds bound " +
                        std::to_string(bound) + " m/s");
    }
    if (!p.empty())
        return p;
    Workspace ws{c.bounds, build_spills(c), c.dock};
    for (auto& v : ws.violations())
        p.push_back("workspace: " + v);
    for (std::size_t i = 0; i < c.poses.size(); ++i)
        for (std::size_t s = 0; s < ws.spills.size(); ++s)
            if (contains(ws.spills[s], c.poses[i].position()))
                p.push_back("robots.poses[" + std::to_string(i) + "]: inside spill " + std::to_string(s + 1));
    return p;
}

inline ScenarioConfig scenario_from_json(const json& j, bool strict = true)
{
    std::vector<std::string> problems;
    detail::Reader rd(problems, strict);
    ScenarioConfig c;
    rd.keys(j, "$", {"name", "workspace", "spills", "robots", "ranges", "limits", "vision", "gains", "stop",
                     "engine", "seed"});
    if (!j.is_object())
        throw ScenarioError(problems);
    rd.get(j, "$", "name", c.name);
    rd.get(j, "$", "seed", c.seed);

    if (j.contains("workspace")) {
        const json& w = j["workspace"];
        rd.keys(w, "workspace", {"bounds", "dock"});
        if (w.is_object() && w.contains("bounds")) {
            const json& b = w["bounds"];
            if (b.is_array() && b.size() == 4 && std::all_of(b.begin(), b.end(), [](const json& x) { return x.is_number(); }))
                c.bounds = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
            else
                rd.error("workspace.bounds: expected [xmin, ymin, xmax, ymax]");
        }
        rd.point(w, "workspace", "dock", c.dock, true);
    } else {
        rd.error("workspace: missing");
    }

    if (j.contains("spills") && j["spills"].is_array()) {
        std::size_t i = 0;
        for (const json& s : j["spills"]) {
            const std::string path = "spills[" + std::to_string(i++) + "]";
            SpillSpec sp;
            rd.keys(s, path, {"type", "center", "radius", "semi_major", "semi_minor", "angle", "vertices", "velocity"});
            rd.get(s, path, "type", sp.type, true);
            rd.point(s, path, "center", sp.center, sp.type != "polygon");
            rd.get(s, path, "radius", sp.radius, sp.type == "circle");
            rd.get(s, path, "semi_major", sp.semi_major, sp.type == "ellipse");
            rd.get(s, path, "semi_minor", sp.semi_minor, sp.type == "ellipse");
            rd.get(s, path, "angle", sp.angle);
            if (s.is_object() && s.contains("vertices")) {
                const json& v = s["vertices"];
                bool ok = v.is_array();
                if (ok)
                    for (const json& p : v)
                        if (p.is_array() && p.size() == 2 && p[0].is_number() && p[1].is_number())
                            sp.vertices.emplace_back(p[0].get<double>(), p[1].get<double>());
                        else
                            ok = false;
                if (!ok)
                    rd.error(path + ".vertices: expected [[x, y], ...]");
            } else if (sp.type == "polygon") {
                rd.error(path + ".vertices: missing");
            }
            rd.point(s, path, "velocity", sp.velocity);
            c.spills.push_back(std::move(sp));
        }
    } else {
        rd.error("spills: expected an array");
    }

    if (j.contains("ranges")) {
        const json& r = j["ranges"];
        rd.keys(r, "ranges", {"r_A", "r_C", "d"});
        rd.get(r, "ranges", "r_A", c.r_A, true);
        rd.get(r, "ranges", "r_C", c.r_C, true);
        rd.get(r, "ranges", "d", c.limits.d, true);
    } else {
        rd.error("ranges: missing");
    }
    if (j.contains("limits")) {
        const json& l = j["limits"];
        rd.keys(l, "limits", {"V", "a_max", "L", "T_c"});
        rd.get(l, "limits", "V", c.limits.V);
        rd.get(l, "limits", "a_max", c.limits.a_max);
        rd.get(l, "limits", "L", c.limits.L);
        rd.get(l, "limits", "T_c", c.limits.T_c);
    }
    if (j.contains("vision")) {
        const json& v = j["vision"];
        rd.keys(v, "vision", {"phi", "eps_phi"});
        rd.get(v, "vision", "phi", c.vision.phi);
        rd.get(v, "vision", "eps_phi", c.vision.eps_phi);
    }
    c.limits.phi = c.vision.phi;

    if (j.contains("robots")) {
        const json& r = j["robots"];
        rd.keys(r, "robots", {"count", "radius", "poses", "random_walk"});
        rd.get(r, "robots", "count", c.robot_count, true);
        rd.get(r, "robots", "radius", c.robot_radius);
        if (r.is_object() && r.contains("poses")) {
            const json& ps = r["poses"];
            bool ok = ps.is_array();
            if (ok)
                for (const json& p : ps)
                    if (p.is_array() && p.size() == 3 && p[0].is_number() && p[1].is_number() && p[2].is_number())
                        c.poses.push_back({p[0].get<double>(), p[1].get<double>(), wrap_angle(p[2].get<double>())});
                    else
                        ok = false;
            if (!ok)
                rd.error("robots.poses: expected [[x, y, theta], ...]");
        }
        if (r.is_object() && r.contains("random_walk")) {
            const json& w = r["random_walk"];
            rd.keys(w, "robots.random_walk", {"step", "heading_jitter", "max_steps", "retries"});
            rd.get(w, "robots.random_walk", "step", c.random_walk.step);
            rd.get(w, "robots.random_walk", "heading_jitter", c.random_walk.heading_jitter);
            rd.get(w, "robots.random_walk", "max_steps", c.random_walk.max_steps);
            rd.get(w, "robots.random_walk", "retries", c.random_walk.retries);
        }
    } else {
        rd.error("robots: missing");
    }

    c.resolution = c.limits.d / 10.0;
    if (j.contains("engine")) {
        const json& e = j["engine"];
        rd.keys(e, "engine", {"graph_rebuild_period", "resolution", "promotion"});
        rd.get(e, "engine", "graph_rebuild_period", c.graph_rebuild_period);
        rd.get(e, "engine", "resolution", c.resolution);
        rd.get(e, "engine", "promotion", c.promotion);
    }
    if (j.contains("stop")) {
        const json& s = j["stop"];
        rd.keys(s, "stop", {"a_min_fraction", "k_max"});
        rd.get(s, "stop", "a_min_fraction", c.a_min_fraction);
        rd.get(s, "stop", "k_max", c.k_max);
    }

    c.vision.r_A = c.r_A;
    c.vision.snap_tol = c.resolution;
    c.gains = default_gains(c.limits, c.vision, c.robot_radius);
    if (j.contains("gains")) {
        const json& g = j["gains"];
        rd.keys(g, "gains", {"xi1", "xi2", "xi3", "K_p", "K_d", "d0", "epsilon", "alpha", "delta_l", "k_u", "k_w",
                             "rho_floor"});
        rd.get(g, "gains", "xi1", c.gains.xi1);
        rd.get(g, "gains", "xi2", c.gains.xi2);
        rd.get(g, "gains", "xi3", c.gains.xi3);
        rd.get(g, "gains", "K_p", c.gains.K_p);
        rd.get(g, "gains", "K_d", c.gains.K_d);
        rd.get(g, "gains", "d0", c.gains.d0);
        rd.get(g, "gains", "epsilon", c.gains.epsilon);
        rd.get(g, "gains", "alpha", c.gains.alpha);
        rd.get(g, "gains", "delta_l", c.gains.delta_l);
        rd.get(g, "gains", "k_u", c.gains.k_u);
        rd.get(g, "gains", "k_w", c.gains.k_w);
        rd.get(g, "gains", "rho_floor", c.gains.rho_floor);
    }
    c.vision.lookahead = c.gains.delta_l;

    if (problems.empty())
        problems = validate(c);
    if (!problems.empty())
        throw ScenarioError(problems);
    return c;
}

inline json scenario_to_json(const ScenarioConfig& c)
{
    json j;
    j["name"] = c.name;
    j["seed"] = c.seed;
    j["workspace"] = {{"bounds", {c.bounds.xmin, c.bounds.ymin, c.bounds.xmax, c.bounds.ymax}},
                      {"dock", detail::point_json(c.dock)}};
    json spills = json::array();
    for (const auto& s : c.spills) {
        json o{{"type", s.type}};
        if (s.type == "polygon") {
            json v = json::array();
            for (const Vec2& p : s.vertices)
                v.push_back(detail::point_json(p));
            o["vertices"] = v;
        } else {
            o["center"] = detail::point_json(s.center);
            if (s.type == "circle")
                o["radius"] = s.radius;
            else {
                o["semi_major"] = s.semi_major;
                o["semi_minor"] = s.semi_minor;
                o["angle"] = s.angle;
            }
        }
        if (s.velocity.squared_norm() > 0.0)
            o["velocity"] = detail::point_json(s.velocity);
        spills.push_back(o);
    }
    j["spills"] = spills;
    json robots{{"count", c.robot_count},
                {"radius", c.robot_radius},
                {"random_walk",
                 {{"step", c.random_walk.step},
                  {"heading_jitter", c.random_walk.heading_jitter},
                  {"max_steps", c.random_walk.max_steps},
                  {"retries", c.random_walk.retries}}}};
    if (!c.poses.empty()) {
        json ps = json::array();
        for (const Pose& p : c.poses)
            ps.push_back({p.x, p.y, p.theta});
        robots["poses"] = ps;
    }
    j["robots"] = robots;
    j["ranges"] = {{"r_A", c.r_A}, {"r_C", c.r_C}, {"d", c.limits.d}};
    j["limits"] = {{"V", c.limits.V}, {"a_max", c.limits.a_max}, {"L", c.limits.L}, {"T_c", c.limits.T_c}};
    j["vision"] = {{"phi", c.vision.phi}, {"eps_phi", c.vision.eps_phi}};
    const auto& g = c.gains;
    j["gains"] = {{"xi1", g.xi1},         {"xi2", g.xi2},   {"xi3", g.xi3},         {"K_p", g.K_p},
                  {"K_d", g.K_d},         {"d0", g.d0},     {"epsilon", g.epsilon}, {"alpha", g.alpha},
                  {"delta_l", g.delta_l}, {"k_u", g.k_u},   {"k_w", g.k_w},         {"rho_floor", g.rho_floor}};
    j["stop"] = {{"a_min_fraction", c.a_min_fraction}, {"k_max", c.k_max}};
    j["engine"] = {{"graph_rebuild_period", c.graph_rebuild_period},
                   {"resolution", c.resolution},
                   {"promotion", c.promotion}};
    return j;
}

inline ScenarioConfig parse_scenario(const std::string& path, bool strict = true)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError({path + ": cannot open"});
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ScenarioError({path + ": " + e.what()});
    }
    return scenario_from_json(j, strict);
}

} // namespace shrink
