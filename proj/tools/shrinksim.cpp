// Command-line runner: single scenarios and parameter sweeps.

#include "shrink/engine.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace shrink;

namespace {

std::string summary_text(const Simulation& sim, const RunSummary& s)
{
    std::ostringstream os;
    os << std::fixed;
    os << "scenario: " << sim.config().name << "\n";
    os << "seed: " << sim.config().seed << "\n";
    os << "iterations: " << s.iterations << " (k_max " << sim.config().k_max << ")\n";
    os << "spill,initial_area,residual_area,orphaned_area,completeness_pct,allocated_robots,k_stop,rendezvous_ids\n";
    for (std::size_t i = 0; i < s.spills.size(); ++i) {
        const auto& sp = s.spills[i];
        os << (i + 1) << ',' << std::setprecision(6) << sp.initial_area << ',' << sp.residual_area << ','
           << sp.orphaned_area << ',' << std::setprecision(2) << sp.completeness << ',' << sp.allocated << ',';
        if (sp.k_stop)
            os << *sp.k_stop;
        else
            os << "none";
        os << ",\"";
        for (std::size_t k = 0; k < sp.rendezvous_ids.size(); ++k)
            os << (k ? " " : "") << '#' << sp.rendezvous_ids[k];
        os << "\"\n";
    }
    os << std::setprecision(3) << "D_sum: " << s.d_sum << " m\n";
    os << "stranded: " << s.stranded << "\n";
    os << "overlap_events: " << s.overlap_events << "\n";
    os << "topology_events: " << s.topology_events << "\n";
    os << "complete: " << (s.complete ? "yes" : "no") << "\n";
    return os.str();
}

struct RunOptions
{
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::string out{"out"};
    std::optional<int> max_iterations;
    bool poses{false};
    bool lenient{false};
};

ScenarioConfig load(const RunOptions& o)
{
    ScenarioConfig c = parse_scenario(o.scenario, !o.lenient);
    if (o.seed)
        c.seed = *o.seed;
    if (o.max_iterations)
        c.k_max = *o.max_iterations;
    return c;
}

RunSummary run_one(ScenarioConfig cfg, const fs::path& dir, bool poses, bool quiet)
{
    fs::create_directories(dir);
    Simulation sim(std::move(cfg));
    std::ofstream pose_out;
    auto dump = [&](const Simulation& s) {
        for (const auto& r : s.robots())
            pose_out << s.iteration() << ',' << r.id << ',' << r.pose.x << ',' << r.pose.y << ',' << r.pose.theta
                     << ',' << to_string(r.state) << '\n';
    };
    if (poses) {
        pose_out.open(dir / "poses.csv");
        pose_out << std::fixed << std::setprecision(6) << "iteration,robot_id,x,y,theta,state\n";
        dump(sim);
    }
    const RunSummary s = sim.run(poses ? std::function<void(const Simulation&)>(dump) : nullptr);
    std::ofstream(dir / "metrics.csv") << metrics_csv(sim.trace());
    std::ofstream(dir / "summary.txt") << summary_text(sim, s);
    std::ofstream(dir / "trees.txt") << sim.trees_text();
    if (!quiet) {
        for (std::size_t i = 0; i < s.spills.size(); ++i) {
            std::cout << "spill " << (i + 1) << ": k_stop=";
            if (s.spills[i].k_stop)
                std::cout << *s.spills[i].k_stop;
            else
                std::cout << "none";
            std::cout << " completeness=" << std::fixed << std::setprecision(2) << s.spills[i].completeness << "%\n";
        }
        if (!s.complete)
            std::cout << "incomplete: residue remains after " << s.iterations << " iterations\n";
    }
    return s;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-robot boundary shrink simulator"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Run one scenario");
    run->add_option("--scenario", ro.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", ro.seed, "Override the scenario seed");
    run->add_option("--out", ro.out, "Output directory");
    run->add_option("--max-iterations", ro.max_iterations, "Override k_max");
    run->add_flag("--poses", ro.poses, "Write poses.csv");
    run->add_flag("--lenient", ro.lenient, "Ignore unknown keys in the scenario");

    RunOptions so;
    std::string param;
    std::vector<double> values;
    bool parallel = false;
    auto* sweep = app.add_subcommand("sweep", "Sweep robot count N or operation range d");
    sweep->add_option("--scenario", so.scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", param, "Swept parameter")->required()->check(CLI::IsMember({"N", "d"}));
    sweep->add_option("--values", values, "Values to sweep")->required();
    sweep->add_option("--seed", so.seed, "Override the scenario seed");
    sweep->add_option("--out", so.out, "Output directory");
    sweep->add_option("--max-iterations", so.max_iterations, "Override k_max");
    sweep->add_flag("--lenient", so.lenient, "Ignore unknown keys in the scenario");
    sweep->add_flag("--parallel", parallel, "Run sweep points concurrently");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const RunSummary s = run_one(load(ro), ro.out, ro.poses, false);
            return s.complete ? 0 : 1;
        }
        const ScenarioConfig base = load(so);
        std::vector<ScenarioConfig> cfgs;
        for (double v : values) {
            ScenarioConfig c = base;
            if (param == "N") {
                c.robot_count = static_cast<int>(v);
            } else {
                c.limits.d = v;
                c.resolution = v / 10.0;
                c.vision.snap_tol = c.resolution;
            }
            const auto problems = validate(c);
            if (!problems.empty())
                throw ScenarioError(problems);
            cfgs.push_back(std::move(c));
        }
        auto dir_for = [&](double v) {
            std::ostringstream os;
            os << param << '_' << v;
            return fs::path(so.out) / os.str();
        };
        std::vector<RunSummary> results(cfgs.size());
        if (parallel) {
            std::vector<std::future<RunSummary>> fut;
            for (std::size_t i = 0; i < cfgs.size(); ++i)
                fut.push_back(std::async(std::launch::async, run_one, cfgs[i], dir_for(values[i]), false, true));
            for (std::size_t i = 0; i < cfgs.size(); ++i)
                results[i] = fut[i].get();
        } else {
            for (std::size_t i = 0; i < cfgs.size(); ++i)
                results[i] = run_one(cfgs[i], dir_for(values[i]), false, true);
        }
        fs::create_directories(so.out);
        std::ofstream csv(fs::path(so.out) / "sweep.csv");
        csv << param << ",spill_id,k_stop,completeness,allocated,max_k_stop,d_sum\n";
        bool all = true;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            const auto mk = r.max_k_stop();
            all = all && r.complete;
            for (std::size_t s = 0; s < r.spills.size(); ++s) {
                csv << values[i] << ',' << (s + 1) << ',';
                if (r.spills[s].k_stop)
                    csv << *r.spills[s].k_stop;
                csv << ',' << std::fixed << std::setprecision(2) << r.spills[s].completeness << ','
                    << r.spills[s].allocated << ',';
                if (mk)
                    csv << *mk;
                csv << ',' << std::setprecision(3) << r.d_sum << '\n';
                csv.unsetf(std::ios::floatfield);
            }
            std::cout << param << '=' << values[i] << ": max k_stop=";
            if (mk)
                std::cout << *mk;
            else
                std::cout << "none";
            std::cout << '\n';
        }
        return all ? 0 : 1;
    } catch (const ScenarioError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
}
