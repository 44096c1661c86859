#include "commands.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>
#include <thread>

#include "ganstab/stability.hpp"

namespace ganstab::tools {

namespace {

void add_monitors(Trajectory& traj, const GanSystem& sys, const std::vector<std::string>& names) {
    const Vec eq = sys.equilibrium().flat();
    for (const auto& m : names) {
        if (m == "field_norm")
            traj.add_monitor(m, [&sys](const Vec& x) { return sys.field_flat(x).norm(); });
        else if (m == "distance")
            traj.add_monitor(m, [eq](const Vec& x) { return (x - eq).norm(); });
    }
}

Json event_types(const RunConfig& run) {
    Json a = Json::array();
    for (const auto& e : run.events) a.push_back(e.type);
    return a;
}

}  // namespace

Json meta_block(const std::string& config_hash, const std::string& kind) {
    return {{"artifact_version", version()}, {"config_hash", config_hash}, {"kind", kind}};
}

OutputSet cmd_simulate(const ExperimentConfig& cfg) {
    std::vector<EventSpec> specs;
    for (const auto& e : cfg.run.events) specs.push_back(e.spec);
    Run run = integrate(cfg.system, *cfg.run.x0, cfg.run.integrator, specs);
    add_monitors(run.trajectory, cfg.system, cfg.run.monitors);

    Json events = to_json(run.log);
    Json doc = {{"_meta", meta_block(cfg.hash, "events")},
                {"system", cfg.system.name()},
                {"status", to_string(run.trajectory.status)},
                {"t_end", to_json(run.trajectory.times.back())},
                {"detectors", event_types(cfg.run)}};
    for (auto& item : events.items()) doc[item.key()] = item.value();
    return {{cfg.prefix + "_trajectory.csv", trajectory_csv(run.trajectory, {cfg.hash, "trajectory"})},
            {cfg.prefix + "_events.json", dump_json(doc)}};
}

OutputSet cmd_discrete(const ExperimentConfig& cfg) {
    DiscreteOptions opts;
    opts.noise_sigma = cfg.run.noise_sigma;
    opts.seed = cfg.seed;
    opts.record_every = cfg.run.record_every;
    Trajectory traj = discrete_steps(cfg.system, *cfg.run.x0, cfg.run.alpha, cfg.run.steps, opts);
    add_monitors(traj, cfg.system, cfg.run.monitors);
    const Vec eq = cfg.system.equilibrium().flat();
    Json doc = {{"_meta", meta_block(cfg.hash, "discrete_summary")},
                {"system", cfg.system.name()},
                {"status", to_string(traj.status)},
                {"iterations_recorded", traj.size()},
                {"final_state", to_json(traj.back())},
                {"final_distance_to_equilibrium", to_json((traj.back() - eq).norm())}};
    return {{cfg.prefix + "_trajectory.csv", trajectory_csv(traj, {cfg.hash, "discrete"})},
            {cfg.prefix + "_summary.json", dump_json(doc)}};
}

OutputSet cmd_streamline(const ExperimentConfig& cfg, std::size_t* nan_cells, unsigned threads) {
    const GanSystem& sys = cfg.system;
    const RunConfig& r = cfg.run;
    const Vec base = r.base_point ? r.base_point->flat() : sys.equilibrium().flat();
    const auto names = sys.param_names();
    const std::string xn = names[static_cast<std::size_t>(r.x_axis.index)];
    const std::string yn = names[static_cast<std::size_t>(r.y_axis.index)];

    const std::size_t nx = static_cast<std::size_t>(r.x_axis.count), ny = static_cast<std::size_t>(r.y_axis.count);
    auto coord = [](const GridAxis& a, std::size_t i) { return a.min + (a.max - a.min) * static_cast<double>(i) / (a.count - 1); };
    // Cells are independent field evaluations; each worker fills a strided
    // subset and the text is assembled afterwards in grid order.
    std::vector<std::array<double, 2>> cells(nx * ny);
    auto work = [&](std::size_t first, std::size_t stride) {
        for (std::size_t c = first; c < cells.size(); c += stride) {
            Vec p = base;
            p(r.x_axis.index) = coord(r.x_axis, c % nx);
            p(r.y_axis.index) = coord(r.y_axis, c / nx);
            double dx = std::numeric_limits<double>::quiet_NaN(), dy = dx;
            try {
                const Vec h = sys.field_flat(p);
                if (h.allFinite()) {
                    dx = h(r.x_axis.index);
                    dy = h(r.y_axis.index);
                }
            } catch (const Error&) {
            }
            cells[c] = {dx, dy};
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cells.size())));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
        for (auto& t : pool) t.join();
    }

    std::ostringstream body;
    std::size_t bad = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto [dx, dy] = cells[c];
        if (std::isnan(dx)) ++bad;
        body << format_number(coord(r.x_axis, c % nx)) << "," << format_number(coord(r.y_axis, c / nx)) << ","
             << format_number(dx) << "," << format_number(dy) << "\n";
    }
    std::ostringstream os;
    os << "# artifact_version: " << version() << "\n";
    os << "# config_hash: " << cfg.hash << "\n";
    os << "# kind: streamline\n";
    os << "# system: " << sys.name() << "\n";
    os << "# nan_cells: " << bad << "\n";
    os << xn << "," << yn << ",d_" << xn << ",d_" << yn << "\n";
    os << body.str();
    if (nan_cells) *nan_cells = bad;
    return {{cfg.prefix + "_streamline.csv", os.str()}};
}

OutputSet cmd_stability(const ExperimentConfig& cfg) {
    AnalysisOptions opts;
    opts.certificate = cfg.run.certificate;
    opts.fd_step = cfg.run.fd_step;
    const SystemAnalysis a = analyze_system(cfg.system, opts);
    Json doc = {{"_meta", meta_block(cfg.hash, "stability")}, {"system", cfg.system.name()}};
    const Json body = to_json(a);
    for (const auto& item : body.items()) doc[item.key()] = item.value();
    return {{cfg.prefix + "_stability.json", dump_json(doc)}};
}

OutputSet run_experiment(const ExperimentConfig& cfg, std::size_t* nan_cells, unsigned threads) {
    const std::string& k = cfg.run.kind;
    if (k == "simulate") return cmd_simulate(cfg);
    if (k == "discrete") return cmd_discrete(cfg);
    if (k == "streamline") return cmd_streamline(cfg, nan_cells, threads);
    if (k == "stability") return cmd_stability(cfg);
    throw ConfigError("run.kind: unsupported '" + k + "'");
}

std::string resolve_output_dir(const std::string& cli_out, const std::string& config_dir) {
    if (!cli_out.empty()) return cli_out;
    if (!config_dir.empty()) return config_dir;
    if (const char* env = std::getenv("GANSTAB_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

std::vector<std::string> write_outputs(const std::string& dir, const OutputSet& files) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto& [name, text] : files) {
        const std::string path = (std::filesystem::path(dir) / name).string();
        write_text_file(path, text);
        paths.push_back(path);
    }
    return paths;
}

}  // namespace ganstab::tools
