#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "acceptance.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "ganstab/errors.hpp"

namespace {

using namespace ganstab;
using namespace ganstab::tools;

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPrecondition = 4;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string suite = "full";
    std::string criterion;
    unsigned threads = 1;
};

int run_config_command(const std::string& command, const Options& o) {
    const ExperimentConfig cfg = load_config(o.config, o.seed);
    const std::string& kind = cfg.run.kind;
    const bool ok = command == "simulate" ? (kind == "simulate" || kind == "discrete") : kind == command;
    if (!ok) throw ConfigError("run.kind '" + kind + "' cannot be used with the '" + command + "' subcommand");

    std::size_t nan_cells = 0;
    const OutputSet files = run_experiment(cfg, &nan_cells, o.threads);
    const std::string dir = resolve_output_dir(o.out, cfg.output_dir);
    for (const auto& path : write_outputs(dir, files)) std::cout << path << "\n";
    if (nan_cells) std::cerr << "warning: " << nan_cells << " grid cells could not be evaluated (NaN)\n";
    return 0;
}

int run_acceptance(const Options& o) {
    std::vector<int> ids;
    if (!o.criterion.empty()) {
        const int id = criterion_id(o.criterion);
        if (!id) throw UnknownSuite("unknown criterion '" + o.criterion + "'");
        ids = {id};
    } else {
        ids = suite_criteria(o.suite);
    }
    SuiteOptions opts;
    if (o.seed) opts.seed = *o.seed;
    const auto results = run_suite(ids, opts, &std::cout);

    const std::string dir = (std::filesystem::path(resolve_output_dir(o.out, "")) / "acceptance").string();
    OutputSet files;
    for (const auto& r : results) files.emplace_back(r.key + ".json", r.artifact());
    write_outputs(dir, files);

    std::size_t passed = 0;
    for (const auto& r : results) {
        if (r.pass())
            ++passed;
        else
            std::cout << "failing: criterion " << r.id << " " << r.key << "\n";
    }
    std::cout << passed << "/" << results.size() << " criteria passed; artifacts in " << dir << "\n";
    return passed == results.size() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local stability analysis of GAN training dynamics"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "Output directory");
        sub->add_option("--seed", seed, "Seed override");
    };
    for (const char* name : {"simulate", "streamline", "stability"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("Run a '") + name + "' config");
        sub->add_option("--config", o.config, "Experiment config (JSON)")->required();
        add_common(sub);
        if (std::string(name) == "streamline") sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 256u));
    }
    CLI::App* acc = app.add_subcommand("acceptance", "Run the acceptance suite");
    acc->add_option("--suite", o.suite, "Suite name (full, core)");
    acc->add_option("--criterion", o.criterion, "Single criterion (number or key)");
    add_common(acc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    for (CLI::App* sub : app.get_subcommands())
        if (sub->count("--seed")) o.seed = seed;

    try {
        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "acceptance") return run_acceptance(o);
        return run_config_command(command, o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnknownSuite& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPrecondition;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitFailure;
    }
}
