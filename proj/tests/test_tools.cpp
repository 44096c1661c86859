#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "acceptance.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "ganstab/serialize.hpp"

using namespace ganstab;
using namespace ganstab::tools;

namespace {

const char* const kOrbit = R"({
  "system": {"name": "scalar_wgan_lq", "sigma": 1.0},
  "run": {"kind": "simulate", "x0": {"theta_d": [0, 0], "theta_g": [0.9, 0]},
          "integrator": {"method": "dormand_prince", "rtol": 1e-10, "atol": 1e-12, "t_max": 20},
          "events": [{"type": "section", "index": 0, "value": 0, "direction": 1, "terminal": true, "max_count": 1}]},
  "seed": 3
})";

std::string streamline_config(const std::string& loss, double eta) {
    std::ostringstream os;
    os << R"({"system": {"name": "uniform_2d", "loss": ")" << loss << R"("},)";
    if (eta > 0) os << R"("transform": {"kind": "regularize", "eta": )" << eta << "},";
    os << R"("run": {"kind": "streamline"}})";
    return os.str();
}

struct Csv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

Csv parse_csv(const std::string& text) {
    Csv c;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        if (line.rfind("#", 0) == 0) {
            c.comments.push_back(line);
        } else if (c.header.empty()) {
            c.header = split(line);
        } else {
            std::vector<double> row;
            for (const auto& cell : split(line)) row.push_back(std::stod(cell));
            c.rows.push_back(row);
        }
    }
    return c;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1e-10), "1e-10");
    EXPECT_EQ(format_number(100.0), "100");
    EXPECT_EQ(format_number(-2.5), "-2.5");
    EXPECT_EQ(format_number(std::nan("")), "nan");
    EXPECT_EQ(format_number(-INFINITY), "-inf");
    for (double x : {1.0 / 3, M_PI, 6.02214076e23, 5e-324}) EXPECT_EQ(std::strtod(format_number(x).c_str(), nullptr), x);
}

TEST(Format, HashAndJson) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
    EXPECT_TRUE(to_json(std::nan("")).is_null());
    const Json j = {{"b", 1}, {"a", 0.1}};
    EXPECT_EQ(dump_json(j), "{\n  \"b\": 1,\n  \"a\": 0.1\n}\n");
}

TEST(Config, ParsesAndHashes) {
    const ExperimentConfig a = parse_config(kOrbit);
    EXPECT_EQ(a.system.name(), "scalar_wgan_lq");
    EXPECT_EQ(a.seed, 3u);
    EXPECT_EQ(a.run.kind, "simulate");
    EXPECT_EQ(a.hash.size(), 16u);
    EXPECT_EQ(parse_config(kOrbit).hash, a.hash);
    const ExperimentConfig b = parse_config(kOrbit, 9);
    EXPECT_EQ(b.seed, 9u);
    EXPECT_NE(b.hash, a.hash);
}

TEST(Config, RejectsMalformedInput) {
    EXPECT_THROW(parse_config("{"), ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "scalar_wgan_lq", "sigma": 1}, "run": {"kind": "stability"}, "extra": 1})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "scalar_wgan_lq"}, "run": {"kind": "stability"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "nope"}, "run": {"kind": "stability"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "uniform_2d", "loss": "wgan"},
                                  "transform": {"kind": "regularize"}, "run": {"kind": "stability"}})"),
                 ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "uniform_2d", "loss": "wgan"}, "run": {"kind": "fly"}})"), ConfigError);
    EXPECT_THROW(parse_config(R"({"system": {"name": "scalar_wgan_lq", "sigma": -1}, "run": {"kind": "stability"}})"),
                 ConfigError);
    EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Commands, OrbitClosesAtFirstUpcrossing) {
    const OutputSet out = run_experiment(parse_config(kOrbit));
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].first, "run_trajectory.csv");
    const Csv csv = parse_csv(out[0].second);
    ASSERT_GE(csv.comments.size(), 2u);
    EXPECT_NE(csv.comments[1].find(parse_config(kOrbit).hash), std::string::npos);
    EXPECT_EQ(csv.header, (std::vector<std::string>{"t", "w2", "w1", "a", "b"}));
    const auto& first = csv.rows.front();
    const auto& last = csv.rows.back();
    double d = 0;
    for (std::size_t i = 1; i < first.size(); ++i) d = std::max(d, std::abs(first[i] - last[i]));
    EXPECT_LE(d, 1e-6);
    const Json ev = Json::parse(out[1].second);
    EXPECT_EQ(ev["status"], "stopped_by_event");
    EXPECT_EQ(ev["_meta"]["config_hash"], parse_config(kOrbit).hash);
}

TEST(Commands, ConvergenceEventReported) {
    const ExperimentConfig c = parse_config(R"({
      "system": {"name": "uniform_2d", "loss": "logistic"},
      "run": {"kind": "simulate", "x0": {"theta_d": [0.2], "theta_g": [0.8]},
              "integrator": {"method": "dormand_prince", "t_max": 300},
              "events": [{"type": "convergence", "target": "equilibrium", "tol": 1e-3}]}})");
    const Json ev = Json::parse(run_experiment(c)[1].second);
    bool found = false;
    for (const auto& e : ev["events"]) found |= e["kind"] == "convergence";
    EXPECT_TRUE(found);
}

TEST(Commands, DiscreteRun) {
    const ExperimentConfig c = parse_config(R"({
      "system": {"name": "uniform_2d", "loss": "logistic"},
      "run": {"kind": "discrete", "x0": {"theta_d": [0.2], "theta_g": [0.8]}, "alpha": 0.01, "steps": 20000,
              "record_every": 100}})");
    const OutputSet out = run_experiment(c);
    const Json s = Json::parse(out[1].second);
    EXPECT_LT(s["final_distance_to_equilibrium"].get<double>(), 1e-3);
    EXPECT_EQ(s["iterations_recorded"], 201);
}

TEST(Streamline, DefaultGridAndAntisymmetry) {
    const ExperimentConfig c = parse_config(streamline_config("wgan", 0));
    std::size_t nan = 7;
    const Csv g = parse_csv(run_experiment(c, &nan)[0].second);
    EXPECT_EQ(nan, 0u);
    EXPECT_EQ(g.header, (std::vector<std::string>{"w2", "a", "d_w2", "d_a"}));
    ASSERT_EQ(g.rows.size(), 41u * 41u);
    EXPECT_EQ(g.rows.front()[0], -1.0);
    EXPECT_EQ(g.rows.front()[1], 0.2);
    EXPECT_EQ(g.rows.back()[1], 1.8);
    // Row-major in a with w2 fastest: the mirror of column i is column 40 - i.
    for (std::size_t r = 0; r < 41; ++r)
        for (std::size_t i = 0; i < 41; ++i) {
            const auto& p = g.rows[r * 41 + i];
            const auto& q = g.rows[r * 41 + 40 - i];
            EXPECT_NEAR(p[2], q[2], 1e-15);
            EXPECT_NEAR(p[3], -q[3], 1e-15);
        }
}

TEST(Streamline, RegularizedWganSpiralsInward) {
    const Csv g = parse_csv(run_experiment(parse_config(streamline_config("wgan", 1.0)))[0].second);
    for (const auto& row : g.rows) {
        const double w2 = row[0], a = row[1];
        if (!(a > 0.5 && a < 1.5) || std::hypot(w2, a - 1) <= 1e-3) continue;
        const double radial = w2 * row[2] + (a - 1) * row[3];
        // On the a = 1 row the field is purely tangential.
        if (std::abs(a - 1) < 1e-12)
            EXPECT_NEAR(radial, 0.0, 1e-15);
        else
            EXPECT_LT(radial, 0.0) << "w2=" << w2 << " a=" << a;
    }
}

TEST(Streamline, AllPanelsAndThreadInvariance) {
    for (const char* loss : {"logistic", "wgan"})
        for (double eta : {0.0, 0.25, 0.5, 1.0}) {
            const ExperimentConfig c = parse_config(streamline_config(loss, eta));
            std::size_t nan = 1;
            const std::string one = run_experiment(c, &nan, 1)[0].second;
            EXPECT_EQ(nan, 0u);
            EXPECT_EQ(run_experiment(c, nullptr, 3)[0].second, one);
        }
}

TEST(Streamline, DegenerateRowFlagged) {
    const ExperimentConfig c = parse_config(R"({"system": {"name": "uniform_2d", "loss": "wgan"},
      "run": {"kind": "streamline", "grid": {"x": {"index": 0, "min": -1, "max": 1, "count": 5},
                                             "y": {"index": 1, "min": 0, "max": 1, "count": 3}}}})");
    std::size_t nan = 0;
    const Csv g = parse_csv(run_experiment(c, &nan)[0].second);
    EXPECT_EQ(nan, 5u);
    EXPECT_TRUE(std::isnan(g.rows[0][2]));
    EXPECT_FALSE(std::isnan(g.rows[5][2]));
}

TEST(Commands, StabilityReports) {
    const Json g = Json::parse(run_experiment(parse_config(R"({
      "system": {"name": "gan_lq_nd", "loss": "logistic", "sigma": [[1, 0], [0, 2]], "mu": [1, 0],
                 "expectation": {"kind": "monte_carlo", "samples": 20000}},
      "run": {"kind": "stability"}, "seed": 1})"))[0].second);
    EXPECT_EQ(g["report"]["projection"]["hurwitz"], true);

    const Json d = Json::parse(run_experiment(parse_config(R"({"system": {"name": "dirac_linear", "loss": "logistic"},
                                                              "run": {"kind": "stability"}})"))[0].second);
    EXPECT_EQ(d["report"]["hurwitz"], false);
    EXPECT_EQ(d["report"]["zero_count"], 0);
    EXPECT_EQ(d["report"]["spectral_abscissa"], 0.0);

    for (double eta : {0.0, 0.5}) {
        std::string text = R"({"system": {"name": "uniform_2d", "loss": "wgan"},)";
        if (eta > 0) text += R"("transform": {"kind": "regularize", "eta": 0.5},)";
        text += R"("run": {"kind": "stability"}})";
        const Json w = Json::parse(run_experiment(parse_config(text))[0].second);
        EXPECT_EQ(w["report"]["hurwitz"], eta > 0);
    }
}

TEST(Commands, OutputDirectoryResolution) {
    EXPECT_EQ(resolve_output_dir("cli", "cfg"), "cli");
    EXPECT_EQ(resolve_output_dir("", "cfg"), "cfg");
    setenv("GANSTAB_OUTPUT_DIR", "env", 1);
    EXPECT_EQ(resolve_output_dir("", ""), "env");
    unsetenv("GANSTAB_OUTPUT_DIR");
    EXPECT_EQ(resolve_output_dir("", ""), ".");
}

TEST(Acceptance, Registry) {
    EXPECT_EQ(suite_criteria("full").size(), 12u);
    EXPECT_EQ(suite_criteria("core").size(), 11u);
    EXPECT_THROW(suite_criteria("nightly"), UnknownSuite);
    EXPECT_EQ(criterion_id("subspace_projection"), 7);
    EXPECT_EQ(criterion_id("3"), 3);
    EXPECT_EQ(criterion_id("13"), 0);
    EXPECT_EQ(criterion_key(1), "wgan_limit_cycle");
}

TEST(Acceptance, SingleCriterionArtifactIsDeterministic) {
    const CriterionResult a = run_criterion(6, {});
    const CriterionResult b = run_criterion(6, {});
    EXPECT_TRUE(a.pass());
    EXPECT_EQ(a.artifact(), b.artifact());
    EXPECT_EQ(summary_line(a).rfind("PASS criterion 06 lemma_sweep", 0), 0u);
}
