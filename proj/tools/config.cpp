#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ganstab/errors.hpp"

namespace ganstab::tools {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void check_keys(const Json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) fail(where, "unknown key '" + item.key() + "'");
}

const Json& require(const Json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) fail(where, "missing required key '" + key + "'");
    return obj.at(key);
}

double as_number(const Json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    return v.get<double>();
}

double req_number(const Json& obj, const std::string& where, const std::string& key) {
    return as_number(require(obj, where, key), where + "." + key);
}

double opt_number(const Json& obj, const std::string& where, const std::string& key, double fallback) {
    return obj.contains(key) ? as_number(obj.at(key), where + "." + key) : fallback;
}

std::int64_t as_integer(const Json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t opt_integer(const Json& obj, const std::string& where, const std::string& key, std::int64_t fallback) {
    return obj.contains(key) ? as_integer(obj.at(key), where + "." + key) : fallback;
}

bool opt_bool(const Json& obj, const std::string& where, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail(where + "." + key, "expected true or false");
    return obj.at(key).get<bool>();
}

std::string req_string(const Json& obj, const std::string& where, const std::string& key) {
    const Json& v = require(obj, where, key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

Vec as_vector(const Json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of numbers");
    Vec out(static_cast<Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = as_number(v[i], where);
    return out;
}

Mat as_matrix(const Json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) fail(where, "expected a non-empty array of rows");
    const std::size_t cols = v[0].is_array() ? v[0].size() : 0;
    if (cols == 0) fail(where, "expected a non-empty array of rows");
    Mat out(static_cast<Index>(v.size()), static_cast<Index>(cols));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_array() || v[i].size() != cols) fail(where, "rows must have equal length");
        for (std::size_t j = 0; j < cols; ++j)
            out(static_cast<Index>(i), static_cast<Index>(j)) = as_number(v[i][j], where);
    }
    return out;
}

std::vector<Index> as_index_list(const Json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of indices");
    std::vector<Index> out;
    for (const auto& e : v) out.push_back(static_cast<Index>(as_integer(e, where)));
    return out;
}

ParamPoint as_point(const Json& v, const std::string& where, const GanSystem& sys) {
    check_keys(v, where, {"theta_d", "theta_g"});
    ParamPoint p{as_vector(require(v, where, "theta_d"), where + ".theta_d"),
                 as_vector(require(v, where, "theta_g"), where + ".theta_g")};
    if (p.theta_d.size() != sys.n_d() || p.theta_g.size() != sys.n_g()) {
        std::ostringstream os;
        os << "expected " << sys.n_d() << " discriminator and " << sys.n_g() << " generator parameters";
        fail(where, os.str());
    }
    if (!sys.admissible(p)) fail(where, "point outside the admissible domain of " + sys.name());
    return p;
}

ExpectationMode parse_mode(const Json& v, const std::string& where, std::uint64_t seed) {
    const std::string kind = req_string(v, where, "kind");
    if (kind == "quadrature") {
        check_keys(v, where, {"kind", "nodes"});
        const auto nodes = opt_integer(v, where, "nodes", 64);
        if (nodes < 2 || nodes > 512) fail(where + ".nodes", "must lie in [2, 512]");
        return ExpectationMode::quadrature(static_cast<int>(nodes));
    }
    if (kind == "monte_carlo") {
        check_keys(v, where, {"kind", "samples", "offset"});
        const auto samples = as_integer(require(v, where, "samples"), where + ".samples");
        const auto offset = opt_integer(v, where, "offset", 0);
        if (samples < 2) fail(where + ".samples", "must be >= 2");
        if (offset < 0) fail(where + ".offset", "must be >= 0");
        return ExpectationMode::monte_carlo(seed, static_cast<std::size_t>(samples),
                                            static_cast<std::size_t>(offset));
    }
    fail(where + ".kind", "expected 'quadrature' or 'monte_carlo', got '" + kind + "'");
}

LossFn parse_loss(const Json& sys, const std::string& where) {
    const std::string name = req_string(sys, where, "loss");
    if (name != "logistic" && name != "wgan") fail(where + ".loss", "expected 'logistic' or 'wgan', got '" + name + "'");
    return LossFn::from_name(name);
}

GanSystem parse_base_system(const Json& s, std::uint64_t seed) {
    const std::string where = "system";
    const std::string name = req_string(s, where, "name");
    if (name == "scalar_wgan_lq") {
        check_keys(s, where, {"name", "sigma", "wrap"});
        const double sigma = req_number(s, where, "sigma");
        if (!(sigma > 0.0)) fail(where + ".sigma", "must be > 0");
        return scalar_wgan_lq(sigma);
    }
    if (name == "wgan_lq_nd" || name == "gan_lq_nd") {
        const bool gan = name == "gan_lq_nd";
        if (gan)
            check_keys(s, where, {"name", "sigma", "mu", "loss", "expectation", "wrap"});
        else
            check_keys(s, where, {"name", "sigma", "mu", "wrap"});
        const Mat sigma = as_matrix(require(s, where, "sigma"), where + ".sigma");
        const Vec mu = as_vector(require(s, where, "mu"), where + ".mu");
        if (sigma.rows() != sigma.cols() || sigma.rows() != mu.size())
            fail(where, "sigma must be n x n and mu of length n");
        if (!numkit::is_symmetric(sigma) || !numkit::is_spd(sigma)) fail(where + ".sigma", "must be SPD");
        if (!gan) return wgan_lq_nd(sigma, mu);
        const ExpectationMode mode = parse_mode(require(s, where, "expectation"), where + ".expectation", seed);
        if (mode.kind == ExpectationMode::Kind::quadrature && mu.size() != 1)
            fail(where + ".expectation", "quadrature mode supports n = 1 only");
        return gan_lq_nd(sigma, mu, parse_loss(s, where), mode);
    }
    if (name == "uniform_2d") {
        check_keys(s, where, {"name", "loss", "nodes", "wrap"});
        const auto nodes = opt_integer(s, where, "nodes", 64);
        if (nodes < 2 || nodes > 512) fail(where + ".nodes", "must lie in [2, 512]");
        return uniform_2d(parse_loss(s, where), static_cast<int>(nodes));
    }
    if (name == "dirac_linear") {
        check_keys(s, where, {"name", "loss", "wrap"});
        return dirac_linear(parse_loss(s, where));
    }
    if (name == "feature_linear_gaussian") {
        check_keys(s, where, {"name", "loss", "expectation", "wrap"});
        return feature_linear_gaussian(parse_loss(s, where),
                                       parse_mode(require(s, where, "expectation"), where + ".expectation", seed));
    }
    fail(where + ".name", "unknown system '" + name + "'");
}

}  // namespace

GanSystem build_system(const Json& s, const Json* transform, std::uint64_t seed) {
    try {
        GanSystem sys = parse_base_system(s, seed);
        if (s.contains("wrap")) {
            const Json& w = s.at("wrap");
            check_keys(w, "system.wrap", {"dup_d", "dup_g", "split"});
            const auto dd = w.contains("dup_d") ? as_index_list(w.at("dup_d"), "system.wrap.dup_d") : std::vector<Index>{};
            const auto dg = w.contains("dup_g") ? as_index_list(w.at("dup_g"), "system.wrap.dup_g") : std::vector<Index>{};
            const double split = opt_number(w, "system.wrap", "split", 0.5);
            sys = redundant_wrap(sys, dd, dg, split);
        }
        if (transform) {
            check_keys(*transform, "transform", {"kind", "eta"});
            const std::string kind = req_string(*transform, "transform", "kind");
            if (kind == "none") {
                if (transform->contains("eta")) fail("transform", "'eta' is not used with kind 'none'");
            } else if (kind == "regularize" || kind == "unroll1") {
                const double eta = req_number(*transform, "transform", "eta");
                if (!(eta >= 0.0)) fail("transform.eta", "must be >= 0");
                sys = kind == "regularize" ? regularize(sys, eta) : unroll1(sys, eta);
            } else {
                fail("transform.kind", "expected 'none', 'regularize' or 'unroll1', got '" + kind + "'");
            }
        }
        return sys;
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

namespace {

IntegratorCfg parse_integrator(const Json& v) {
    const std::string where = "run.integrator";
    check_keys(v, where, {"method", "rtol", "atol", "step", "t_max", "max_steps"});
    IntegratorCfg c;
    const std::string method = req_string(v, where, "method");
    if (method == "dormand_prince") {
        c.method = IntegratorCfg::Method::dormand_prince;
        c.step = opt_number(v, where, "step", 0.0);
    } else if (method == "rk4") {
        c.method = IntegratorCfg::Method::rk4_fixed;
        c.step = req_number(v, where, "step");
    } else {
        fail(where + ".method", "expected 'dormand_prince' or 'rk4', got '" + method + "'");
    }
    c.rtol = opt_number(v, where, "rtol", c.rtol);
    c.atol = opt_number(v, where, "atol", c.atol);
    c.t_max = req_number(v, where, "t_max");
    const auto ms = opt_integer(v, where, "max_steps", static_cast<std::int64_t>(c.max_steps));
    if (ms < 1) fail(where + ".max_steps", "must be >= 1");
    c.max_steps = static_cast<std::size_t>(ms);
    try {
        c.validate();
    } catch (const Error& e) {
        fail(where, e.what());
    }
    return c;
}

Vec target_point(const Json& v, const std::string& where, const GanSystem& sys) {
    if (v.is_string()) {
        if (v.get<std::string>() != "equilibrium") fail(where, "expected 'equilibrium' or a point");
        return sys.equilibrium().flat();
    }
    return as_point(v, where, sys).flat();
}

EventConfig parse_event(const Json& v, const std::string& where, const GanSystem& sys) {
    const std::string type = req_string(v, where, "type");
    const Index dim = sys.dim();
    auto index_in_range = [&](std::int64_t i, const std::string& at) {
        if (i < 0 || i >= dim) fail(at, "coordinate index out of range");
        return static_cast<Index>(i);
    };
    if (type == "convergence") {
        check_keys(v, where, {"type", "target", "tol", "window", "terminal"});
        Convergence c;
        c.target = target_point(require(v, where, "target"), where + ".target", sys);
        c.tol = req_number(v, where, "tol");
        const auto window = opt_integer(v, where, "window", 20);
        if (window < 1) fail(where + ".window", "must be >= 1");
        c.window = static_cast<std::size_t>(window);
        c.terminal = opt_bool(v, where, "terminal", false);
        return {type, c};
    }
    if (type == "section") {
        check_keys(v, where, {"type", "index", "value", "direction", "terminal", "max_count"});
        SectionCrossing s;
        s.index = index_in_range(as_integer(require(v, where, "index"), where + ".index"), where + ".index");
        s.value = req_number(v, where, "value");
        const auto dir = opt_integer(v, where, "direction", 0);
        if (dir < -1 || dir > 1) fail(where + ".direction", "must be -1, 0 or 1");
        s.direction = static_cast<int>(dir);
        s.terminal = opt_bool(v, where, "terminal", false);
        const auto mc = opt_integer(v, where, "max_count", 0);
        if (mc < 0) fail(where + ".max_count", "must be >= 0");
        s.max_count = static_cast<std::size_t>(mc);
        return {type, s};
    }
    if (type == "return") {
        check_keys(v, where, {"type", "tol", "t_min", "terminal"});
        ReturnToStart r;
        r.tol = req_number(v, where, "tol");
        r.t_min = req_number(v, where, "t_min");
        r.terminal = opt_bool(v, where, "terminal", false);
        return {type, r};
    }
    if (type == "radius") {
        // Squared distance to `center` over `indices`; optional guard coordinate sign.
        check_keys(v, where, {"type", "center", "indices", "guard_index", "guard_sign", "tol"});
        const Vec center = target_point(require(v, where, "center"), where + ".center", sys);
        std::vector<Index> idx;
        if (v.contains("indices")) {
            for (Index i : as_index_list(v.at("indices"), where + ".indices")) idx.push_back(index_in_range(i, where));
        } else {
            for (Index i = 0; i < dim; ++i) idx.push_back(i);
        }
        RadiusMonotonicity r;
        r.radius = [center, idx](const Vec& x) {
            double acc = 0.0;
            for (Index i : idx) acc += (x(i) - center(i)) * (x(i) - center(i));
            return acc;
        };
        if (v.contains("guard_index")) {
            const Index g = index_in_range(as_integer(v.at("guard_index"), where + ".guard_index"), where);
            const auto sign = opt_integer(v, where, "guard_sign", 1);
            if (sign != 1 && sign != -1) fail(where + ".guard_sign", "must be 1 or -1");
            r.guard = [g, sign](const Vec& x) { return static_cast<double>(sign) * x(g) > 0.0; };
        }
        r.tol = opt_number(v, where, "tol", 1e-9);
        return {type, r};
    }
    fail(where + ".type", "unknown event type '" + type + "'");
}

GridAxis parse_axis(const Json& v, const std::string& where, const GanSystem& sys) {
    check_keys(v, where, {"index", "min", "max", "count"});
    GridAxis a;
    const auto i = as_integer(require(v, where, "index"), where + ".index");
    if (i < 0 || i >= sys.dim()) fail(where + ".index", "coordinate index out of range");
    a.index = static_cast<Index>(i);
    a.min = req_number(v, where, "min");
    a.max = req_number(v, where, "max");
    const auto count = opt_integer(v, where, "count", 41);
    if (count < 2 || count > 2001) fail(where + ".count", "must lie in [2, 2001]");
    a.count = static_cast<int>(count);
    if (!(a.max > a.min)) fail(where, "max must exceed min");
    return a;
}

std::vector<std::string> parse_monitors(const Json& v, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array of monitor names");
    std::vector<std::string> out;
    for (const auto& m : v) {
        if (!m.is_string()) fail(where, "expected monitor names");
        const std::string name = m.get<std::string>();
        if (name != "field_norm" && name != "distance") fail(where, "unknown monitor '" + name + "'");
        out.push_back(name);
    }
    return out;
}

RunConfig parse_run(const Json& v, const GanSystem& sys) {
    const std::string where = "run";
    RunConfig r;
    r.kind = req_string(v, where, "kind");
    if (r.kind == "simulate") {
        check_keys(v, where, {"kind", "x0", "integrator", "events", "monitors"});
        r.x0 = as_point(require(v, where, "x0"), where + ".x0", sys);
        r.integrator = parse_integrator(require(v, where, "integrator"));
        if (v.contains("events")) {
            const Json& ev = v.at("events");
            if (!ev.is_array()) fail(where + ".events", "expected an array");
            for (std::size_t i = 0; i < ev.size(); ++i)
                r.events.push_back(parse_event(ev[i], where + ".events[" + std::to_string(i) + "]", sys));
        }
        if (v.contains("monitors")) r.monitors = parse_monitors(v.at("monitors"), where + ".monitors");
    } else if (r.kind == "discrete") {
        check_keys(v, where, {"kind", "x0", "alpha", "steps", "noise_sigma", "record_every", "monitors"});
        r.x0 = as_point(require(v, where, "x0"), where + ".x0", sys);
        r.alpha = req_number(v, where, "alpha");
        if (!(r.alpha > 0.0)) fail(where + ".alpha", "must be > 0");
        const auto steps = as_integer(require(v, where, "steps"), where + ".steps");
        if (steps < 1) fail(where + ".steps", "must be >= 1");
        r.steps = static_cast<std::size_t>(steps);
        r.noise_sigma = opt_number(v, where, "noise_sigma", 0.0);
        if (!(r.noise_sigma >= 0.0)) fail(where + ".noise_sigma", "must be >= 0");
        const auto every = opt_integer(v, where, "record_every", 1);
        if (every < 1) fail(where + ".record_every", "must be >= 1");
        r.record_every = static_cast<std::size_t>(every);
        if (v.contains("monitors")) r.monitors = parse_monitors(v.at("monitors"), where + ".monitors");
    } else if (r.kind == "streamline") {
        check_keys(v, where, {"kind", "grid", "base"});
        r.x_axis = {0, -1.0, 1.0, 41};
        r.y_axis = {1, 0.2, 1.8, 41};
        if (v.contains("grid")) {
            const Json& g = v.at("grid");
            check_keys(g, where + ".grid", {"x", "y"});
            r.x_axis = parse_axis(require(g, where + ".grid", "x"), where + ".grid.x", sys);
            r.y_axis = parse_axis(require(g, where + ".grid", "y"), where + ".grid.y", sys);
        } else if (sys.dim() < 2) {
            fail(where, "streamline needs a system with at least two coordinates");
        }
        if (r.x_axis.index == r.y_axis.index) fail(where + ".grid", "the two free coordinates must differ");
        if (v.contains("base")) {
            const Json& b = v.at("base");
            check_keys(b, where + ".base", {"theta_d", "theta_g"});
            r.base_point = ParamPoint{as_vector(require(b, where + ".base", "theta_d"), where + ".base.theta_d"),
                                      as_vector(require(b, where + ".base", "theta_g"), where + ".base.theta_g")};
            if (r.base_point->theta_d.size() != sys.n_d() || r.base_point->theta_g.size() != sys.n_g())
                fail(where + ".base", "dimension mismatch");
        }
    } else if (r.kind == "stability") {
        check_keys(v, where, {"kind", "certificate", "fd_step"});
        r.certificate = opt_bool(v, where, "certificate", false);
        r.fd_step = opt_number(v, where, "fd_step", 0.0);
        if (r.fd_step < 0.0) fail(where + ".fd_step", "must be >= 0");
    } else {
        fail(where + ".kind", "expected 'simulate', 'discrete', 'streamline' or 'stability', got '" + r.kind + "'");
    }
    return r;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::optional<std::uint64_t> seed_override) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(doc, "config", {"system", "transform", "run", "seed", "output"});
    std::uint64_t seed = 0;
    if (doc.contains("seed")) {
        const auto s = as_integer(doc.at("seed"), "config.seed");
        if (s < 0) fail("config.seed", "must be >= 0");
        seed = static_cast<std::uint64_t>(s);
    }
    if (seed_override) {
        seed = *seed_override;
        doc["seed"] = seed;
    }
    const Json* transform = doc.contains("transform") ? &doc.at("transform") : nullptr;
    ExperimentConfig cfg{build_system(require(doc, "config", "system"), transform, seed), {}, 0, {}, "run", {}};
    cfg.seed = seed;
    cfg.run = parse_run(require(doc, "config", "run"), cfg.system);
    if (doc.contains("output")) {
        const Json& o = doc.at("output");
        check_keys(o, "output", {"dir", "prefix"});
        if (o.contains("dir")) cfg.output_dir = req_string(o, "output", "dir");
        if (o.contains("prefix")) {
            cfg.prefix = req_string(o, "output", "prefix");
            if (cfg.prefix.empty() || cfg.prefix.find_first_of("/\\") != std::string::npos)
                fail("output.prefix", "must be a non-empty file name stem");
        }
    }
    cfg.hash = fnv1a_hex(nlohmann::json(doc).dump());
    return cfg;
}

ExperimentConfig load_config(const std::string& path, std::optional<std::uint64_t> seed_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), seed_override);
}

}  // namespace ganstab::tools
