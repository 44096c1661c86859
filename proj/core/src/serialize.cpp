#include "ganstab/serialize.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ganstab/errors.hpp"

namespace ganstab {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* version() { return "0.1.0"; }

Json to_json(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json to_json(const Vec& v) {
    Json a = Json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
    return a;
}

Json to_json(const Mat& m) {
    Json a = Json::array();
    for (Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
    return a;
}

Json to_json(const numkit::Spectrum& s) {
    Json a = Json::array();
    for (const auto& l : s.values) a.push_back({{"re", to_json(l.real())}, {"im", to_json(l.imag())}});
    return a;
}

Json to_json(const ParamPoint& p) { return {{"theta_d", to_json(p.theta_d)}, {"theta_g", to_json(p.theta_g)}}; }

Json to_json(const BoundEntry& b) {
    return {{"name", b.name},     {"bound", to_json(b.bound)},   {"worst", to_json(b.worst)},
            {"checked", b.checked}, {"satisfied", b.satisfied}, {"asserted", b.asserted}};
}

Json to_json(const Projection& p) {
    return {{"t_d", to_json(p.t_d)},
            {"t_g", to_json(p.t_g)},
            {"projected_k_dd", to_json(p.projected.k_dd)},
            {"projected_k_dg", to_json(p.projected.k_dg)},
            {"jacobian", to_json(p.jacobian)},
            {"spectrum", to_json(p.spectrum)},
            {"hurwitz", p.hurwitz},
            {"trivially_stable", p.trivially_stable},
            {"wgan_path", p.wgan_path},
            {"left_null_residual", to_json(p.left_null_residual)},
            {"consistent", p.consistent}};
}

Json to_json(const StabilityReport& r) {
    Json j = {{"jacobian", to_json(r.jacobian)},
              {"spectrum", to_json(r.spectrum)},
              {"hurwitz", r.hurwitz},
              {"spectral_abscissa", to_json(r.spectral_abscissa)},
              {"zero_count", r.zero_count},
              {"zero_tol", to_json(r.zero_tol)}};
    Json bounds = Json::array();
    for (const auto& b : r.bounds) bounds.push_back(to_json(b));
    j["bounds"] = bounds;
    j["projection"] = r.projection ? to_json(*r.projection) : Json(nullptr);
    return j;
}

Json to_json(const LyapunovCertificate& c) {
    return {{"eta", to_json(c.eta)},
            {"threshold", to_json(c.threshold)},
            {"p", to_json(c.p)},
            {"q", to_json(c.q)},
            {"jacobian", to_json(c.jacobian)},
            {"residual", to_json(c.residual)},
            {"lyapunov_mismatch", to_json(c.lyapunov_mismatch)},
            {"q_min_eig", to_json(c.q_min_eig)},
            {"q_positive_definite", c.q_positive_definite},
            {"neighborhood_radius", to_json(c.neighborhood_radius)}};
}

Json to_json(const Event& e) {
    return {{"kind", e.kind}, {"t", to_json(e.t)}, {"state", to_json(e.state)}, {"value", to_json(e.value)}};
}

Json to_json(const EventLog& log) {
    Json events = Json::array();
    for (const auto& e : log.events) events.push_back(to_json(e));
    return {{"events", events},
            {"max_radius_decrease", to_json(log.max_radius_decrease)},
            {"min_return_distance", to_json(log.min_return_distance)}};
}

Json to_json(const SystemAnalysis& a) {
    Json j = {{"equilibrium", to_json(a.equilibrium)}};
    if (a.bundle) {
        j["bundle"] = {{"k_dd", to_json(a.bundle->k_dd)},
                       {"k_dg", to_json(a.bundle->k_dg)},
                       {"f1", to_json(a.bundle->f1)},
                       {"f2", to_json(a.bundle->f2)},
                       {"realizable", a.bundle->realizable}};
    } else {
        j["bundle"] = nullptr;
    }
    j["analytic_jacobian"] = a.analytic_jacobian ? to_json(*a.analytic_jacobian) : Json(nullptr);
    j["numeric_jacobian"] = to_json(a.numeric_jacobian);
    j["analytic_vs_numeric"] = to_json(a.analytic_vs_numeric);
    j["report"] = to_json(a.report);
    j["certificate"] = a.certificate ? to_json(*a.certificate) : Json(nullptr);
    j["notes"] = a.notes;
    return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

std::string trajectory_csv(const Trajectory& traj, const CsvMeta& meta) {
    std::ostringstream os;
    os << "# artifact_version: " << version() << "\n";
    os << "# config_hash: " << meta.config_hash << "\n";
    if (!meta.kind.empty()) os << "# kind: " << meta.kind << "\n";
    os << "# status: " << to_string(traj.status) << "\n";
    os << "t";
    for (const auto& n : traj.names) os << "," << n;
    for (const auto& m : traj.monitors) os << "," << m.first;
    os << "\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_number(traj.times[i]);
        for (Index k = 0; k < traj.states[i].size(); ++k) os << "," << format_number(traj.states[i](k));
        for (const auto& m : traj.monitors) os << "," << format_number(m.second[i]);
        os << "\n";
    }
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp + " for writing");
        out << text;
        if (!out) throw Error("write to " + tmp + " failed");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw Error("cannot rename " + tmp + " to " + path);
    }
}

}  // namespace ganstab
