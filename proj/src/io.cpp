#include "qkr/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qkr/model.hpp"

namespace qkr::io {

namespace {

// Non-finite doubles have no JSON literal; encode them as strings.
nlohmann::json json_num(double x) {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return "nan";
    return x > 0 ? "inf" : "-inf";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.16e", x);
    return buf;
}

double parse_double(const std::string& s) {
    const char* p = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(p, &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    if (end == p || *end != '\0') throw ConfigError("not a number: '" + s + "'");
    return v;
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

void write_table(const std::string& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    for (std::size_t c = 0; c < t.header.size(); ++c)
        f << (c ? "," : "") << t.header[c];
    f << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols.size(); ++c)
            f << (c ? "," : "") << format_double(t.cols[c][r]);
        f << '\n';
    }
    if (!f) throw ConfigError("write failed: " + path);
}

Table read_table(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path);
    Table t;
    std::string line;
    if (!std::getline(f, line)) throw ConfigError(path + ": empty file");
    t.header = split_csv_line(line);
    t.cols.resize(t.header.size());
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != t.header.size())
            throw ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(t.header.size()) +
                              " columns, got " + std::to_string(cells.size()));
        for (std::size_t c = 0; c < cells.size(); ++c) {
            try {
                t.cols[c].push_back(parse_double(cells[c]));
            } catch (const ConfigError&) {
                throw ConfigError(path + ":" + std::to_string(lineno) + ": bad cell '" +
                                  cells[c] + "'");
            }
        }
    }
    return t;
}

void write_table_json(const std::string& path, const Table& t) {
    nlohmann::json j;
    j["columns"] = t.header;
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        auto arr = nlohmann::json::array();
        for (double v : t.cols[c]) arr.push_back(json_num(v));
        j["data"][t.header[c]] = std::move(arr);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
}

Table energy_table(const EnsembleResult& r) {
    Table t;
    t.header = {"t", "E_unfiltered", "E_filtered", "F0", "FDelta", "detected"};
    const std::size_t n = r.mean_energy.size();
    t.cols.assign(6, {});
    for (auto& c : t.cols) c.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.cols[0].push_back(static_cast<double>(i));
        t.cols[1].push_back(r.mean_energy[i]);
        t.cols[2].push_back(r.filtered_energy[i]);
        t.cols[3].push_back(r.pop_f0[i]);
        t.cols[4].push_back(r.pop_fdelta[i]);
        t.cols[5].push_back(static_cast<double>(r.detected_count[i]) /
                            static_cast<double>(r.params.n_traj));
    }
    return t;
}

Table dist_table(const EnsembleResult::CheckpointDist& d) {
    const double w = d.unfiltered.bin_width;
    auto idx_of = [w](double center) { return std::llround(center / w); };
    long long lo = 0, hi = -1;
    auto widen = [&](const MomentumDistribution& m) {
        if (m.center.empty()) return;
        const long long a = idx_of(m.center.front()), b = idx_of(m.center.back());
        if (hi < lo) {
            lo = a;
            hi = b;
        } else {
            lo = std::min(lo, a);
            hi = std::max(hi, b);
        }
    };
    widen(d.unfiltered);
    widen(d.filtered);

    Table t;
    t.header = {"P_over_kbar", "f_unfiltered", "f_filtered"};
    t.cols.assign(3, {});
    if (hi < lo) return t;
    const std::size_t n = static_cast<std::size_t>(hi - lo + 1);
    t.cols[0].resize(n);
    t.cols[1].assign(n, 0.0);
    t.cols[2].assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        t.cols[0][i] = static_cast<double>(lo + static_cast<long long>(i)) * w;
    auto fill = [&](const MomentumDistribution& m, std::size_t col) {
        for (std::size_t i = 0; i < m.center.size(); ++i)
            t.cols[col][static_cast<std::size_t>(idx_of(m.center[i]) - lo)] = m.prob[i];
    };
    fill(d.unfiltered, 1);
    fill(d.filtered, 2);
    return t;
}

Table model_table(const ModelParams& mp, int horizon) {
    Table t;
    t.header = {"t", "D0", "F0", "FDelta", "detected", "E0", "EDelta", "Ebar", "Ebar_approx"};
    t.cols.assign(t.header.size(), {});
    for (int k = 0; k <= horizon; ++k) {
        const double tt = k;
        t.cols[0].push_back(tt);
        t.cols[1].push_back(model::d0(tt, mp));
        t.cols[2].push_back(model::pop_f0(tt, mp));
        t.cols[3].push_back(model::pop_fdelta(tt, mp));
        t.cols[4].push_back(model::detected_fraction(tt, mp));
        t.cols[5].push_back(model::e0(tt, mp));
        t.cols[6].push_back(model::e_delta(tt, mp));
        t.cols[7].push_back(model::ebar(tt, mp));
        t.cols[8].push_back(model::ebar_approx(tt, mp));
    }
    return t;
}

Table classical_table(const analysis::ClassicalResult& r) {
    Table t;
    t.header = {"t", "E"};
    t.cols.assign(2, {});
    for (std::size_t i = 0; i < r.energy.size(); ++i) {
        t.cols[0].push_back(static_cast<double>(i));
        t.cols[1].push_back(r.energy[i]);
    }
    return t;
}

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path);
    std::uint64_t h = 14695981039346656037ULL;
    char buf[1 << 16];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0)
        h = fnv1a(buf, static_cast<std::size_t>(f.gcount()), h);
    return h;
}

nlohmann::json params_to_json(const SimParams& p) {
    return {{"K", p.K},          {"kbar", p.kbar},     {"pi", p.se_prob},
            {"delta", p.delta},  {"n_kicks", p.n_kicks}, {"n_traj", p.n_traj},
            {"n_max", p.n_max},  {"seed", p.seed},     {"checkpoints", p.checkpoints}};
}

nlohmann::json fit_to_json(const analysis::FitResult& f) {
    return {{"d_q", json_num(f.d_q)},
            {"t_s", json_num(f.t_s)},
            {"residual_norm", json_num(f.residual_norm)},
            {"n_evals", f.n_evals},
            {"converged", f.converged}};
}

nlohmann::json verdict_to_json(const analysis::ShapeVerdict& v) {
    return {{"verdict", analysis::to_string(v.verdict)},
            {"exp_amplitude", json_num(v.exp_amplitude)},
            {"p_loc", json_num(v.p_loc)},
            {"gauss_amplitude", json_num(v.gauss_amplitude)},
            {"sigma", json_num(v.sigma)},
            {"ssr_exp", json_num(v.ssr_exp)},
            {"ssr_gauss", json_num(v.ssr_gauss)}};
}

nlohmann::json model_summary_json(const ModelParams& mp) {
    return {{"d_q", mp.d_q},
            {"t_s", mp.t_s},
            {"pi", mp.se_prob},
            {"delta", mp.delta},
            {"tau_s", mp.tau_s()},
            {"d_infty", json_num(model::d_infty(mp))},
            {"t1", json_num(model::t1(mp))},
            {"t2_exact", json_num(model::t2_exact(mp))},
            {"t2_approx", json_num(model::t2_approx(mp))},
            {"d_r", json_num(model::d_r(mp))}};
}

std::uint64_t RunManifest::combined_hash() const {
    std::uint64_t h = 14695981039346656037ULL;
    for (const auto& [name, hash] : outputs) {
        h = fnv1a(name.data(), name.size(), h);
        unsigned char le[8];
        for (int i = 0; i < 8; ++i) le[i] = static_cast<unsigned char>(hash >> (8 * i));
        h = fnv1a(le, 8, h);
    }
    return h;
}

void write_manifest(const std::string& path, const RunManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["params"] = params_to_json(m.params);
    j["threads"] = m.threads;
    j["duration_seconds"] = m.duration_seconds;
    j["created_utc"] = m.created_utc;
    auto outs = nlohmann::json::object();
    char hex[19];
    for (const auto& [name, hash] : m.outputs) {
        std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
        outs[name] = hex;
    }
    j["outputs"] = outs;
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(m.combined_hash()));
    j["combined_hash"] = hex;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
}

}  // namespace qkr::io
