#include "qkr/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace qkr {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

[[noreturn]] void fail(const std::string& name, int line, const std::string& msg) {
    throw ConfigError(name + ":" + std::to_string(line) + ": " + msg);
}

double num(const std::string& name, int line, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const double x = std::strtod(p, &end);
    if (end == p || *end != '\0') fail(name, line, "expected a number, got '" + v + "'");
    return x;
}

int integer(const std::string& name, int line, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const long x = std::strtol(p, &end, 10);
    if (end == p || *end != '\0') fail(name, line, "expected an integer, got '" + v + "'");
    return static_cast<int>(x);
}

std::uint64_t u64(const std::string& name, int line, const std::string& v) {
    const char* p = v.c_str();
    char* end = nullptr;
    const unsigned long long x = std::strtoull(p, &end, 10);
    if (end == p || *end != '\0' || v.front() == '-')
        fail(name, line, "expected an unsigned integer, got '" + v + "'");
    return x;
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    std::stringstream ss(v);
    while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
    return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::string& name) {
    RunConfig cfg;
    std::string section;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto h = line.find_first_of("#;"); h != std::string::npos)
            line = line.substr(0, h);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') fail(name, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "simulation" && section != "sweep")
                fail(name, lineno, "unknown section '" + section + "'");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(name, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) fail(name, lineno, "empty key");
        if (val.empty()) fail(name, lineno, "empty value for '" + key + "'");
        if (section.empty()) fail(name, lineno, "'" + key + "' appears outside a section");
        if (!seen.insert(section + "." + key).second)
            fail(name, lineno, "duplicate key '" + key + "'");

        if (section == "simulation") {
            if (key == "K") cfg.sim.K = num(name, lineno, val);
            else if (key == "kbar") cfg.sim.kbar = num(name, lineno, val);
            else if (key == "pi") cfg.sim.se_prob = num(name, lineno, val);
            else if (key == "delta") cfg.sim.delta = num(name, lineno, val);
            else if (key == "n_kicks") cfg.sim.n_kicks = integer(name, lineno, val);
            else if (key == "n_traj") cfg.sim.n_traj = integer(name, lineno, val);
            else if (key == "n_max") cfg.sim.n_max = integer(name, lineno, val);
            else if (key == "seed") cfg.sim.seed = u64(name, lineno, val);
            else if (key == "checkpoints") {
                cfg.sim.checkpoints.clear();
                for (const auto& item : split_list(val))
                    cfg.sim.checkpoints.push_back(integer(name, lineno, item));
            } else {
                fail(name, lineno, "unknown key '" + key + "' in [simulation]");
            }
        } else {  // sweep
            if (key == "pi_values") {
                cfg.sweep_pi.clear();
                for (const auto& item : split_list(val))
                    cfg.sweep_pi.push_back(num(name, lineno, item));
                if (cfg.sweep_pi.empty()) fail(name, lineno, "pi_values is empty");
            } else {
                fail(name, lineno, "unknown key '" + key + "' in [sweep]");
            }
        }
    }

    cfg.sim.validate();
    for (double pi : cfg.sweep_pi)
        if (!(pi >= 0.0 && pi <= 1.0))
            throw ConfigError(name + ": sweep pi value " + std::to_string(pi) +
                              " outside [0, 1]");
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open config: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

}  // namespace qkr
