#include "lobq/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lobq {

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& v, const std::string& key) {
    const std::string t = trim(v);
    double out = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc() || p != t.data() + t.size() || std::isnan(out))
        throw std::invalid_argument("config: bad numeric value for '" + key + "': " + v);
    return out;
}

ResetDistribution parse_reset(const std::string& v, const std::string& key) {
    const std::string t = trim(v);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw std::invalid_argument("config: expected dist(args) for '" + key + "': " + v);
    const std::string name = trim(t.substr(0, open));
    const std::string args = t.substr(open + 1, t.size() - open - 2);
    ResetDistribution d;
    if (name == "lognormal") {
        const auto comma = args.find(',');
        if (comma == std::string::npos)
            throw std::invalid_argument("config: lognormal needs (median, dispersion)");
        d.kind = ResetDistribution::Kind::Lognormal;
        d.median = to_double(args.substr(0, comma), key);
        d.dispersion = to_double(args.substr(comma + 1), key);
        return d;
    }
    if (name == "fixed") {
        d.kind = ResetDistribution::Kind::Fixed;
        d.median = to_double(args, key);
        d.dispersion = 0.0;
        return d;
    }
    if (name == "empirical") {
        const std::string path = trim(args);
        std::ifstream f(path);
        if (!f) throw std::invalid_argument("config: cannot open empirical reset file " + path);
        d.kind = ResetDistribution::Kind::Empirical;
        double x = 0;
        while (f >> x) d.values.push_back(x);
        if (d.values.empty())
            throw std::invalid_argument("config: empirical reset file is empty: " + path);
        return d;
    }
    throw std::invalid_argument("config: unknown reset distribution '" + name + "'");
}

}  // namespace

void apply_override(ModelParams& p, const std::string& key, const std::string& value) {
    if (key == "rho_xy") p.corr.rho_xy = to_double(value, key);
    else if (key == "rho_xz") p.corr.rho_xz = to_double(value, key);
    else if (key == "rho_yz") p.corr.rho_yz = to_double(value, key);
    else if (key == "phi0") p.phi0 = to_double(value, key);
    else if (key == "sigma_b") p.sigma_b = to_double(value, key);
    else if (key == "sigma_a") p.sigma_a = to_double(value, key);
    else if (key == "tick") p.tick = to_double(value, key);
    else if (key == "spread") p.spread = to_double(value, key);
    else if (key == "depth") p.depth = to_double(value, key);
    else if (key == "reset_b_dist") p.reset_b = parse_reset(value, key);
    else if (key == "reset_a_dist") p.reset_a = parse_reset(value, key);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void parse_params_into(std::istream& is, ModelParams& p) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        apply_override(p, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

ModelParams parse_params(std::istream& is) {
    ModelParams p;
    parse_params_into(is, p);
    return p;
}

ModelParams load_params(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::invalid_argument("cannot open config file " + path);
    return parse_params(f);
}

void write_params(std::ostream& os, const ModelParams& p) {
    char buf[256];
    auto num = [&](const char* k, double v) {
        std::snprintf(buf, sizeof buf, "%s = %.17g\n", k, v);
        os << buf;
    };
    num("rho_xy", p.corr.rho_xy);
    num("rho_xz", p.corr.rho_xz);
    num("rho_yz", p.corr.rho_yz);
    num("phi0", p.phi0);
    num("sigma_b", p.sigma_b);
    num("sigma_a", p.sigma_a);
    auto dist = [&](const char* k, const ResetDistribution& d) {
        switch (d.kind) {
            case ResetDistribution::Kind::Lognormal:
                std::snprintf(buf, sizeof buf, "%s = lognormal(%.17g, %.17g)\n", k, d.median,
                              d.dispersion);
                break;
            case ResetDistribution::Kind::Fixed:
                std::snprintf(buf, sizeof buf, "%s = fixed(%.17g)\n", k, d.median);
                break;
            case ResetDistribution::Kind::Empirical:
                std::snprintf(buf, sizeof buf, "%s = empirical(...)  # %zu samples, not round-trippable\n",
                              k, d.values.size());
                break;
        }
        os << buf;
    };
    dist("reset_b_dist", p.reset_b);
    dist("reset_a_dist", p.reset_a);
    num("tick", p.tick);
    num("spread", p.spread);
    num("depth", p.depth);
}

}  // namespace lobq
