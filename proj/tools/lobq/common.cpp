#include "common.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include "lobq/curves.hpp"

#ifndef LOBQ_TOOL_VERSION
#define LOBQ_TOOL_VERSION "0.0.0"
#endif

namespace lobq::cli {

ModelParams load_model(const CommonOpts& opts) {
    ModelParams p;
    if (!opts.config_path.empty()) {
        std::ifstream f(opts.config_path);
        if (!f) throw InputError("cannot open config file " + opts.config_path);
        try {
            p = parse_params(f);
        } catch (const std::invalid_argument& e) {
            throw InputError(opts.config_path + ": " + e.what());
        }
    }
    for (const std::string& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw InputError("--set expects key=value, got '" + kv + "'");
        try {
            apply_override(p, kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }
    return p;
}

std::filesystem::path prepare_out_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
    return p;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    return f;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InputError("cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char chunk[1 << 14];
    while (f.read(chunk, sizeof chunk) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i) {
            h ^= static_cast<unsigned char>(chunk[i]);
            h *= 1099511628211ull;
        }
        if (!f) break;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_manifest(const std::filesystem::path& out_dir, const Manifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["tool_version"] = LOBQ_TOOL_VERSION;
    j["created_utc"] = utc_now();
    if (m.config_path.empty()) {
        j["config"] = nullptr;
    } else {
        j["config"] = {{"path", m.config_path}, {"hash", file_hash_hex(m.config_path)}};
    }
    j["inputs"] = nlohmann::json::array();
    for (const auto& [path, hash] : m.inputs)
        j["inputs"].push_back({{"path", path}, {"hash", hash}});
    j["overrides"] = m.overrides;
    j["seed"] = m.seed;
    j["settings"] = m.settings;

    auto f = open_output(out_dir / "run_manifest.json");
    f << j.dump(2) << '\n';
}

std::vector<double> imbalance_grid(int buckets) {
    if (buckets < 1) throw InputError("--buckets must be >= 1");
    BucketSpec spec{buckets, -1.0, 1.0};
    std::vector<double> grid(static_cast<size_t>(buckets));
    for (int b = 0; b < buckets; ++b) grid[static_cast<size_t>(b)] = spec.mid(b);
    return grid;
}

}  // namespace lobq::cli
