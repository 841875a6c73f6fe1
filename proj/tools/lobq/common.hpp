#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobq/config.hpp"
#include "lobq/model.hpp"

namespace lobq::cli {

// Exit codes: 0 success, kExitInput malformed input, kExitNumeric numerical
// failure (ill-conditioned solve, non-finite result).
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Raised for anything wrong with the user's files or flags; main maps it to
// kExitInput. Everything else escaping a command is treated as numeric.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Options every subcommand shares. Flags override config-file keys; the
// *_given bits record which flags were actually passed so commands with
// different defaults (e.g. calibrate's coarse MC) can tell.
struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;  // key=value, applied after the config file

    std::uint64_t seed = 1;
    int buckets = 20;
    int modes = 40;
    std::int64_t paths = 100000;
    double dt = 1e-3;
    int threads = 0;

    bool seed_given = false;
    bool paths_given = false;
    bool dt_given = false;
};

// Config file (when given) plus --set overrides, validated.
ModelParams load_model(const CommonOpts& opts);

std::filesystem::path prepare_out_dir(const std::string& dir);

// Throws InputError when the file cannot be created.
std::ofstream open_output(const std::filesystem::path& path);

// Full-precision float formatting shared by all emitted CSV/JSON.
std::string fmt(double v);

// FNV-1a 64 of the file bytes, as 16 hex digits. Missing file -> InputError.
std::string file_hash_hex(const std::string& path);

// Reproduction record written once per output directory. `settings` carries
// the command's effective knobs (after flag/config merging); data files stay
// timestamp-free so reruns are bit-identical.
struct Manifest {
    std::string command;
    std::string config_path;                                   // empty = none
    std::vector<std::pair<std::string, std::string>> inputs;   // path, hash
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    nlohmann::json settings;
};

void write_manifest(const std::filesystem::path& out_dir, const Manifest& m);

// Bucket-midpoint imbalance grid shared by solve/simulate.
std::vector<double> imbalance_grid(int buckets);

}  // namespace lobq::cli
