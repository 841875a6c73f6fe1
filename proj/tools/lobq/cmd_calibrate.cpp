#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

#include "lobq/calibrate.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace lobq::cli {

namespace {

struct CalibrateOpts {
    CommonOpts common;
    std::string curves_dir;
    bool no_tie = false;
    bool fit_depth = false;
    int restarts = 3;
    int max_iter = 150;
    double tol = 1e-6;
    double horizon = 0.0;
    std::uint64_t restart_seed = 99;
};

CalCurve to_cal(const BucketedCurve& c) { return {c.mean, c.std_err}; }

CalibrationTarget read_target(const std::filesystem::path& dir) {
    CalibrationTarget t;
    CalCurve* dst[7] = {&t.p_fav,    &t.p_unfav,   &t.p_fill,  &t.move_buy,
                        &t.move_sell, &t.wait_buy, &t.wait_sell};
    bool first = true;
    for (size_t i = 0; i < 7; ++i) {
        const auto path = dir / (std::string(CalibrationTarget::curve_names()[i]) + ".csv");
        std::ifstream f(path);
        if (!f) throw InputError("cannot open " + path.string());
        BucketedCurve c;
        try {
            c = read_curve_csv(f);
        } catch (const std::runtime_error& e) {
            throw InputError(path.string() + ": " + e.what());
        }
        if (first) {
            t.buckets = c.spec;
            first = false;
        } else if (c.spec.n != t.buckets.n) {
            throw InputError(path.string() + ": bucket grid differs from the other curves");
        }
        *dst[i] = to_cal(c);
    }
    return t;
}

// sigma/depth defaults measured by the curves command; the config file and
// --set still override them.
void apply_summary(const std::filesystem::path& dir, ModelParams& p) {
    std::ifstream f(dir / "summary.json");
    if (!f) return;
    nlohmann::json s;
    try {
        s = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
        throw InputError("summary.json: " + std::string(e.what()));
    }
    if (s.contains("sigma_b")) p.sigma_b = s["sigma_b"].get<double>();
    if (s.contains("sigma_a")) p.sigma_a = s["sigma_a"].get<double>();
    if (s.contains("depth")) p.depth = s["depth"].get<double>();
}

void run_calibrate(const CalibrateOpts& o) {
    const std::filesystem::path curves_dir(o.curves_dir);
    const CalibrationTarget target = read_target(curves_dir);

    ModelParams init;
    apply_summary(curves_dir, init);
    if (!o.common.config_path.empty()) {
        std::ifstream f(o.common.config_path);
        if (!f) throw InputError("cannot open config file " + o.common.config_path);
        try {
            parse_params_into(f, init);
        } catch (const std::invalid_argument& e) {
            throw InputError(o.common.config_path + ": " + e.what());
        }
    }
    for (const std::string& kv : o.common.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw InputError("--set expects key=value, got '" + kv + "'");
        try {
            apply_override(init, kv.substr(0, eq), kv.substr(eq + 1));
        } catch (const std::invalid_argument& e) {
            throw InputError(e.what());
        }
    }

    CalibrateOptions copt;
    copt.tie_ryz = !o.no_tie;
    copt.fit_depth = o.fit_depth;
    copt.depth = init.depth;
    copt.max_iter = o.max_iter;
    copt.n_restarts = o.restarts;
    copt.tol = o.tol;
    copt.seed = o.restart_seed;
    if (o.common.paths_given) copt.curve_cfg.mc.n_paths = o.common.paths;
    if (o.common.dt_given) copt.curve_cfg.mc.dt = o.common.dt;
    if (o.horizon > 0.0) copt.curve_cfg.mc.horizon = o.horizon;
    copt.curve_cfg.mc.seed = o.common.seed;
    copt.curve_cfg.mc.n_threads = o.common.threads;
    copt.curve_cfg.solver.n_modes = o.common.modes;

    CalibrationResult res;
    try {
        res = calibrate(target, init, copt);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    if (!res.converged)
        std::cerr << "warning: tolerance not reached within the iteration budget; "
                     "writing the best point found\n";

    const auto dir = prepare_out_dir(o.common.out_dir);
    nlohmann::json j;
    j["params"] = {{"rho_xy", res.params.corr.rho_xy}, {"rho_xz", res.params.corr.rho_xz},
                   {"rho_yz", res.params.corr.rho_yz}, {"phi0", res.params.phi0},
                   {"sigma_b", res.params.sigma_b},    {"sigma_a", res.params.sigma_a},
                   {"tick", res.params.tick},          {"spread", res.params.spread}};
    j["depth"] = res.depth;
    j["objective"] = res.objective;
    j["converged"] = res.converged;
    for (size_t i = 0; i < 7; ++i)
        j["residuals"][CalibrationTarget::curve_names()[i]] = res.curve_residuals[i];
    j["trace"] = res.trace;
    j["options"] = {{"tie_rho_yz", copt.tie_ryz},   {"fit_depth", copt.fit_depth},
                    {"restarts", copt.n_restarts},  {"max_iter", copt.max_iter},
                    {"tol", copt.tol},              {"paths", copt.curve_cfg.mc.n_paths},
                    {"dt", copt.curve_cfg.mc.dt},   {"horizon", copt.curve_cfg.mc.horizon},
                    {"seed", copt.curve_cfg.mc.seed}};
    auto jf = open_output(dir / "calibration.json");
    jf << j.dump(2) << '\n';

    // fitted-vs-empirical overlays, one file per curve
    ModelParams fitted = res.params;
    fitted.depth = res.depth;
    const CalibrationTarget model =
        model_curves(fitted, target.buckets, res.depth, copt.curve_cfg);
    for (size_t i = 0; i < 7; ++i) {
        const CalCurve& emp = *target.curves()[i];
        const CalCurve& mod = *model.curves()[i];
        auto f = open_output(dir / ("overlay_" +
                                    std::string(CalibrationTarget::curve_names()[i]) + ".csv"));
        f << "bucket,empirical,model,residual\n";
        for (int b = 0; b < target.buckets.n; ++b) {
            const auto bi = static_cast<size_t>(b);
            if (!std::isfinite(emp.mean[bi])) continue;
            const double m = mod.mean[bi];
            f << fmt(target.buckets.mid(b)) << ',' << fmt(emp.mean[bi]) << ',' << fmt(m) << ','
              << fmt(m - emp.mean[bi]) << '\n';
        }
    }

    Manifest man;
    man.command = "calibrate";
    man.config_path = o.common.config_path;
    for (size_t i = 0; i < 7; ++i) {
        const auto path = curves_dir / (std::string(CalibrationTarget::curve_names()[i]) + ".csv");
        man.inputs.emplace_back(path.string(), file_hash_hex(path.string()));
    }
    man.overrides = o.common.overrides;
    man.seed = o.common.seed;
    man.settings = j["options"];
    man.settings["curves_dir"] = o.curves_dir;
    write_manifest(dir, man);
}

}  // namespace

void setup_calibrate(CLI::App& app) {
    auto opts = std::make_shared<CalibrateOpts>();
    CLI::App* c = app.add_subcommand(
        "calibrate", "Fit the model parameters to empirical curves from the curves command");
    c->add_option("--curves-dir", opts->curves_dir, "Directory with the seven target curve CSVs")
        ->required();
    c->add_option("--config", opts->common.config_path,
                  "Model config; its rho_*/phi0 seed the optimizer start");
    c->add_option("--set", opts->common.overrides, "Override a config key (key=value, repeatable)");
    c->add_option("--out-dir", opts->common.out_dir, "Output directory")->capture_default_str();
    auto* paths = c->add_option("--paths", opts->common.paths,
                                "MC paths per objective evaluation [default: 1024]");
    auto* dt = c->add_option("--dt", opts->common.dt, "MC step for the objective [default: 0.05]");
    c->add_option("--horizon", opts->horizon, "MC censoring horizon (0 = default 200)");
    c->add_option("--seed", opts->common.seed, "Common-random-number seed")->capture_default_str();
    c->add_option("--restart-seed", opts->restart_seed, "Restart-perturbation seed")
        ->capture_default_str();
    c->add_option("--threads", opts->common.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    c->add_option("--modes", opts->common.modes, "Series modes")->capture_default_str();
    c->add_flag("--no-tie", opts->no_tie, "Fit rho_yz freely instead of rho_yz = -rho_xz");
    c->add_flag("--fit-depth", opts->fit_depth, "Fit depth as a fifth parameter");
    c->add_option("--restarts", opts->restarts, "Randomized restarts")->capture_default_str();
    c->add_option("--max-iter", opts->max_iter, "Simplex iterations per start")
        ->capture_default_str();
    c->add_option("--tol", opts->tol, "Convergence tolerance on the simplex spread")
        ->capture_default_str();
    c->callback([opts, paths, dt] {
        opts->common.paths_given = paths->count() > 0;
        opts->common.dt_given = dt->count() > 0;
        run_calibrate(*opts);
    });
}

}  // namespace lobq::cli
