#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>

#include "lobq/series.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace lobq::cli {

namespace {

struct SolveOpts {
    CommonOpts common;
    int nodes = 0;  // 0 = automatic
    bool no_auto_reduce = false;
    bool reuse_cache = false;
    bool project = false;
    double project_margin = 0.05;
};

const char* series_file(Outcome e) {
    switch (e) {
        case Outcome::DownTick: return "series_down.txt";
        case Outcome::UpTick: return "series_up.txt";
        default: return "series_trade.txt";
    }
}

bool load_cached(const std::filesystem::path& dir, const ModelParams& p,
                 EventSolutions& sols) {
    SeriesSolution* dst[3] = {&sols.down, &sols.up, &sols.trade};
    const Outcome evs[3] = {Outcome::DownTick, Outcome::UpTick, Outcome::Trade};
    for (int i = 0; i < 3; ++i) {
        std::ifstream f(dir / series_file(evs[i]));
        if (!f) return false;
        *dst[i] = load_solution(f);
        if (std::abs(dst[i]->phi_max - phi_max(p.corr.rho_xy)) > 1e-12)
            throw InputError(std::string(series_file(evs[i])) +
                             ": cached solution does not match the configured correlations");
    }
    return true;
}

void run_solve(const SolveOpts& o) {
    ModelParams params = load_model(o.common);
    if (o.project) params.corr = project_feasible(params.corr, o.project_margin);
    try {
        params.require_valid();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    SolverOptions sopt;
    sopt.n_modes = o.common.modes;
    sopt.quad.n_nodes = o.nodes;
    sopt.auto_reduce = !o.no_auto_reduce;

    const auto dir = prepare_out_dir(o.common.out_dir);
    EventSolutions sols;
    SolveReport report;
    bool cached = o.reuse_cache && load_cached(dir, params, sols);
    if (!cached) {
        sols = solve_all_events(params.corr, sopt, &report);
        for (const auto& [ev, sol] :
             {std::pair{Outcome::DownTick, &sols.down}, std::pair{Outcome::UpTick, &sols.up},
              std::pair{Outcome::Trade, &sols.trade}}) {
            auto f = open_output(dir / series_file(ev));
            save_solution(f, *sol);
        }
    }

    auto csv = open_output(dir / "model_probabilities.csv");
    csv << "imbalance,p_down,p_up,p_trade,sum,clamp_excess\n";
    for (double imb : imbalance_grid(o.common.buckets)) {
        OrthantState s = state_from_imbalance({imb}, params.depth, params);
        s.x = std::max(s.x, 1e-9);  // |I| = 1 sits on the absorbing wall
        s.y = std::max(s.y, 1e-9);
        const EventProbabilities p = event_probabilities(sols, s, params.corr);
        csv << fmt(imb) << ',' << fmt(p.p_down) << ',' << fmt(p.p_up) << ',' << fmt(p.p_trade)
            << ',' << fmt(p.p_down + p.p_up + p.p_trade) << ',' << fmt(p.clamp_excess) << '\n';
    }

    nlohmann::json s;
    s["phi_max"] = phi_max(params.corr.rho_xy);
    s["det"] = params.corr.det();
    s["modes"] = {{"requested", cached ? sols.trade.n_modes() : report.requested_modes},
                  {"effective", cached ? sols.trade.n_modes() : report.effective_modes}};
    if (!cached) s["condition"] = report.condition;
    s["from_cache"] = cached;
    for (const auto& [name, sol] :
         {std::pair{"down", &sols.down}, std::pair{"up", &sols.up},
          std::pair{"trade", &sols.trade}}) {
        const BoundaryMismatch bm = boundary_mismatch(*sol, params.corr);
        s["boundary_mismatch"][name] = {{"max_abs", bm.max_abs}, {"rms", bm.rms}};
    }
    auto sf = open_output(dir / "solve_summary.json");
    sf << s.dump(2) << '\n';

    Manifest m;
    m.command = "solve";
    m.config_path = o.common.config_path;
    m.overrides = o.common.overrides;
    m.settings = {{"buckets", o.common.buckets},
                  {"modes", o.common.modes},
                  {"nodes", o.nodes},
                  {"auto_reduce", !o.no_auto_reduce},
                  {"project_feasible", o.project},
                  {"from_cache", cached}};
    write_manifest(dir, m);
}

}  // namespace

void setup_solve(CLI::App& app) {
    auto opts = std::make_shared<SolveOpts>();
    CLI::App* c = app.add_subcommand(
        "solve", "Solve the first-event probabilities on an imbalance grid (series expansion)");
    c->add_option("--config", opts->common.config_path, "Model config file");
    c->add_option("--set", opts->common.overrides, "Override a config key (key=value, repeatable)");
    c->add_option("--out-dir", opts->common.out_dir, "Output directory")->capture_default_str();
    c->add_option("--buckets", opts->common.buckets, "Imbalance grid size on [-1, 1]")
        ->capture_default_str();
    c->add_option("--modes", opts->common.modes, "Series modes N")->capture_default_str();
    c->add_option("--nodes", opts->nodes, "Quadrature nodes (0 = automatic)")
        ->capture_default_str();
    c->add_flag("--no-auto-reduce", opts->no_auto_reduce,
                "Fail instead of retrying with fewer modes when the fit is ill-conditioned");
    c->add_flag("--cache", opts->reuse_cache,
                "Reuse series_*.txt from the output directory when present");
    c->add_flag("--project-feasible", opts->project,
                "Shrink (rho_xz, rho_yz) onto the feasible region before solving");
    c->add_option("--project-margin", opts->project_margin,
                  "Determinant margin for --project-feasible")
        ->capture_default_str();
    c->callback([opts] { run_solve(*opts); });
}

}  // namespace lobq::cli
