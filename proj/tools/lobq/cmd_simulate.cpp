#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <memory>

#include "lobq/mc.hpp"
#include "lobq/series.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace lobq::cli {

namespace {

struct SimulateOpts {
    CommonOpts common;
    std::string scenario = "first-event";
    std::string side = "both";  // side-trade scenario: buy, sell or both
    double horizon = 0.0;       // 0 = library default
    int max_epochs = 0;
    double z_start = 0.0;       // 0 = phi0
    bool no_compare = false;
    bool project = false;
};

double zscore(double a, double sa, double b, double sb) {
    const double se = std::sqrt(sa * sa + sb * sb);
    return se > 0.0 ? (a - b) / se : 0.0;
}

SimConfig sim_config(const SimulateOpts& o) {
    SimConfig cfg;
    cfg.dt = o.common.dt;
    cfg.n_paths = o.common.paths;
    cfg.seed = o.common.seed;
    cfg.n_threads = o.common.threads;
    if (o.horizon > 0.0) cfg.horizon = o.horizon;
    if (o.max_epochs > 0) cfg.max_epochs = o.max_epochs;
    return cfg;
}

void run_first_event(const SimulateOpts& o, const ModelParams& params,
                     const std::filesystem::path& dir) {
    const SimConfig cfg = sim_config(o);
    const auto grid = imbalance_grid(o.common.buckets);

    std::vector<FirstEventResult> mc(grid.size());
    std::vector<OrthantState> states(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        OrthantState s = state_from_imbalance({grid[i]}, params.depth, params);
        s.x = std::max(s.x, 1e-9);  // |I| = 1 sits on the absorbing wall
        s.y = std::max(s.y, 1e-9);
        if (o.z_start > 0.0) s.z = o.z_start;
        states[i] = s;
        mc[i] = simulate_first_event(s, params.corr, cfg);
    }

    auto csv = open_output(dir / "mc_first_event.csv");
    csv << "imbalance,x,y,z,p_down,se_down,p_up,se_up,p_trade,se_trade,censored_fraction\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const FirstEventResult& r = mc[i];
        const double total = static_cast<double>(r.n_completed + r.n_censored);
        csv << fmt(grid[i]) << ',' << fmt(states[i].x) << ',' << fmt(states[i].y) << ','
            << fmt(states[i].z) << ',' << fmt(r.p_down.mean) << ',' << fmt(r.p_down.std_error)
            << ',' << fmt(r.p_up.mean) << ',' << fmt(r.p_up.std_error) << ',' << fmt(r.p_trade.mean)
            << ',' << fmt(r.p_trade.std_error) << ','
            << fmt(total > 0 ? static_cast<double>(r.n_censored) / total : 0.0) << '\n';
    }

    if (o.no_compare) return;
    SolverOptions sopt;
    sopt.n_modes = o.common.modes;
    const EventSolutions sols = solve_all_events(params.corr, sopt);
    auto cmp = open_output(dir / "compare_series_mc.csv");
    cmp << "imbalance,series_p_down,mc_p_down,z_down,series_p_up,mc_p_up,z_up,"
           "series_p_trade,mc_p_trade,z_trade\n";
    for (size_t i = 0; i < grid.size(); ++i) {
        const EventProbabilities p = event_probabilities(sols, states[i], params.corr);
        const FirstEventResult& r = mc[i];
        cmp << fmt(grid[i]) << ',' << fmt(p.p_down) << ',' << fmt(r.p_down.mean) << ','
            << fmt(zscore(p.p_down, 0.0, r.p_down.mean, r.p_down.std_error)) << ',' << fmt(p.p_up)
            << ',' << fmt(r.p_up.mean) << ','
            << fmt(zscore(p.p_up, 0.0, r.p_up.mean, r.p_up.std_error)) << ',' << fmt(p.p_trade)
            << ',' << fmt(r.p_trade.mean) << ','
            << fmt(zscore(p.p_trade, 0.0, r.p_trade.mean, r.p_trade.std_error)) << '\n';
    }
}

void run_mid_move(const SimulateOpts& o, const ModelParams& params,
                  const std::filesystem::path& dir) {
    const SimConfig cfg = sim_config(o);
    auto csv = open_output(dir / "mc_mid_move.csv");
    csv << "imbalance,move,se_move,wait,se_wait,p_up,se_p_up,p_up_closed,z_up,"
           "censored_fraction\n";
    for (double imb : imbalance_grid(o.common.buckets)) {
        WedgeState s = wedge_from_imbalance({imb}, params.depth, params);
        s.x = std::max(s.x, 1e-9);
        s.y = std::max(s.y, 1e-9);
        const MidMoveResult r = simulate_next_mid_move(s, params, cfg);
        const double closed = uptick_probability(s, params.corr.rho_xy);
        const double total = static_cast<double>(r.n_completed + r.n_censored);
        csv << fmt(imb) << ',' << fmt(r.move.mean) << ',' << fmt(r.move.std_error) << ','
            << fmt(r.wait.mean) << ',' << fmt(r.wait.std_error) << ',' << fmt(r.p_up.mean) << ','
            << fmt(r.p_up.std_error) << ',' << fmt(closed) << ','
            << fmt(zscore(closed, 0.0, r.p_up.mean, r.p_up.std_error)) << ','
            << fmt(total > 0 ? static_cast<double>(r.n_censored) / total : 0.0) << '\n';
    }
}

void run_side_trade(const SimulateOpts& o, const ModelParams& params,
                    const std::filesystem::path& dir) {
    const SimConfig cfg = sim_config(o);
    const bool do_buy = o.side != "sell";
    const bool do_sell = o.side != "buy";
    // a buy trade executes at the ask, a sell trade at the bid
    for (const auto& [name, side, enabled] :
         {std::tuple{"mc_to_buy.csv", Side::Ask, do_buy},
          std::tuple{"mc_to_sell.csv", Side::Bid, do_sell}}) {
        if (!enabled) continue;
        auto csv = open_output(dir / name);
        csv << "imbalance,move,se_move,wait,se_wait,censored_fraction\n";
        for (double imb : imbalance_grid(o.common.buckets)) {
            OrthantState s = state_from_imbalance({imb}, params.depth, params);
            s.x = std::max(s.x, 1e-9);
            s.y = std::max(s.y, 1e-9);
            if (o.z_start > 0.0) s.z = o.z_start;
            const SideTradeResult r = simulate_until_side_trade(s, params, side, cfg);
            csv << fmt(imb) << ',' << fmt(r.move.mean) << ',' << fmt(r.move.std_error) << ','
                << fmt(r.wait.mean) << ',' << fmt(r.wait.std_error) << ','
                << fmt(r.censored_fraction) << '\n';
        }
    }
}

void run_simulate(const SimulateOpts& o) {
    ModelParams params = load_model(o.common);
    if (o.project) params.corr = project_feasible(params.corr, 0.05);
    try {
        params.require_valid();
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }

    const auto dir = prepare_out_dir(o.common.out_dir);
    if (o.scenario == "first-event") run_first_event(o, params, dir);
    else if (o.scenario == "mid-move") run_mid_move(o, params, dir);
    else if (o.scenario == "side-trade") run_side_trade(o, params, dir);
    else throw InputError("unknown scenario '" + o.scenario + "'");

    Manifest m;
    m.command = "simulate";
    m.config_path = o.common.config_path;
    m.overrides = o.common.overrides;
    m.seed = o.common.seed;
    m.settings = {{"scenario", o.scenario},     {"buckets", o.common.buckets},
                  {"paths", o.common.paths},    {"dt", o.common.dt},
                  {"threads", o.common.threads}, {"horizon", o.horizon},
                  {"max_epochs", o.max_epochs}, {"z", o.z_start},
                  {"side", o.side},             {"compare", !o.no_compare},
                  {"modes", o.common.modes},    {"project_feasible", o.project}};
    write_manifest(dir, m);
}

}  // namespace

void setup_simulate(CLI::App& app) {
    auto opts = std::make_shared<SimulateOpts>();
    CLI::App* c = app.add_subcommand("simulate", "Monte Carlo curves on an imbalance grid");
    c->add_option("--config", opts->common.config_path, "Model config file");
    c->add_option("--set", opts->common.overrides, "Override a config key (key=value, repeatable)");
    c->add_option("--out-dir", opts->common.out_dir, "Output directory")->capture_default_str();
    c->add_option("--scenario", opts->scenario,
                  "first-event | mid-move (two-queue submodel) | side-trade (multi-epoch fills)")
        ->capture_default_str();
    c->add_option("--buckets", opts->common.buckets, "Imbalance grid size on [-1, 1]")
        ->capture_default_str();
    c->add_option("--paths", opts->common.paths, "Paths per grid point")->capture_default_str();
    c->add_option("--dt", opts->common.dt, "Euler step, seconds")->capture_default_str();
    c->add_option("--seed", opts->common.seed, "Base RNG seed")->capture_default_str();
    c->add_option("--threads", opts->common.threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    c->add_option("--horizon", opts->horizon, "Censoring horizon, sim-seconds (0 = default)");
    c->add_option("--max-epochs", opts->max_epochs, "Queue-reset budget per path (0 = default)");
    c->add_option("--z", opts->z_start, "Initial trade level (0 = phi0)");
    c->add_option("--side", opts->side, "side-trade scenario: buy, sell or both")
        ->capture_default_str();
    c->add_flag("--no-compare", opts->no_compare,
                "Skip the series-vs-MC z-score table (first-event scenario)");
    c->add_option("--modes", opts->common.modes, "Series modes for the comparison table")
        ->capture_default_str();
    c->add_flag("--project-feasible", opts->project,
                "Shrink (rho_xz, rho_yz) onto the feasible region first");
    c->callback([opts] { run_simulate(*opts); });
}

}  // namespace lobq::cli
