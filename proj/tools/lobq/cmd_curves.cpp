#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "lobq/curves.hpp"
#include "lobq/taq.hpp"

#include "commands.hpp"
#include "common.hpp"

namespace lobq::cli {

namespace {

struct CurvesOpts {
    CommonOpts common;
    std::string quotes_path, trades_path, taq_path;
    bool sort_inputs = false;
};

// Splits a merged tape ("Q,<quote row>" / "T,<trade row>") into the two
// per-kind streams the readers expect. A header line starting with "kind"
// is skipped; parse diagnostics then refer to per-kind row numbers.
void split_merged(std::istream& is, std::ostream& quotes, std::ostream& trades) {
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line.rfind("kind", 0) == 0) continue;
        if (line.rfind("Q,", 0) == 0) quotes << line.substr(2) << '\n';
        else if (line.rfind("T,", 0) == 0) trades << line.substr(2) << '\n';
        else throw InputError("merged tape line " + std::to_string(line_no) +
                              ": expected a Q, or T, prefix");
    }
}

void write_curve_file(const std::filesystem::path& dir, const char* name,
                      const BucketedCurve& c) {
    auto f = open_output(dir / (std::string(name) + ".csv"));
    write_curve_csv(f, c);
}

void run_curves(const CurvesOpts& o) {
    QuoteParse qp;
    TradeParse tp;
    try {
        if (!o.taq_path.empty()) {
            std::ifstream f(o.taq_path);
            if (!f) throw InputError("cannot open " + o.taq_path);
            std::stringstream qs, ts;
            split_merged(f, qs, ts);
            qp = read_quotes(qs, o.sort_inputs);
            tp = read_trades(ts, o.sort_inputs);
        } else {
            std::ifstream qf(o.quotes_path);
            if (!qf) throw InputError("cannot open " + o.quotes_path);
            std::ifstream tf(o.trades_path);
            if (!tf) throw InputError("cannot open " + o.trades_path);
            qp = read_quotes(qf, o.sort_inputs);
            tp = read_trades(tf, o.sort_inputs);
        }
    } catch (const std::runtime_error& e) {
        throw InputError(e.what());  // malformed rows, disordered timestamps
    }
    if (qp.quotes.empty()) throw InputError("no usable quotes in input");

    TaqStream stream = build_stream(std::move(qp.quotes), std::move(tp.trades));
    const std::int64_t still_unknown = infer_trade_sides(stream);

    const BucketSpec spec{o.common.buckets, -1.0, 1.0};
    const EventCurves events = curve_event_probabilities(stream, Side::Bid, spec);
    const SideTradeCurves buy = curve_to_next_trade(stream, TradeSide::Buy, spec);
    const SideTradeCurves sell = curve_to_next_trade(stream, TradeSide::Sell, spec);
    const MidMoveCurves mid = curve_next_mid_move(stream, spec);

    QueueScales scales;
    try {
        scales = estimate_queue_scales(stream);
    } catch (const std::runtime_error& e) {
        throw InputError(e.what());  // degenerate queues
    }

    double depth_sum = 0.0;
    std::set<std::int32_t> days;
    for (const QuoteUpdate& q : stream.quotes) {
        depth_sum += q.bid_qty + q.ask_qty;
        days.insert(day_of(q.ts_us));
    }
    const double avg_depth = depth_sum / static_cast<double>(stream.quotes.size());
    const std::vector<double> reset_b = reset_samples(stream, Side::Bid);
    const std::vector<double> reset_a = reset_samples(stream, Side::Ask);

    // inputs parsed and curves built; only now touch the filesystem
    const auto dir = prepare_out_dir(o.common.out_dir);
    write_curve_file(dir, "p_fav", events.favourable);
    write_curve_file(dir, "p_unfav", events.unfavourable);
    write_curve_file(dir, "p_fill", events.fill);
    write_curve_file(dir, "move_buy", buy.move);
    write_curve_file(dir, "wait_buy", buy.wait);
    write_curve_file(dir, "move_sell", sell.move);
    write_curve_file(dir, "wait_sell", sell.wait);
    write_curve_file(dir, "mid_move", mid.move);
    write_curve_file(dir, "mid_wait", mid.wait);

    for (const auto& [name, samples] :
         {std::pair{"reset_b.txt", &reset_b}, std::pair{"reset_a.txt", &reset_a}}) {
        if (samples->empty()) continue;
        auto f = open_output(dir / name);
        for (double v : *samples) f << fmt(v) << '\n';
    }

    nlohmann::json s;
    s["days"] = days.size();
    s["quotes"] = {{"accepted", qp.stats.rows},
                   {"rejected_crossed", qp.stats.rejected_crossed},
                   {"rejected_empty", qp.stats.rejected_empty}};
    s["trades"] = {{"accepted", tp.stats.rows}, {"unknown_side", still_unknown}};
    s["excluded"] = {{"event_curves", events.unclassified},
                     {"next_trade_buy", buy.excluded},
                     {"next_trade_sell", sell.excluded},
                     {"mid_move", mid.excluded}};
    s["sigma_b"] = scales.sigma_b;
    s["sigma_a"] = scales.sigma_a;
    s["sigma_pairs"] = {{"bid", scales.n_b}, {"ask", scales.n_a}};
    s["depth"] = avg_depth;
    s["reset_samples"] = {{"bid", reset_b.size()}, {"ask", reset_a.size()}};
    auto sf = open_output(dir / "summary.json");
    sf << s.dump(2) << '\n';

    Manifest m;
    m.command = "curves";
    m.config_path = o.common.config_path;
    if (!o.taq_path.empty()) {
        m.inputs.emplace_back(o.taq_path, file_hash_hex(o.taq_path));
    } else {
        m.inputs.emplace_back(o.quotes_path, file_hash_hex(o.quotes_path));
        m.inputs.emplace_back(o.trades_path, file_hash_hex(o.trades_path));
    }
    m.overrides = o.common.overrides;
    m.settings = {{"buckets", o.common.buckets}, {"sort_inputs", o.sort_inputs}};
    write_manifest(dir, m);
}

}  // namespace

void setup_curves(CLI::App& app) {
    auto opts = std::make_shared<CurvesOpts>();
    CLI::App* c = app.add_subcommand(
        "curves", "Compute the empirical imbalance-bucketed curves from a trades-and-quotes tape");
    auto* q = c->add_option("--quotes", opts->quotes_path,
                            "Quote CSV: ts_us,bid_px,ask_px,bid_qty,ask_qty");
    auto* t = c->add_option("--trades", opts->trades_path, "Trade CSV: ts_us,px,qty[,side]");
    auto* g = c->add_option("--taq", opts->taq_path,
                            "Merged tape with Q,/T, prefixed rows (replaces --quotes/--trades)");
    q->needs(t);
    t->needs(q);
    g->excludes(q)->excludes(t);
    c->add_flag("--sort", opts->sort_inputs, "Sort rows by timestamp instead of rejecting disorder");
    c->add_option("--config", opts->common.config_path, "Model config (recorded in the manifest)");
    c->add_option("--out-dir", opts->common.out_dir, "Output directory")->capture_default_str();
    c->add_option("--buckets", opts->common.buckets, "Imbalance bucket count on [-1, 1]")
        ->capture_default_str();
    c->callback([opts, c] {
        if (opts->taq_path.empty() && opts->quotes_path.empty())
            throw CLI::RequiredError("--quotes/--trades or --taq");
        (void)c;
        run_curves(*opts);
    });
}

}  // namespace lobq::cli
