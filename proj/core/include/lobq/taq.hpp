#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "lobq/curves.hpp"
#include "lobq/model.hpp"

namespace lobq {

enum class TradeSide { Buy, Sell, Unknown };

struct QuoteUpdate {
    std::int64_t ts_us = 0;
    double bid_px = 0, ask_px = 0;
    double bid_qty = 0, ask_qty = 0;

    double mid() const { return 0.5 * (bid_px + ask_px); }
    double spread() const { return ask_px - bid_px; }
};

struct TradeRecord {
    std::int64_t ts_us = 0;
    double px = 0, qty = 0;
    TradeSide side = TradeSide::Unknown;
};

std::int32_t day_of(std::int64_t ts_us);  // UTC day index

struct ParseStats {
    std::int64_t rows = 0;               // accepted
    std::int64_t rejected_crossed = 0;   // ask_px <= bid_px
    std::int64_t rejected_empty = 0;     // non-positive queue size
};

// CSV readers. Quotes: "ts_us,bid_px,ask_px,bid_qty,ask_qty"; trades:
// "ts_us,px,qty[,side]" with side one of B/S/BUY/SELL (case-insensitive,
// blank = unknown). A header row is skipped when the first field is not
// numeric. Malformed rows raise with the line number; timestamps must be
// non-decreasing unless sort_if_needed is set.
struct QuoteParse {
    std::vector<QuoteUpdate> quotes;
    ParseStats stats;
};
struct TradeParse {
    std::vector<TradeRecord> trades;
    ParseStats stats;
};
QuoteParse read_quotes(std::istream& is, bool sort_if_needed = false);
TradeParse read_trades(std::istream& is, bool sort_if_needed = false);

// Time-ordered merge of both tapes. At equal timestamps quotes precede
// trades; within a kind the input order is kept.
struct TaqStream {
    std::vector<QuoteUpdate> quotes;
    std::vector<TradeRecord> trades;
    struct Event {
        bool is_trade = false;
        std::int32_t idx = 0;  // into quotes or trades
    };
    std::vector<Event> events;
};
TaqStream build_stream(std::vector<QuoteUpdate> quotes, std::vector<TradeRecord> trades);

// Fills unknown trade sides in place: a trade at or beyond the prevailing
// ask is a buy, at or below the prevailing bid a sell; inside the spread the
// tick rule (direction of the last price-changing trade) decides. Returns
// the number of trades still unknown.
std::int64_t infer_trade_sides(TaqStream& stream);

// Mid displacement (in current spreads) and waiting time to the next change
// of the best bid or best ask price, bucketed by imbalance. Forward scans
// stay within the quote's calendar day; quotes with no subsequent price
// change are excluded and counted.
struct MidMoveCurves {
    BucketedCurve move;  // spreads
    BucketedCurve wait;  // seconds
    std::int64_t excluded = 0;
};
MidMoveCurves curve_next_mid_move(const TaqStream& stream, const BucketSpec& spec);

// Mid displacement (prevailing mid at the trade vs the quote's mid, in the
// quote's spread) and waiting time to the next trade of the given side.
struct SideTradeCurves {
    BucketedCurve move;
    BucketedCurve wait;
    std::int64_t excluded = 0;       // no matching trade before day end
    std::int64_t unknown_trades = 0; // unclassified trades skipped by the scan
};
SideTradeCurves curve_to_next_trade(const TaqStream& stream, TradeSide side,
                                    const BucketSpec& spec);

// Outcome frequencies for a broker pegged to near_side: the first of
// {mid moves toward the broker (favourable), mid moves away (unfavourable),
// a trade from the opposite side arrives (fill)} after each quote.
// Per bucket the three curves partition the classified samples.
struct EventCurves {
    BucketedCurve favourable;
    BucketedCurve unfavourable;
    BucketedCurve fill;
    std::int64_t unclassified = 0;  // day ended before any event
};
EventCurves curve_event_probabilities(const TaqStream& stream, Side near_side,
                                      const BucketSpec& spec);

// Queue volatility scales (shares / sqrt(sec)) from the realized variance of
// queue-size changes between consecutive quotes at an unchanged price level.
// Throws when a side's queue never moves.
struct QueueScales {
    double sigma_b = 0, sigma_a = 0;
    std::int64_t n_b = 0, n_a = 0;  // contributing quote pairs
};
QueueScales estimate_queue_scales(const TaqStream& stream);

// Fresh queue sizes (shares) observed right after the side's price level
// changes; usable as an empirical reset distribution.
std::vector<double> reset_samples(const TaqStream& stream, Side side);

}  // namespace lobq
