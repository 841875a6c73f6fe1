#include "lobq/taq.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <stdexcept>
#include <string>

namespace lobq {

namespace {

constexpr std::int64_t kUsPerDay = 86400LL * 1000000LL;

// ============================ csv parsing ============================

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (true) {
        const size_t next = line.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(line.substr(pos));
            break;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_row(std::int64_t line_no, const std::string& what) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": " + what);
}

std::int64_t parse_i64(std::string_view f, std::int64_t line_no) {
    f = trim(f);
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size())
        bad_row(line_no, "bad integer field '" + std::string(f) + "'");
    return v;
}

double parse_f64(std::string_view f, std::int64_t line_no) {
    f = trim(f);
    double v = 0;
    const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size() || std::isnan(v))
        bad_row(line_no, "bad numeric field '" + std::string(f) + "'");
    return v;
}

bool looks_numeric(std::string_view f) {
    f = trim(f);
    double v = 0;
    const auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    return ec == std::errc() && p == f.data() + f.size();
}

TradeSide parse_side(std::string_view f, std::int64_t line_no) {
    std::string s;
    for (char c : trim(f)) s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (s.empty()) return TradeSide::Unknown;
    if (s == "B" || s == "BUY") return TradeSide::Buy;
    if (s == "S" || s == "SELL") return TradeSide::Sell;
    bad_row(line_no, "bad side field '" + std::string(f) + "'");
}

template <class Rec>
void require_order(std::vector<Rec>& recs, bool sort_if_needed, const char* what) {
    const bool sorted = std::is_sorted(
        recs.begin(), recs.end(), [](const Rec& a, const Rec& b) { return a.ts_us < b.ts_us; });
    if (sorted) return;
    if (!sort_if_needed)
        throw std::runtime_error(std::string(what) + ": timestamps are not non-decreasing "
                                 "(pass sort_if_needed to sort)");
    std::stable_sort(recs.begin(), recs.end(),
                     [](const Rec& a, const Rec& b) { return a.ts_us < b.ts_us; });
}

}  // namespace

std::int32_t day_of(std::int64_t ts_us) {
    std::int64_t d = ts_us / kUsPerDay;
    if (ts_us < 0 && ts_us % kUsPerDay != 0) --d;
    return static_cast<std::int32_t>(d);
}

QuoteParse read_quotes(std::istream& is, bool sort_if_needed) {
    QuoteParse out;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (line_no == 1 && !f.empty() && !looks_numeric(f[0])) continue;  // header
        if (f.size() != 5) bad_row(line_no, "expected 5 quote fields, got " + std::to_string(f.size()));
        QuoteUpdate q;
        q.ts_us = parse_i64(f[0], line_no);
        q.bid_px = parse_f64(f[1], line_no);
        q.ask_px = parse_f64(f[2], line_no);
        q.bid_qty = parse_f64(f[3], line_no);
        q.ask_qty = parse_f64(f[4], line_no);
        if (!(q.ask_px > q.bid_px)) {
            ++out.stats.rejected_crossed;
            continue;
        }
        if (!(q.bid_qty > 0.0) || !(q.ask_qty > 0.0)) {
            ++out.stats.rejected_empty;
            continue;
        }
        out.quotes.push_back(q);
        ++out.stats.rows;
    }
    require_order(out.quotes, sort_if_needed, "quotes");
    return out;
}

TradeParse read_trades(std::istream& is, bool sort_if_needed) {
    TradeParse out;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (line_no == 1 && !f.empty() && !looks_numeric(f[0])) continue;
        if (f.size() != 3 && f.size() != 4)
            bad_row(line_no, "expected 3 or 4 trade fields, got " + std::to_string(f.size()));
        TradeRecord t;
        t.ts_us = parse_i64(f[0], line_no);
        t.px = parse_f64(f[1], line_no);
        t.qty = parse_f64(f[2], line_no);
        if (f.size() == 4) t.side = parse_side(f[3], line_no);
        if (!(t.px > 0.0) || !(t.qty > 0.0)) bad_row(line_no, "non-positive trade px/qty");
        out.trades.push_back(t);
        ++out.stats.rows;
    }
    require_order(out.trades, sort_if_needed, "trades");
    return out;
}

TaqStream build_stream(std::vector<QuoteUpdate> quotes, std::vector<TradeRecord> trades) {
    TaqStream st;
    st.quotes = std::move(quotes);
    st.trades = std::move(trades);
    st.events.reserve(st.quotes.size() + st.trades.size());
    size_t qi = 0, ti = 0;
    while (qi < st.quotes.size() || ti < st.trades.size()) {
        const bool take_quote =
            qi < st.quotes.size() &&
            (ti >= st.trades.size() || st.quotes[qi].ts_us <= st.trades[ti].ts_us);
        if (take_quote) {
            st.events.push_back({false, static_cast<std::int32_t>(qi)});
            ++qi;
        } else {
            st.events.push_back({true, static_cast<std::int32_t>(ti)});
            ++ti;
        }
    }
    return st;
}

std::int64_t infer_trade_sides(TaqStream& stream) {
    std::int64_t unknown = 0;
    std::int32_t prevailing = -1;  // last quote index seen in merged order
    double last_px = 0.0;
    TradeSide last_dir = TradeSide::Unknown;
    bool have_last_px = false;
    for (const auto& ev : stream.events) {
        if (!ev.is_trade) {
            prevailing = ev.idx;
            continue;
        }
        TradeRecord& t = stream.trades[ev.idx];
        TradeSide side = t.side;
        if (side == TradeSide::Unknown && prevailing >= 0) {
            const QuoteUpdate& q = stream.quotes[prevailing];
            if (t.px >= q.ask_px) side = TradeSide::Buy;
            else if (t.px <= q.bid_px) side = TradeSide::Sell;
        }
        if (side == TradeSide::Unknown && have_last_px) {
            if (t.px > last_px) side = TradeSide::Buy;
            else if (t.px < last_px) side = TradeSide::Sell;
            else side = last_dir;  // zero tick: inherit
        }
        t.side = side;
        if (side == TradeSide::Unknown) ++unknown;
        if (!have_last_px || t.px != last_px) {
            if (have_last_px) last_dir = t.px > last_px ? TradeSide::Buy : TradeSide::Sell;
            last_px = t.px;
            have_last_px = true;
        }
    }
    return unknown;
}

namespace {

// Per merged position: index of the next event (strictly after) matching a
// predicate, within the same day. -1 when none. Built backwards in O(n).
template <class Pred>
std::vector<std::int32_t> next_matching(const TaqStream& st, Pred pred) {
    const auto n = static_cast<std::int32_t>(st.events.size());
    std::vector<std::int32_t> next(n, -1);
    std::int32_t carry = -1;
    for (std::int32_t i = n - 1; i >= 0; --i) {
        const std::int64_t ts = st.events[i].is_trade ? st.trades[st.events[i].idx].ts_us
                                                      : st.quotes[st.events[i].idx].ts_us;
        if (carry != -1) {
            const std::int64_t carry_ts = st.events[carry].is_trade
                                              ? st.trades[st.events[carry].idx].ts_us
                                              : st.quotes[st.events[carry].idx].ts_us;
            if (day_of(carry_ts) != day_of(ts)) carry = -1;
        }
        next[i] = carry;
        if (pred(st.events[i])) carry = i;
    }
    return next;
}

}  // namespace

MidMoveCurves curve_next_mid_move(const TaqStream& st, const BucketSpec& spec) {
    CurveAccumulator move_acc(spec), wait_acc(spec);
    std::int64_t excluded = 0;
    const auto nq = static_cast<std::int32_t>(st.quotes.size());
    // next quote (same day) whose bid or ask price differs from quote i's
    std::vector<std::int32_t> next_change(nq, -1);
    for (std::int32_t i = nq - 2; i >= 0; --i) {
        const QuoteUpdate& a = st.quotes[i];
        const QuoteUpdate& b = st.quotes[i + 1];
        if (day_of(a.ts_us) != day_of(b.ts_us))
            next_change[i] = -1;
        else if (b.bid_px != a.bid_px || b.ask_px != a.ask_px)
            next_change[i] = i + 1;
        else
            next_change[i] = next_change[i + 1];
    }
    for (std::int32_t i = 0; i < nq; ++i) {
        const QuoteUpdate& q = st.quotes[i];
        const std::int32_t j = next_change[i];
        if (j < 0) {
            ++excluded;
            continue;
        }
        const double I = compute_imbalance(q.bid_qty, q.ask_qty).value;
        const std::int32_t day = day_of(q.ts_us);
        move_acc.add(day, I, (st.quotes[j].mid() - q.mid()) / q.spread());
        wait_acc.add(day, I, static_cast<double>(st.quotes[j].ts_us - q.ts_us) / 1e6);
    }
    return {move_acc.finalize(), wait_acc.finalize(), excluded};
}

SideTradeCurves curve_to_next_trade(const TaqStream& st, TradeSide side,
                                    const BucketSpec& spec) {
    if (side == TradeSide::Unknown)
        throw std::invalid_argument("curve_to_next_trade: side must be Buy or Sell");
    CurveAccumulator move_acc(spec), wait_acc(spec);
    std::int64_t excluded = 0, unknown = 0;
    for (const auto& t : st.trades)
        if (t.side == TradeSide::Unknown) ++unknown;

    const auto next_trade = next_matching(st, [&](const TaqStream::Event& e) {
        return e.is_trade && st.trades[e.idx].side == side;
    });
    // prevailing quote (merged order) before each position
    const auto n = static_cast<std::int32_t>(st.events.size());
    std::vector<std::int32_t> prev_quote(n, -1);
    std::int32_t carry = -1;
    for (std::int32_t i = 0; i < n; ++i) {
        prev_quote[i] = carry;
        if (!st.events[i].is_trade) carry = st.events[i].idx;
    }

    for (std::int32_t pos = 0; pos < n; ++pos) {
        if (st.events[pos].is_trade) continue;
        const QuoteUpdate& q = st.quotes[st.events[pos].idx];
        const std::int32_t tp = next_trade[pos];
        if (tp < 0) {
            ++excluded;
            continue;
        }
        const TradeRecord& tr = st.trades[st.events[tp].idx];
        const std::int32_t pq = prev_quote[tp];
        if (pq < 0) {
            ++excluded;
            continue;
        }
        const double I = compute_imbalance(q.bid_qty, q.ask_qty).value;
        const std::int32_t day = day_of(q.ts_us);
        move_acc.add(day, I, (st.quotes[pq].mid() - q.mid()) / q.spread());
        wait_acc.add(day, I, static_cast<double>(tr.ts_us - q.ts_us) / 1e6);
    }
    return {move_acc.finalize(), wait_acc.finalize(), excluded, unknown};
}

EventCurves curve_event_probabilities(const TaqStream& st, Side near_side,
                                      const BucketSpec& spec) {
    CurveAccumulator fav(spec), unf(spec), fill(spec);
    std::int64_t unclassified = 0;
    const TradeSide fill_side = near_side == Side::Bid ? TradeSide::Sell : TradeSide::Buy;
    // mid moving down is favourable for a broker pegged to the bid
    const double fav_sign = near_side == Side::Bid ? -1.0 : 1.0;

    const auto n = static_cast<std::int32_t>(st.events.size());
    for (std::int32_t pos = 0; pos < n; ++pos) {
        if (st.events[pos].is_trade) continue;
        const QuoteUpdate& q = st.quotes[st.events[pos].idx];
        const std::int32_t day = day_of(q.ts_us);
        const double I = compute_imbalance(q.bid_qty, q.ask_qty).value;
        int outcome = -1;  // 0 fav, 1 unf, 2 fill
        for (std::int32_t j = pos + 1; j < n; ++j) {
            const std::int64_t ts = st.events[j].is_trade ? st.trades[st.events[j].idx].ts_us
                                                          : st.quotes[st.events[j].idx].ts_us;
            if (day_of(ts) != day) break;
            if (st.events[j].is_trade) {
                if (st.trades[st.events[j].idx].side == fill_side) {
                    outcome = 2;
                    break;
                }
            } else {
                const double dm = st.quotes[st.events[j].idx].mid() - q.mid();
                if (dm != 0.0) {
                    outcome = fav_sign * dm > 0.0 ? 0 : 1;
                    break;
                }
            }
        }
        if (outcome < 0) {
            ++unclassified;
            continue;
        }
        fav.add(day, I, outcome == 0 ? 1.0 : 0.0);
        unf.add(day, I, outcome == 1 ? 1.0 : 0.0);
        fill.add(day, I, outcome == 2 ? 1.0 : 0.0);
    }
    return {fav.finalize(), unf.finalize(), fill.finalize(), unclassified};
}

QueueScales estimate_queue_scales(const TaqStream& st) {
    double sb2 = 0, sa2 = 0, tb = 0, ta = 0;
    QueueScales out;
    for (size_t i = 1; i < st.quotes.size(); ++i) {
        const QuoteUpdate& a = st.quotes[i - 1];
        const QuoteUpdate& b = st.quotes[i];
        if (day_of(a.ts_us) != day_of(b.ts_us)) continue;  // skip overnight
        const double dt = static_cast<double>(b.ts_us - a.ts_us) / 1e6;
        if (b.bid_px == a.bid_px) {
            const double d = b.bid_qty - a.bid_qty;
            sb2 += d * d;
            tb += dt;
            ++out.n_b;
        }
        if (b.ask_px == a.ask_px) {
            const double d = b.ask_qty - a.ask_qty;
            sa2 += d * d;
            ta += dt;
            ++out.n_a;
        }
    }
    if (!(sb2 > 0.0) || !(tb > 0.0))
        throw std::runtime_error("bid queue shows no variation; cannot estimate its scale");
    if (!(sa2 > 0.0) || !(ta > 0.0))
        throw std::runtime_error("ask queue shows no variation; cannot estimate its scale");
    out.sigma_b = std::sqrt(sb2 / tb);
    out.sigma_a = std::sqrt(sa2 / ta);
    return out;
}

std::vector<double> reset_samples(const TaqStream& st, Side side) {
    std::vector<double> out;
    for (size_t i = 1; i < st.quotes.size(); ++i) {
        const QuoteUpdate& a = st.quotes[i - 1];
        const QuoteUpdate& b = st.quotes[i];
        if (day_of(a.ts_us) != day_of(b.ts_us)) continue;
        if (side == Side::Bid && b.bid_px != a.bid_px) out.push_back(b.bid_qty);
        if (side == Side::Ask && b.ask_px != a.ask_px) out.push_back(b.ask_qty);
    }
    return out;
}

}  // namespace lobq
