#pragma once

#include <cstdint>
#include <vector>

#include "lobq/model.hpp"
#include "lobq/series.hpp"

namespace lobq {

// Euler scheme on the correlated driver with an optional per-coordinate
// Brownian-bridge correction for crossings missed between grid points.
//
// Determinism: each path has its own generator keyed by (seed, path index)
// — xoshiro256++ bits, ziggurat normals, both algorithms pinned in this
// library rather than taken from the standard library — and per-chunk
// partial results are combined in fixed chunk order, so every estimate is
// bit-identical for a given (seed, n_paths, dt) regardless of worker count
// or platform.
struct SimConfig {
    double dt = 1e-3;          // step, seconds (normalized units)
    std::int64_t n_paths = 100000;
    std::uint64_t seed = 1;
    bool bridge_correction = true;
    int max_epochs = 4096;     // queue-reset budget per path (multi-epoch runs)
    double horizon = 10000.0;  // sim-seconds per path before censoring
    int n_threads = 0;         // 0 => hardware concurrency
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

struct FirstEventResult {
    McEstimate p_down, p_up, p_trade;  // binomial SEs
    std::int64_t counts[3] = {0, 0, 0};
    std::int64_t n_completed = 0;
    std::int64_t n_censored = 0;
};

// First boundary hit from a fixed state: which of {bid depletion, ask
// depletion, trade} happens first. Counts partition n_completed exactly.
FirstEventResult simulate_first_event(const OrthantState& s,
                                      const CorrelationTriple& corr,
                                      const SimConfig& cfg);

struct MidMoveResult {
    McEstimate move;  // (next mid - mid) / spread at the first depletion
    McEstimate wait;  // seconds to the first depletion
    McEstimate p_up;
    std::int64_t n_completed = 0;
    std::int64_t n_censored = 0;
};

// Two-coordinate submodel: evolve the queues only and stop at the first
// depletion (one epoch, no resets).
MidMoveResult simulate_next_mid_move(const WedgeState& s, const ModelParams& p,
                                     const SimConfig& cfg);

struct SideTradeResult {
    McEstimate move;  // accumulated mid displacement in spreads at the fill
    McEstimate wait;  // seconds until the fill
    std::int64_t n_completed = 0;
    std::int64_t n_censored = 0;
    double censored_fraction = 0.0;
};

// Multi-epoch walk until the near-side trade fires: queue depletions move
// the mid one tick, the depleted queue is redrawn from its reset
// distribution, and the trade level restarts at phi0. side = Bid runs the
// model as-is (broker pegging the bid, filled by sell trades); side = Ask
// runs the mirrored book with the price axis flipped.
SideTradeResult simulate_until_side_trade(const OrthantState& s,
                                          const ModelParams& p, Side side,
                                          const SimConfig& cfg);

}  // namespace lobq
