#include "lobq/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

namespace lobq {

namespace {

constexpr std::int64_t kChunk = 4096;

std::uint64_t splitmix64(std::uint64_t v) {
    v += 0x9e3779b97f4a7c15ULL;
    v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
    v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
    return v ^ (v >> 31);
}

// ==== per-path random source ================================================
// xoshiro256++ keyed by (seed, path) through splitmix64, normals via a
// 128-layer ziggurat. Both algorithms are fixed by this file, so streams are
// identical across platforms and standard-library versions.

struct Ziggurat {
    double x[129];
    double f[129];

    Ziggurat() {
        // Canonical 128-layer constants: tail start r, common layer area v.
        const double r = 3.442619855899;
        const double v = 9.91256303526217e-3;
        x[1] = r;
        x[0] = v * std::exp(0.5 * r * r);  // pseudo-width of the base layer
        for (int i = 2; i < 128; ++i)
            x[i] = std::sqrt(-2.0 * std::log(v / x[i - 1] +
                                             std::exp(-0.5 * x[i - 1] * x[i - 1])));
        x[128] = 0.0;
        for (int i = 0; i <= 128; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
    }
};

const Ziggurat kZig;

class PathRng {
  public:
    PathRng(std::uint64_t seed, std::uint64_t path) {
        std::uint64_t k = splitmix64(seed ^ splitmix64(path));
        for (auto& w : s_) {
            k += 0x9e3779b97f4a7c15ULL;
            w = splitmix64(k);
        }
    }

    std::uint64_t bits() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    double uniform() { return static_cast<double>(bits() >> 11) * 0x1.0p-53; }

    double normal() {
        for (;;) {
            const std::uint64_t b = bits();
            const int i = static_cast<int>(b & 127);
            const double u = static_cast<double>(b >> 11) * 0x1.0p-53;
            const double ax = u * kZig.x[i];
            if (ax < kZig.x[i + 1]) return (b & 128) ? -ax : ax;
            if (i == 0) {  // tail beyond r
                const double r = kZig.x[1];
                double xx, yy;
                do {
                    xx = -std::log(1.0 - uniform()) / r;
                    yy = -std::log(1.0 - uniform());
                } while (yy + yy < xx * xx);
                return (b & 128) ? -(r + xx) : (r + xx);
            }
            const double y = kZig.f[i] + uniform() * (kZig.f[i + 1] - kZig.f[i]);
            if (y < std::exp(-0.5 * ax * ax)) return (b & 128) ? -ax : ax;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t v, int k) {
        return (v << k) | (v >> (64 - k));
    }
    std::uint64_t s_[4];
};

struct Chol3 {
    // Lower-triangular factor of the 3x3 correlation matrix.
    double l11 = 1, l21 = 0, l22 = 1, l31 = 0, l32 = 0, l33 = 1;
};

Chol3 cholesky(const CorrelationTriple& c) {
    c.require_valid();
    Chol3 L;
    L.l21 = c.rho_xy;
    L.l22 = std::sqrt(1.0 - c.rho_xy * c.rho_xy);
    L.l31 = c.rho_xz;
    L.l32 = (c.rho_yz - c.rho_xy * c.rho_xz) / L.l22;
    L.l33 = std::sqrt(1.0 - L.l31 * L.l31 - L.l32 * L.l32);
    return L;
}

// One-step crossing test for a single coordinate. Returns the in-step time
// fraction of the crossing, or +inf when the coordinate did not cross.
// Interior (bridge-sampled) crossings use the reflected-endpoint fraction
// a/(a+b), the same expression endpoint crossings reduce to with b <= 0.
inline double crossing_fraction(double a, double b, double dt, bool bridge,
                                PathRng& rng) {
    if (b <= 0.0) return a / (a - b);
    if (bridge) {
        const double q = 2.0 * a * b / dt;
        if (q < 36.0 && rng.uniform() < std::exp(-q))  // exp(-36) ~ 2e-16
            return a / (a + b);
    }
    return std::numeric_limits<double>::infinity();
}

int pick_threads(const SimConfig& cfg) {
    if (cfg.n_threads > 0) return cfg.n_threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Runs fn(chunk_index, first_path, n_in_chunk) over all paths; chunks are
// dispatched to workers dynamically but identified by index, so any
// per-chunk output can be reduced in fixed order afterwards.
template <class Fn>
void run_chunked(std::int64_t n_paths, int n_threads, Fn&& fn) {
    const std::int64_t n_chunks = (n_paths + kChunk - 1) / kChunk;
    std::atomic<std::int64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::int64_t ci = next.fetch_add(1);
            if (ci >= n_chunks) return;
            const std::int64_t first = ci * kChunk;
            fn(ci, first, std::min(kChunk, n_paths - first));
        }
    };
    if (n_threads <= 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

McEstimate binomial_estimate(std::int64_t count, std::int64_t n) {
    if (n <= 0) return {};
    const double p = static_cast<double>(count) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), n};
}

McEstimate mean_estimate(double sum, double sumsq, std::int64_t n) {
    if (n <= 0) return {};
    const double mean = sum / static_cast<double>(n);
    double se = 0.0;
    if (n > 1) {
        const double var = std::max(0.0, (sumsq - mean * sum) / static_cast<double>(n - 1));
        se = std::sqrt(var / static_cast<double>(n));
    }
    return {mean, se, n};
}

double draw_reset(const ResetDistribution& d, PathRng& rng) {
    switch (d.kind) {
        case ResetDistribution::Kind::Fixed:
            return d.median;
        case ResetDistribution::Kind::Lognormal:
            return d.median * std::exp(d.dispersion * rng.normal());
        case ResetDistribution::Kind::Empirical: {
            const auto i = static_cast<size_t>(rng.uniform() * static_cast<double>(d.values.size()));
            return d.values[std::min(i, d.values.size() - 1)];
        }
    }
    return d.median;
}

void check_cfg(const SimConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (cfg.n_paths < 1) throw std::invalid_argument("n_paths must be >= 1");
    if (cfg.max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
    if (!(cfg.horizon > 0.0)) throw std::invalid_argument("horizon must be > 0");
}

}  // namespace

FirstEventResult simulate_first_event(const OrthantState& s,
                                      const CorrelationTriple& corr,
                                      const SimConfig& cfg) {
    check_cfg(cfg);
    if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
        throw std::invalid_argument("state must be in the open positive orthant");
    const Chol3 L = cholesky(corr);
    const double sq = std::sqrt(cfg.dt);
    const auto max_steps =
        static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt));

    struct ChunkAcc {
        std::int64_t counts[3] = {0, 0, 0};
        std::int64_t censored = 0;
    };
    const std::int64_t n_chunks = (cfg.n_paths + kChunk - 1) / kChunk;
    std::vector<ChunkAcc> acc(n_chunks);

    run_chunked(cfg.n_paths, pick_threads(cfg), [&](std::int64_t ci, std::int64_t first,
                                                    std::int64_t count) {
        ChunkAcc& a = acc[ci];
        for (std::int64_t p = 0; p < count; ++p) {
            PathRng rng(cfg.seed, static_cast<std::uint64_t>(first + p));
            double x = s.x, y = s.y, z = s.z;
            int hit = -1;
            for (std::int64_t step = 0; step < max_steps; ++step) {
                const double g0 = rng.normal(), g1 = rng.normal(), g2 = rng.normal();
                const double nx = x + sq * g0;
                const double ny = y + sq * (L.l21 * g0 + L.l22 * g1);
                const double nz = z + sq * (L.l31 * g0 + L.l32 * g1 + L.l33 * g2);
                const double fx = crossing_fraction(x, nx, cfg.dt, cfg.bridge_correction, rng);
                const double fy = crossing_fraction(y, ny, cfg.dt, cfg.bridge_correction, rng);
                const double fz = crossing_fraction(z, nz, cfg.dt, cfg.bridge_correction, rng);
                if (fx != std::numeric_limits<double>::infinity() ||
                    fy != std::numeric_limits<double>::infinity() ||
                    fz != std::numeric_limits<double>::infinity()) {
                    hit = 0;  // earliest in-step crossing; ties favour bid, ask, trade
                    if (fy < fx) hit = 1;
                    if (fz < (hit == 0 ? fx : fy)) hit = 2;
                    break;
                }
                x = nx;
                y = ny;
                z = nz;
            }
            if (hit < 0)
                ++a.censored;
            else
                ++a.counts[hit];
        }
    });

    FirstEventResult out;
    for (const auto& a : acc) {
        for (int i = 0; i < 3; ++i) out.counts[i] += a.counts[i];
        out.n_censored += a.censored;
    }
    out.n_completed = out.counts[0] + out.counts[1] + out.counts[2];
    out.p_down = binomial_estimate(out.counts[0], out.n_completed);
    out.p_up = binomial_estimate(out.counts[1], out.n_completed);
    out.p_trade = binomial_estimate(out.counts[2], out.n_completed);
    return out;
}

MidMoveResult simulate_next_mid_move(const WedgeState& s, const ModelParams& p,
                                     const SimConfig& cfg) {
    check_cfg(cfg);
    if (!(s.x > 0.0) || !(s.y > 0.0))
        throw std::invalid_argument("state must be in the open positive quadrant");
    const double rho = p.corr.rho_xy;
    if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("|rho_xy| must be < 1");
    const double l22 = std::sqrt(1.0 - rho * rho);
    const double sq = std::sqrt(cfg.dt);
    const double tick_in_spreads = p.tick / p.spread;
    const auto max_steps =
        static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt));

    struct ChunkAcc {
        std::int64_t up = 0, down = 0, censored = 0;
        double sum_wait = 0, sumsq_wait = 0;
    };
    const std::int64_t n_chunks = (cfg.n_paths + kChunk - 1) / kChunk;
    std::vector<ChunkAcc> acc(n_chunks);

    run_chunked(cfg.n_paths, pick_threads(cfg), [&](std::int64_t ci, std::int64_t first,
                                                    std::int64_t count) {
        ChunkAcc& a = acc[ci];
        for (std::int64_t pi = 0; pi < count; ++pi) {
            PathRng rng(cfg.seed, static_cast<std::uint64_t>(first + pi));
            double x = s.x, y = s.y;
            bool hit = false;
            for (std::int64_t step = 0; step < max_steps && !hit; ++step) {
                const double g0 = rng.normal(), g1 = rng.normal();
                const double nx = x + sq * g0;
                const double ny = y + sq * (rho * g0 + l22 * g1);
                const double fx = crossing_fraction(x, nx, cfg.dt, cfg.bridge_correction, rng);
                const double fy = crossing_fraction(y, ny, cfg.dt, cfg.bridge_correction, rng);
                if (fx != std::numeric_limits<double>::infinity() ||
                    fy != std::numeric_limits<double>::infinity()) {
                    hit = true;
                    const bool up = fy < fx;
                    const double t = (static_cast<double>(step) + std::min(fx, fy)) * cfg.dt;
                    (up ? a.up : a.down) += 1;
                    a.sum_wait += t;
                    a.sumsq_wait += t * t;
                } else {
                    x = nx;
                    y = ny;
                }
            }
            if (!hit) ++a.censored;
        }
    });

    std::int64_t up = 0, down = 0, censored = 0;
    double sw = 0, sw2 = 0;
    for (const auto& a : acc) {
        up += a.up;
        down += a.down;
        censored += a.censored;
        sw += a.sum_wait;
        sw2 += a.sumsq_wait;
    }
    MidMoveResult out;
    out.n_completed = up + down;
    out.n_censored = censored;
    out.p_up = binomial_estimate(up, out.n_completed);
    // move = +tick on an up-tick, -tick on a down-tick, in spread units
    const double pu = out.p_up.mean;
    const double m = tick_in_spreads * (2.0 * pu - 1.0);
    const double var_move =
        out.n_completed > 1 ? 4.0 * tick_in_spreads * tick_in_spreads * pu * (1.0 - pu) : 0.0;
    out.move = {m, out.n_completed ? std::sqrt(var_move / out.n_completed) : 0.0,
                out.n_completed};
    out.wait = mean_estimate(sw, sw2, out.n_completed);
    return out;
}

SideTradeResult simulate_until_side_trade(const OrthantState& s,
                                          const ModelParams& p, Side side,
                                          const SimConfig& cfg) {
    check_cfg(cfg);
    p.require_valid();
    if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
        throw std::invalid_argument("state must be in the open positive orthant");

    // side == Ask mirrors the book: the near queue is the ask, resets and
    // sigmas swap, and engine price moves flip sign.
    const bool mirror = side == Side::Ask;
    const double x0 = mirror ? s.y : s.x;
    const double y0 = mirror ? s.x : s.y;
    const ResetDistribution reset_near = mirror ? p.reset_a : p.reset_b;
    const ResetDistribution reset_far = mirror ? p.reset_b : p.reset_a;
    const double sigma_near = mirror ? p.sigma_a : p.sigma_b;
    const double sigma_far = mirror ? p.sigma_b : p.sigma_a;
    const double move_sign = mirror ? -1.0 : 1.0;

    const Chol3 L = cholesky(p.corr);
    const double sq = std::sqrt(cfg.dt);
    const double tick_in_spreads = p.tick / p.spread;
    const auto max_steps =
        static_cast<std::int64_t>(std::ceil(cfg.horizon / cfg.dt));

    struct ChunkAcc {
        std::int64_t completed = 0, censored = 0;
        double sum_move = 0, sumsq_move = 0;
        double sum_wait = 0, sumsq_wait = 0;
    };
    const std::int64_t n_chunks = (cfg.n_paths + kChunk - 1) / kChunk;
    std::vector<ChunkAcc> acc(n_chunks);

    run_chunked(cfg.n_paths, pick_threads(cfg), [&](std::int64_t ci, std::int64_t first,
                                                    std::int64_t count) {
        ChunkAcc& a = acc[ci];
        for (std::int64_t pi = 0; pi < count; ++pi) {
            PathRng rng(cfg.seed, static_cast<std::uint64_t>(first + pi));
            double x = x0, y = y0, z = s.z;
            double ticks = 0.0;
            int epochs = 0;
            bool done = false, censored = false;
            std::int64_t step = 0;
            while (!done && !censored) {
                if (step >= max_steps) {
                    censored = true;
                    break;
                }
                const double g0 = rng.normal(), g1 = rng.normal(), g2 = rng.normal();
                const double nx = x + sq * g0;
                const double ny = y + sq * (L.l21 * g0 + L.l22 * g1);
                const double nz = z + sq * (L.l31 * g0 + L.l32 * g1 + L.l33 * g2);
                const double fx = crossing_fraction(x, nx, cfg.dt, cfg.bridge_correction, rng);
                const double fy = crossing_fraction(y, ny, cfg.dt, cfg.bridge_correction, rng);
                const double fz = crossing_fraction(z, nz, cfg.dt, cfg.bridge_correction, rng);
                if (fx == std::numeric_limits<double>::infinity() &&
                    fy == std::numeric_limits<double>::infinity() &&
                    fz == std::numeric_limits<double>::infinity()) {
                    x = nx;
                    y = ny;
                    z = nz;
                    ++step;
                    continue;
                }
                int hit = 0;
                if (fy < fx) hit = 1;
                if (fz < (hit == 0 ? fx : fy)) hit = 2;
                const double f = hit == 0 ? fx : (hit == 1 ? fy : fz);
                if (hit == 2) {
                    const double t = (static_cast<double>(step) + f) * cfg.dt;
                    const double mv = move_sign * ticks * tick_in_spreads;
                    a.sum_move += mv;
                    a.sumsq_move += mv * mv;
                    a.sum_wait += t;
                    a.sumsq_wait += t * t;
                    ++a.completed;
                    done = true;
                    break;
                }
                // Queue depletion: advance the surviving coordinates to the
                // crossing instant, tick the engine mid, redraw the depleted
                // queue (share units / sigma), restart the trade level.
                if (hit == 0) {
                    ticks -= 1.0;
                    y = y + f * (ny - y);
                    x = draw_reset(reset_near, rng) / sigma_near;
                } else {
                    ticks += 1.0;
                    x = x + f * (nx - x);
                    y = draw_reset(reset_far, rng) / sigma_far;
                }
                z = p.phi0;
                ++epochs;
                ++step;  // charge the partial step as a full one
                if (epochs >= cfg.max_epochs) censored = true;
            }
            if (censored) ++a.censored;
        }
    });

    std::int64_t completed = 0, censored = 0;
    double sm = 0, sm2 = 0, sw = 0, sw2 = 0;
    for (const auto& a : acc) {
        completed += a.completed;
        censored += a.censored;
        sm += a.sum_move;
        sm2 += a.sumsq_move;
        sw += a.sum_wait;
        sw2 += a.sumsq_wait;
    }
    SideTradeResult out;
    out.n_completed = completed;
    out.n_censored = censored;
    out.censored_fraction =
        cfg.n_paths ? static_cast<double>(censored) / static_cast<double>(cfg.n_paths) : 0.0;
    out.move = mean_estimate(sm, sm2, completed);
    out.wait = mean_estimate(sw, sw2, completed);
    return out;
}

}  // namespace lobq
