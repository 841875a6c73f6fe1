#include "lobq/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lobq {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool finite_params(const ModelParams& p, double depth) {
    const CorrelationTriple& c = p.corr;
    return std::abs(c.rho_xy) < 1.0 && std::abs(c.rho_xz) < 1.0 &&
           std::abs(c.rho_yz) < 1.0 && c.det() > 0.0 && p.phi0 > 0.0 && depth > 0.0;
}

// Cross-bucket mean of the usable entries; 1.0 when the curve is empty or
// degenerate so normalization never divides by zero.
double curve_scale(const CalCurve& c) {
    double sum = 0.0;
    int n = 0;
    for (size_t b = 0; b < c.mean.size(); ++b) {
        if (std::isfinite(c.mean[b]) && c.std_error[b] > 0.0) {
            sum += std::abs(c.mean[b]);
            ++n;
        }
    }
    const double s = n ? sum / n : 0.0;
    return s > 0.0 ? s : 1.0;
}

// Weighted SSE of one curve pair on a common scale divisor.
double curve_loss(const CalCurve& model, const CalCurve& target, double scale) {
    double acc = 0.0;
    for (size_t b = 0; b < target.mean.size(); ++b) {
        if (!(target.std_error[b] > 0.0) || !std::isfinite(target.mean[b])) continue;
        if (b >= model.mean.size() || !std::isfinite(model.mean[b])) continue;
        const double r = (model.mean[b] - target.mean[b]) / scale;
        const double se = target.std_error[b] / scale;
        acc += (r / se) * (r / se);
    }
    return acc;
}

double total_loss(const CalibrationTarget& model, const CalibrationTarget& target,
                  std::array<double, 7>* per_curve) {
    if (model.buckets.n != target.buckets.n || model.buckets.lo != target.buckets.lo ||
        model.buckets.hi != target.buckets.hi)
        throw std::invalid_argument("objective: bucket grids are misaligned");
    const auto mc = model.curves();
    const auto tc = target.curves();
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) {
        // wait curves (indices 5, 6) are normalized by the target's own
        // cross-bucket mean wait; the others are already dimensionless
        const double scale = i >= 5 ? curve_scale(*tc[i]) : 1.0;
        const double l = curve_loss(*mc[i], *tc[i], scale);
        if (per_curve) (*per_curve)[i] = l;
        acc += l;
    }
    return acc;
}

struct Packing {
    bool tie_ryz;
    bool fit_depth;

    int dim() const { return 3 + (tie_ryz ? 0 : 1) + (fit_depth ? 1 : 0); }

    std::vector<double> pack(const ModelParams& p, double depth) const {
        std::vector<double> x{p.corr.rho_xy, p.corr.rho_xz};
        if (!tie_ryz) x.push_back(p.corr.rho_yz);
        x.push_back(p.phi0);
        if (fit_depth) x.push_back(depth);
        return x;
    }

    void unpack(const std::vector<double>& x, ModelParams& p, double& depth) const {
        size_t i = 0;
        p.corr.rho_xy = x[i++];
        p.corr.rho_xz = x[i++];
        p.corr.rho_yz = tie_ryz ? -p.corr.rho_xz : x[i++];
        p.phi0 = x[i++];
        if (fit_depth) depth = x[i++];
    }
};

// Deterministic scalar stream for restart perturbations.
struct Jitter {
    std::uint64_t s;
    explicit Jitter(std::uint64_t seed) : s(seed) {}
    double sym() {  // uniform in (-1, 1)
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t v = s;
        v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ULL;
        v = (v ^ (v >> 27)) * 0x94d049bb133111ebULL;
        v ^= v >> 31;
        return 2.0 * (static_cast<double>(v >> 11) * 0x1.0p-53) - 1.0;
    }
};

struct NmOutcome {
    std::vector<double> x;
    double f = kInf;
    bool converged = false;
};

template <class F>
NmOutcome nelder_mead(F&& f, const std::vector<double>& x0,
                      const std::vector<double>& step, int max_iter, double tol,
                      std::vector<double>* trace) {
    const int n = static_cast<int>(x0.size());
    std::vector<std::vector<double>> xs(n + 1, x0);
    std::vector<double> fs(n + 1);
    for (int i = 0; i < n; ++i) xs[i + 1][i] += step[i];
    for (int i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<int> ord(n + 1);
    NmOutcome out;
    for (int it = 0; it < max_iter; ++it) {
        for (int i = 0; i <= n; ++i) ord[i] = i;
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        const int best = ord[0], worst = ord[n], second = ord[n - 1];
        if (trace) trace->push_back(fs[best]);
        if (std::isfinite(fs[best]) && fs[worst] - fs[best] <= tol) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (int i = 0; i <= n; ++i)
            if (i != worst)
                for (int d = 0; d < n; ++d) centroid[d] += xs[i][d] / n;

        auto blend = [&](double a) {
            std::vector<double> p(n);
            for (int d = 0; d < n; ++d)
                p[d] = centroid[d] + a * (xs[worst][d] - centroid[d]);
            return p;
        };

        std::vector<double> xr = blend(-1.0);  // reflection
        const double fr = f(xr);
        if (fr < fs[ord[0]]) {
            std::vector<double> xe = blend(-2.0);  // expansion
            const double fe = f(xe);
            if (fe < fr) {
                xs[worst] = std::move(xe);
                fs[worst] = fe;
            } else {
                xs[worst] = std::move(xr);
                fs[worst] = fr;
            }
            continue;
        }
        if (fr < fs[second]) {
            xs[worst] = std::move(xr);
            fs[worst] = fr;
            continue;
        }
        const bool outside = fr < fs[worst];
        std::vector<double> xc = blend(outside ? -0.5 : 0.5);  // contraction
        const double fc = f(xc);
        if (fc < std::min(fr, fs[worst])) {
            xs[worst] = std::move(xc);
            fs[worst] = fc;
            continue;
        }
        for (int i = 0; i <= n; ++i) {  // shrink toward the best vertex
            if (i == best) continue;
            for (int d = 0; d < n; ++d)
                xs[i][d] = xs[best][d] + 0.5 * (xs[i][d] - xs[best][d]);
            fs[i] = f(xs[i]);
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fs[i] < fs[best]) best = i;
    out.x = xs[best];
    out.f = fs[best];
    return out;
}

}  // namespace

const std::array<const char*, 7>& CalibrationTarget::curve_names() {
    static const std::array<const char*, 7> names = {
        "p_fav", "p_unfav", "p_fill", "move_buy", "move_sell", "wait_buy", "wait_sell"};
    return names;
}

CalibrationTarget model_curves(const ModelParams& params, const BucketSpec& buckets,
                               double depth, const ModelCurveConfig& cfg) {
    params.require_valid();
    if (!(depth > 0.0)) throw std::invalid_argument("depth must be > 0");

    CalibrationTarget t;
    t.buckets = buckets;
    const int n = buckets.n;
    for (CalCurve* c : {&t.p_fav, &t.p_unfav, &t.p_fill, &t.move_buy, &t.move_sell,
                        &t.wait_buy, &t.wait_sell}) {
        c->mean.assign(n, kNan);
        c->std_error.assign(n, 0.0);
    }

    const EventSolutions sols = solve_all_events(params.corr, cfg.solver);
    // The series curves are deterministic; give them a nominal probability-
    // scale error so a synthesized target keeps them in the loss.
    const double p_se = 1e-2;

    for (int b = 0; b < n; ++b) {
        OrthantState st = state_from_imbalance({buckets.mid(b)}, depth, params);
        st.x = std::max(st.x, 1e-9);  // |I| = 1 sits on the absorbing wall
        st.y = std::max(st.y, 1e-9);
        const EventProbabilities ep = event_probabilities(sols, st, params.corr);
        const bool bid_near = cfg.near_side == Side::Bid;
        t.p_fav.mean[b] = bid_near ? ep.p_down : ep.p_up;
        t.p_unfav.mean[b] = bid_near ? ep.p_up : ep.p_down;
        t.p_fill.mean[b] = ep.p_trade;
        t.p_fav.std_error[b] = t.p_unfav.std_error[b] = t.p_fill.std_error[b] = p_se;

        // A buy trade executes at the ask, a sell trade at the bid.
        const SideTradeResult buy = simulate_until_side_trade(st, params, Side::Ask, cfg.mc);
        const SideTradeResult sell = simulate_until_side_trade(st, params, Side::Bid, cfg.mc);
        if (buy.n_completed > 0) {
            t.move_buy.mean[b] = buy.move.mean;
            t.move_buy.std_error[b] = buy.move.std_error;
            t.wait_buy.mean[b] = buy.wait.mean;
            t.wait_buy.std_error[b] = buy.wait.std_error;
        }
        if (sell.n_completed > 0) {
            t.move_sell.mean[b] = sell.move.mean;
            t.move_sell.std_error[b] = sell.move.std_error;
            t.wait_sell.mean[b] = sell.wait.mean;
            t.wait_sell.std_error[b] = sell.wait.std_error;
        }
    }
    return t;
}

double objective(const ModelParams& params, const CalibrationTarget& target,
                 double depth, const ModelCurveConfig& cfg) {
    if (!finite_params(params, depth)) return kInf;
    const CalibrationTarget model = model_curves(params, target.buckets, depth, cfg);
    return total_loss(model, target, nullptr);
}

CalibrationResult calibrate(const CalibrationTarget& target, const ModelParams& init,
                            const CalibrateOptions& opt) {
    if (target.buckets.n < 1) throw std::invalid_argument("calibrate: empty target");
    if (!finite_params(init, opt.depth))
        throw std::invalid_argument("calibrate: initial parameters are infeasible");

    const Packing pk{opt.tie_ryz, opt.fit_depth};
    ModelParams work = init;
    double work_depth = opt.depth;

    auto f = [&](const std::vector<double>& x) {
        ModelParams p = init;
        double d = opt.depth;
        pk.unpack(x, p, d);
        if (!finite_params(p, d)) return kInf;
        return objective(p, target, d, opt.curve_cfg);
    };

    std::vector<double> step{0.08, 0.08};
    if (!opt.tie_ryz) step.push_back(0.08);
    step.push_back(0.4);
    if (opt.fit_depth) step.push_back(0.3);

    CalibrationResult res;
    NmOutcome best = nelder_mead(f, pk.pack(init, opt.depth), step, opt.max_iter,
                                 opt.tol, &res.trace);

    Jitter jit(opt.seed);
    for (int r = 0; r < opt.n_restarts && best.f > opt.tol; ++r) {
        std::vector<double> x0 = best.x;
        for (int attempt = 0; attempt < 6; ++attempt) {
            const double damp = std::pow(0.5, attempt);
            x0 = best.x;
            for (size_t d = 0; d < x0.size(); ++d) {
                const bool is_rho = d < (opt.tie_ryz ? 2u : 3u);
                const double amp = is_rho ? 0.15 : 0.3 * std::max(1.0, std::abs(x0[d]));
                x0[d] += damp * amp * jit.sym();
                if (is_rho) x0[d] = std::clamp(x0[d], -0.95, 0.95);
            }
            if (std::isfinite(f(x0))) break;
        }
        NmOutcome run = nelder_mead(f, x0, step, opt.max_iter, opt.tol, &res.trace);
        if (run.f < best.f) best = run;
    }

    pk.unpack(best.x, work, work_depth);
    res.params = work;
    res.depth = work_depth;
    res.objective = best.f;
    res.converged = best.converged && std::isfinite(best.f);
    const CalibrationTarget model =
        model_curves(work, target.buckets, work_depth, opt.curve_cfg);
    total_loss(model, target, &res.curve_residuals);
    return res;
}

}  // namespace lobq
