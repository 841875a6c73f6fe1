#include "lobq/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lobq {

const char* outcome_name(Outcome e) {
    switch (e) {
        case Outcome::DownTick: return "down";
        case Outcome::UpTick: return "up";
        case Outcome::Trade: return "trade";
    }
    return "?";
}

namespace {

constexpr double kPi = 3.14159265358979323846;

int auto_nodes(int n_modes, const QuadratureSpec& q) {
    if (q.n_nodes > 0) {
        if (q.n_nodes < 2 * n_modes)
            throw std::invalid_argument("quadrature nodes must be >= 2x mode count");
        return q.n_nodes;
    }
    // The integrands oscillate with wavenumber up to 2 k_N = 2 pi N / phi_max;
    // resolving them needs comfortably more than pi N points on [0, phi_max].
    return std::max(2 * n_modes, 4 * n_modes + 40);
}

double base_value(Outcome e, double phi, double fm) {
    switch (e) {
        case Outcome::UpTick: return phi / fm;
        case Outcome::DownTick: return 1.0 - phi / fm;
        case Outcome::Trade: return 0.0;
    }
    return 0.0;
}

double wall_value(Outcome e) { return e == Outcome::Trade ? 1.0 : 0.0; }

struct Design {
    double fm = 0.0;
    double shift = 0.0;
    Eigen::MatrixXd A;  // sqrt(w)-weighted boundary-restricted modes, M x N
    QuadratureRule rule;
};

Design build_design(const CorrelationTriple& corr, int n_modes,
                    const QuadratureSpec& quad) {
    corr.require_valid();
    if (n_modes < 1) throw std::invalid_argument("mode count must be >= 1");

    Design d;
    d.fm = phi_max(corr.rho_xy);
    const int N = n_modes;
    const int M = auto_nodes(N, quad);
    d.rule = gauss_legendre(M, 0.0, d.fm);

    std::vector<double> Z(M);
    double zmax = 0.0;
    for (int i = 0; i < M; ++i) {
        Z[i] = boundary_Z(d.rule.x[i], corr);
        zmax = std::max(zmax, Z[i]);
    }
    d.shift = zmax;

    d.A.resize(M, N);
    const double k1 = kPi / d.fm;
    for (int i = 0; i < M; ++i) {
        const double sw = std::sqrt(d.rule.w[i]);
        // sin(n k1 phi) by Chebyshev recurrence, exp(n k1 u) by repeated product
        const double c2a = 2.0 * std::cos(k1 * d.rule.x[i]);
        const double e1 = std::exp(k1 * (Z[i] - d.shift));
        double sprev = 0.0, scur = std::sin(k1 * d.rule.x[i]);
        double en = e1;
        for (int n = 0; n < N; ++n) {
            d.A(i, n) = sw * scur * en;
            const double snext = c2a * scur - sprev;
            sprev = scur;
            scur = snext;
            en *= e1;
        }
    }
    return d;
}

Eigen::VectorXd weighted_data(const Design& d, Outcome event) {
    const int M = static_cast<int>(d.rule.x.size());
    Eigen::VectorXd b(M);
    for (int i = 0; i < M; ++i) {
        const double data = wall_value(event) - base_value(event, d.rule.x[i], d.fm);
        b(i) = std::sqrt(d.rule.w[i]) * data;
    }
    return b;
}

[[noreturn]] void throw_ill_conditioned(double cond, double limit) {
    std::ostringstream msg;
    msg << "boundary fit is ill-conditioned (estimate " << cond << " > " << limit
        << "); reduce the mode count or increase quadrature nodes";
    throw std::runtime_error(msg.str());
}

Eigen::VectorXd solve_system(const Eigen::MatrixXd& J, const Eigen::VectorXd& I,
                             double max_condition, double* cond_out) {
    const int n = static_cast<int>(J.rows());
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
    const auto& R = qr.matrixR();
    const double r0 = std::abs(R(0, 0));
    const double rn = std::abs(R(n - 1, n - 1));
    const double cond = (rn > 0.0) ? r0 / rn : std::numeric_limits<double>::infinity();
    if (cond_out) *cond_out = cond;
    if (cond > max_condition) throw_ill_conditioned(cond, max_condition);

    Eigen::VectorXd c = qr.solve(I);
    c += qr.solve(I - J * c);  // one refinement step in working precision
    const double resid = (J * c - I).lpNorm<Eigen::Infinity>();
    const double scale = std::max(I.lpNorm<Eigen::Infinity>(),
                                  std::numeric_limits<double>::min());
    if (resid > 1e-8 * scale) throw_ill_conditioned(cond, max_condition);
    return c;
}

SeriesSolution make_solution(const BoundarySystem& sys, Outcome event,
                             std::vector<double> coeffs) {
    SeriesSolution sol;
    sol.event = event;
    sol.phi_max = sys.phi_max;
    sol.zeta_shift = sys.zeta_shift;
    sol.base_term = event != Outcome::Trade;
    sol.coeffs = std::move(coeffs);
    return sol;
}

}  // namespace

BoundarySystem assemble_system(const CorrelationTriple& corr, Outcome event,
                               int n_modes, const QuadratureSpec& quad) {
    const Design d = build_design(corr, n_modes, quad);
    const int N = n_modes;

    BoundarySystem sys;
    sys.n_modes = N;
    sys.phi_max = d.fm;
    sys.zeta_shift = d.shift;

    const Eigen::MatrixXd J = d.A.transpose() * d.A;
    const Eigen::VectorXd I = d.A.transpose() * weighted_data(d, event);
    sys.J.resize(static_cast<size_t>(N) * N);
    sys.I.assign(I.data(), I.data() + N);
    for (int m = 0; m < N; ++m)
        for (int n = 0; n < N; ++n) sys.J[static_cast<size_t>(m) * N + n] = J(m, n);
    return sys;
}

std::vector<double> solve_coefficients(const BoundarySystem& sys, double max_condition) {
    const int n = sys.n_modes;
    if (n < 1 || sys.I.size() != static_cast<size_t>(n) ||
        sys.J.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("solve_coefficients: malformed system");
    const Eigen::Map<const Eigen::MatrixXd> J(sys.J.data(), n, n);  // symmetric
    const Eigen::Map<const Eigen::VectorXd> I(sys.I.data(), n);
    const Eigen::VectorXd c = solve_system(J, I, max_condition, nullptr);
    return {c.data(), c.data() + n};
}

EventSolutions solve_all_events(const CorrelationTriple& corr,
                                const SolverOptions& opt, SolveReport* report) {
    int N = opt.n_modes;
    for (;;) {
        const Design d = build_design(corr, N, opt.quad);
        const Eigen::MatrixXd J = d.A.transpose() * d.A;
        const Eigen::VectorXd It = d.A.transpose() * weighted_data(d, Outcome::Trade);
        const Eigen::VectorXd Iu = d.A.transpose() * weighted_data(d, Outcome::UpTick);
        try {
            double cond = 0.0;
            const Eigen::VectorXd ct = solve_system(J, It, opt.max_condition, &cond);
            const Eigen::VectorXd cu = solve_system(J, Iu, opt.max_condition, nullptr);
            if (report) *report = {opt.n_modes, N, cond};

            BoundarySystem shape;
            shape.n_modes = N;
            shape.phi_max = d.fm;
            shape.zeta_shift = d.shift;
            // The three boundary-data functions sum to zero pointwise, so the
            // DownTick coefficients are exactly minus the other two; forming
            // them that way makes the sum-to-one identity hold to rounding.
            std::vector<double> vt(ct.data(), ct.data() + N);
            std::vector<double> vu(cu.data(), cu.data() + N);
            std::vector<double> vd(N);
            for (int i = 0; i < N; ++i) vd[i] = -(vt[i] + vu[i]);
            return {make_solution(shape, Outcome::DownTick, std::move(vd)),
                    make_solution(shape, Outcome::UpTick, std::move(vu)),
                    make_solution(shape, Outcome::Trade, std::move(vt))};
        } catch (const std::runtime_error&) {
            if (!opt.auto_reduce || N <= 1) throw;
            N = std::max(1, (3 * N) / 4);
        }
    }
}

SeriesSolution solve_event(const CorrelationTriple& corr, Outcome event,
                           const SolverOptions& opt, SolveReport* report) {
    EventSolutions all = solve_all_events(corr, opt, report);
    switch (event) {
        case Outcome::DownTick: return std::move(all.down);
        case Outcome::UpTick: return std::move(all.up);
        case Outcome::Trade: return std::move(all.trade);
    }
    return std::move(all.trade);
}

double fit_condition(const CorrelationTriple& corr, const SolverOptions& opt) {
    const Design d = build_design(corr, opt.n_modes, opt.quad);
    const Eigen::MatrixXd J = d.A.transpose() * d.A;
    const int n = opt.n_modes;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
    const auto& R = qr.matrixR();
    const double rn = std::abs(R(n - 1, n - 1));
    return rn > 0.0 ? std::abs(R(0, 0)) / rn : std::numeric_limits<double>::infinity();
}

double eval_strip(const SeriesSolution& sol, double phi, double zeta) {
    const double fm = sol.phi_max;
    const double k1 = kPi / fm;
    const double u = zeta - sol.zeta_shift;
    const double c2a = 2.0 * std::cos(k1 * phi);
    const double e1 = std::exp(k1 * u);
    double sprev = 0.0, scur = std::sin(k1 * phi);
    double en = e1;
    double acc = 0.0;
    for (double c : sol.coeffs) {
        acc += c * scur * en;
        const double snext = c2a * scur - sprev;
        sprev = scur;
        scur = snext;
        en *= e1;
    }
    return acc + base_value(sol.event, phi, fm);
}

double eval_raw(const SeriesSolution& sol, const OrthantState& s,
                const CorrelationTriple& corr) {
    if (!(s.x > 0.0) || !(s.y > 0.0) || !(s.z > 0.0))
        throw std::invalid_argument("eval: state must be in the open positive orthant");
    const StripPoint sp = to_strip(s, corr);
    return eval_strip(sol, sp.phi, sp.zeta);
}

double eval_probability(const SeriesSolution& sol, const OrthantState& s,
                        const CorrelationTriple& corr, double* clamp_excess) {
    const double raw = eval_raw(sol, s, corr);
    const double p = std::clamp(raw, 0.0, 1.0);
    if (clamp_excess) *clamp_excess = std::abs(raw - p);
    return p;
}

EventProbabilities event_probabilities(const EventSolutions& sols,
                                       const OrthantState& s,
                                       const CorrelationTriple& corr) {
    EventProbabilities out;
    double e0 = 0.0, e1 = 0.0, e2 = 0.0;
    out.p_down = eval_probability(sols.down, s, corr, &e0);
    out.p_up = eval_probability(sols.up, s, corr, &e1);
    out.p_trade = eval_probability(sols.trade, s, corr, &e2);
    out.clamp_excess = std::max({e0, e1, e2});
    return out;
}

BoundaryMismatch boundary_mismatch(const SeriesSolution& sol,
                                   const CorrelationTriple& corr, int n_probe) {
    const QuadratureRule probe = gauss_legendre(n_probe, 0.0, sol.phi_max);
    BoundaryMismatch bm;
    double acc = 0.0;
    for (int i = 0; i < n_probe; ++i) {
        const double mis =
            eval_strip(sol, probe.x[i], boundary_Z(probe.x[i], corr)) - wall_value(sol.event);
        bm.max_abs = std::max(bm.max_abs, std::abs(mis));
        acc += probe.w[i] * mis * mis;
    }
    bm.rms = std::sqrt(acc / sol.phi_max);
    return bm;
}

void save_solution(std::ostream& os, const SeriesSolution& sol) {
    os.precision(17);
    os << "lobq-series 1\n"
       << "event " << outcome_name(sol.event) << "\n"
       << "phi_max " << sol.phi_max << "\n"
       << "zeta_shift " << sol.zeta_shift << "\n"
       << "base_term " << (sol.base_term ? 1 : 0) << "\n"
       << "n_modes " << sol.n_modes() << "\n";
    for (double c : sol.coeffs) os << c << "\n";
}

SeriesSolution load_solution(std::istream& is) {
    std::string magic;
    int version = 0;
    is >> magic >> version;
    if (magic != "lobq-series" || version != 1)
        throw std::runtime_error("unrecognized series-solution format");
    SeriesSolution sol;
    std::string key, ev;
    int base = 0, n = 0;
    is >> key >> ev;
    if (key != "event") throw std::runtime_error("series file: expected 'event'");
    if (ev == "down") sol.event = Outcome::DownTick;
    else if (ev == "up") sol.event = Outcome::UpTick;
    else if (ev == "trade") sol.event = Outcome::Trade;
    else throw std::runtime_error("series file: unknown event '" + ev + "'");
    is >> key >> sol.phi_max;
    if (key != "phi_max") throw std::runtime_error("series file: expected 'phi_max'");
    is >> key >> sol.zeta_shift;
    if (key != "zeta_shift") throw std::runtime_error("series file: expected 'zeta_shift'");
    is >> key >> base;
    if (key != "base_term") throw std::runtime_error("series file: expected 'base_term'");
    sol.base_term = base != 0;
    is >> key >> n;
    if (key != "n_modes" || n < 0) throw std::runtime_error("series file: expected 'n_modes'");
    sol.coeffs.resize(n);
    for (int i = 0; i < n; ++i) {
        if (!(is >> sol.coeffs[i]))
            throw std::runtime_error("series file: truncated coefficient list");
    }
    return sol;
}

}  // namespace lobq
