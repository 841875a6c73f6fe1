#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "lobq/model.hpp"
#include "lobq/series.hpp"

using namespace lobq;

namespace {

constexpr double kPi = 3.14159265358979323846;

CorrelationTriple random_valid_triple(std::mt19937_64& rng, double min_det = 0.05) {
    std::uniform_real_distribution<double> u(-0.9, 0.9);
    for (;;) {
        CorrelationTriple c{u(rng), u(rng), u(rng)};
        if (c.det() > min_det) return c;
    }
}

// The strongly coupled reference triple, pulled back inside the feasible
// region along the (rho_xz, rho_yz) ray.
CorrelationTriple reference_triple() {
    return project_feasible({-0.1, 0.8, -0.8}, 0.05);
}

}  // namespace

TEST_CASE("uncorrelated boundary system is diagonal with known entries") {
    // With all correlations zero: phi_max = pi/2, Z == 0, k_n = 2n, so
    //   J_mn = (pi/4) delta_mn
    //   I_m(trade) =  (1 - (-1)^m) / (2m)
    //   I_m(up)    =  (-1)^m / (2m)
    //   I_m(down)  = -1 / (2m)
    const CorrelationTriple c0{};
    const int N = 6;
    const auto trade = assemble_system(c0, Outcome::Trade, N);
    const auto up = assemble_system(c0, Outcome::UpTick, N);
    const auto down = assemble_system(c0, Outcome::DownTick, N);
    CHECK(trade.phi_max == doctest::Approx(kPi / 2).epsilon(1e-15));
    CHECK(trade.zeta_shift == doctest::Approx(0.0));

    for (int m = 0; m < N; ++m) {
        for (int n = 0; n < N; ++n) {
            const double expect = m == n ? kPi / 4.0 : 0.0;
            CHECK(trade.j(m, n) == doctest::Approx(expect).epsilon(1e-10));
        }
        const int mm = m + 1;
        const double sign = mm % 2 == 0 ? 1.0 : -1.0;
        CHECK(trade.I[m] == doctest::Approx((1.0 - sign) / (2.0 * mm)).epsilon(1e-10));
        CHECK(up.I[m] == doctest::Approx(sign / (2.0 * mm)).epsilon(1e-10));
        CHECK(down.I[m] == doctest::Approx(-1.0 / (2.0 * mm)).epsilon(1e-10));
    }

    // c_n = I_n / J_nn; for the trade data that is 2 (1 - (-1)^n) / (pi n).
    const auto coeffs = solve_coefficients(trade);
    for (int n = 1; n <= N; ++n) {
        const double sign = n % 2 == 0 ? 1.0 : -1.0;
        CHECK(coeffs[n - 1] ==
              doctest::Approx(2.0 * (1.0 - sign) / (kPi * n)).epsilon(1e-9));
    }
}

TEST_CASE("boundary system is symmetric for generic parameters") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 5; ++rep) {
        const auto c = random_valid_triple(rng);
        const auto sys = assemble_system(c, Outcome::Trade, 8);
        for (int m = 0; m < 8; ++m)
            for (int n = m + 1; n < 8; ++n)
                CHECK(sys.j(m, n) == doctest::Approx(sys.j(n, m)).epsilon(1e-13));
    }
}

TEST_CASE("fitted solution is converged in the node count") {
    // The Gram system is poorly conditioned even at mild coupling, so raw
    // coefficients shift under quadrature refinement; what must converge is
    // the fitted function, where the unstable directions are exponentially
    // suppressed away from the boundary.
    const CorrelationTriple c{0.3, -0.2, 0.1};
    SolverOptions opt;
    opt.n_modes = 12;
    const auto base = solve_event(c, Outcome::Trade, opt);
    opt.quad.n_nodes = 2 * (4 * 12 + 40);  // double the automatic choice
    const auto fine = solve_event(c, Outcome::Trade, opt);
    REQUIRE(base.n_modes() == fine.n_modes());
    for (double x : {0.4, 1.0, 2.5})
        for (double y : {0.4, 1.0, 2.5})
            for (double z : {0.3, 1.0, 2.0}) {
                const OrthantState s{x, y, z};
                CHECK(eval_raw(base, s, c) ==
                      doctest::Approx(eval_raw(fine, s, c)).epsilon(1e-9));
            }
}

TEST_CASE("quadrature node floor is enforced") {
    SolverOptions opt;
    opt.n_modes = 40;
    opt.quad.n_nodes = 79;  // below the 2N floor
    CHECK_THROWS_AS(assemble_system({}, Outcome::Trade, 40, opt.quad),
                    std::invalid_argument);
}

TEST_CASE("residual contract holds after a successful solve") {
    const CorrelationTriple c{0.25, 0.3, -0.2};
    const auto sys = assemble_system(c, Outcome::Trade, 16);
    const auto coef = solve_coefficients(sys);
    double resid = 0.0, scale = 0.0;
    for (int m = 0; m < sys.n_modes; ++m) {
        double r = -sys.I[m];
        for (int n = 0; n < sys.n_modes; ++n) r += sys.j(m, n) * coef[n];
        resid = std::max(resid, std::abs(r));
        scale = std::max(scale, std::abs(sys.I[m]));
    }
    CHECK(resid <= 1e-8 * scale);
}

TEST_CASE("strong coupling: high mode counts are rejected, auto-reduce recovers") {
    const auto c = reference_triple();
    CHECK(c.det() == doctest::Approx(0.05).epsilon(1e-12));

    SolverOptions opt;
    opt.n_modes = 40;
    opt.auto_reduce = false;
    CHECK(fit_condition(c, opt) > 1e12);
    CHECK_THROWS_WITH_AS(solve_event(c, Outcome::Trade, opt),
                         doctest::Contains("reduce the mode count"), std::runtime_error);

    opt.auto_reduce = true;
    SolveReport rep;
    const auto sol = solve_event(c, Outcome::Trade, opt, &rep);
    CHECK(rep.requested_modes == 40);
    CHECK(rep.effective_modes < 40);
    CHECK(rep.effective_modes >= 1);
    CHECK(rep.condition <= 1e12);
    CHECK(sol.n_modes() == rep.effective_modes);
}

TEST_CASE("well-conditioned fit reports a modest condition number") {
    SolverOptions opt;
    opt.n_modes = 20;
    CHECK(fit_condition({}, opt) < 100.0);  // diagonal system
}

TEST_CASE("single-event and joint solves agree exactly") {
    const CorrelationTriple c{0.2, 0.3, -0.1};
    SolverOptions opt;
    opt.n_modes = 14;
    const auto all = solve_all_events(c, opt);
    const auto up = solve_event(c, Outcome::UpTick, opt);
    REQUIRE(all.up.n_modes() == up.n_modes());
    for (int n = 0; n < up.n_modes(); ++n) CHECK(all.up.coeffs[n] == up.coeffs[n]);

    // Down coefficients are exactly minus the other two.
    for (int n = 0; n < all.down.n_modes(); ++n)
        CHECK(all.down.coeffs[n] == -(all.trade.coeffs[n] + all.up.coeffs[n]));
}

TEST_CASE("side walls carry the exact tick probabilities") {
    for (const auto& c : {CorrelationTriple{}, CorrelationTriple{0.25, 0.3, -0.2}}) {
        const auto sols = solve_all_events(c, [] {
            SolverOptions o;
            o.n_modes = 24;
            return o;
        }());
        const double fm = sols.up.phi_max;
        for (double zeta : {-0.3, -1.0, -2.5}) {
            // sin(k_n phi) vanishes at both walls for every mode, so the wall
            // value is the base term alone, independent of zeta.
            // phi = 0 is the empty-bid wall: a down tick is certain.
            CHECK(eval_strip(sols.down, 0.0, zeta) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(eval_strip(sols.up, 0.0, zeta) == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(eval_strip(sols.trade, 0.0, zeta) == doctest::Approx(0.0).epsilon(1e-10));
            // phi = phi_max is the empty-ask wall: an up tick is certain.
            CHECK(eval_strip(sols.down, fm, zeta) == doctest::Approx(0.0).epsilon(1e-10));
            CHECK(eval_strip(sols.up, fm, zeta) == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(eval_strip(sols.trade, fm, zeta) == doctest::Approx(0.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("series is harmonic in strip coordinates") {
    const CorrelationTriple c{0.25, 0.3, -0.2};
    SolverOptions opt;
    opt.n_modes = 20;
    const auto sol = solve_event(c, Outcome::UpTick, opt);
    const double fm = sol.phi_max;
    const double h = 2e-4;
    for (double f : {0.2, 0.5, 0.8}) {
        for (double off : {0.25, 0.7, 1.5}) {
            const double phi = f * fm;
            const double zeta = boundary_Z(phi, c) - off;
            const double lap = (eval_strip(sol, phi + h, zeta) + eval_strip(sol, phi - h, zeta) +
                                eval_strip(sol, phi, zeta + h) + eval_strip(sol, phi, zeta - h) -
                                4.0 * eval_strip(sol, phi, zeta)) /
                               (h * h);
            CAPTURE(f);
            CAPTURE(off);
            CHECK(std::abs(lap) < 1e-6);
        }
    }
}

TEST_CASE("event probabilities sum to one across random draws") {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> uq(0.2, 4.0);
    std::uniform_real_distribution<double> uz(0.75, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto c = random_valid_triple(rng);
        SolverOptions opt;
        opt.n_modes = 24;
        const auto sols = solve_all_events(c, opt);
        const OrthantState s{uq(rng), uq(rng), uz(rng)};

        const double raw_sum = eval_raw(sols.down, s, c) + eval_raw(sols.up, s, c) +
                               eval_raw(sols.trade, s, c);
        CHECK(raw_sum == doctest::Approx(1.0).epsilon(1e-10));  // exact superposition

        const auto p = event_probabilities(sols, s, c);
        CHECK(p.p_down >= 0.0);
        CHECK(p.p_down <= 1.0);
        CHECK(p.p_up >= 0.0);
        CHECK(p.p_up <= 1.0);
        CHECK(p.p_trade >= 0.0);
        CHECK(p.p_trade <= 1.0);
        CAPTURE(c.rho_xy);
        CAPTURE(c.rho_xz);
        CAPTURE(c.rho_yz);
        // Clamping is the only thing that can break the partition, and its
        // size is the truncation error visible at the state. Near the
        // feasibility edge the boundary curves stronger than the retained
        // modes can follow, so the bound is looser there.
        const double max_rho = std::max({std::abs(c.rho_xy), std::abs(c.rho_xz),
                                         std::abs(c.rho_yz)});
        const double cap = (c.det() >= 0.25 && max_rho <= 0.7) ? 2e-3 : 5e-2;
        CHECK(std::abs(p.p_down + p.p_up + p.p_trade - 1.0) <= cap);
    }
}

TEST_CASE("trade probability decreases as the trade level starts deeper") {
    const CorrelationTriple c{0.2, 0.15, -0.1};
    SolverOptions opt;
    opt.n_modes = 24;
    const auto sols = solve_all_events(c, opt);
    double prev = 1.0;
    for (double z : {0.4, 0.8, 1.6, 3.2, 6.4}) {
        const auto p = event_probabilities(sols, {1.0, 1.0, z}, c);
        CHECK(p.p_trade < prev + 1e-9);
        prev = p.p_trade;
    }
    // The interior decay is only e^{k_1 zeta}, so "deep" means z well past
    // the queue scale: p_trade(z = 3.2) is still ~0.07 here.
    CHECK(prev < 0.05);
}

TEST_CASE("equal queues split ticks evenly when both couple alike to trades") {
    // Mirror symmetry bid<->ask requires rho_yz = +rho_xz: swapping the
    // queues maps (rho_xy, rho_xz, rho_yz) -> (rho_xy, rho_yz, rho_xz).
    const CorrelationTriple sym{-0.3, 0.4, 0.4};
    SolverOptions opt;
    opt.n_modes = 24;
    const auto sols = solve_all_events(sym, opt);
    for (double q : {0.6, 1.3, 2.4}) {
        const OrthantState s{q, q, 0.9};
        const StripPoint sp = to_strip(s, sym);
        CHECK(sp.phi == doctest::Approx(sols.up.phi_max / 2).epsilon(1e-12));
        const auto p = event_probabilities(sols, s, sym);
        CHECK(p.p_up == doctest::Approx(p.p_down).epsilon(1e-8));
    }

    // Opposite-sign coupling is NOT bid/ask symmetric: trades that deplete
    // the bid replenish the ask, so equal queues do not imply equal odds.
    const CorrelationTriple asym{-0.3, 0.4, -0.4};
    const auto asols = solve_all_events(asym, opt);
    const auto p = event_probabilities(asols, {1.3, 1.3, 0.9}, asym);
    CHECK(std::abs(p.p_up - p.p_down) > 1e-3);
}

TEST_CASE("deep trade level recovers the two-queue closed form") {
    const CorrelationTriple c{-0.25, 0.0, 0.0};
    SolverOptions opt;
    opt.n_modes = 40;
    const auto sols = solve_all_events(c, opt);
    for (const auto& [x, y] : {std::pair{1.0, 1.0}, {0.5, 2.0}, {2.0, 0.5}, {1.5, 0.8}}) {
        const OrthantState s{x, y, 100.0};
        const auto p = event_probabilities(sols, s, c);
        const double closed = uptick_probability({x, y}, c.rho_xy);
        CHECK(p.p_up == doctest::Approx(closed).epsilon(1e-3));
        CHECK(p.p_trade < 1e-3);
    }
}

TEST_CASE("boundary mismatch shrinks as modes are added") {
    double prev_rms = 1e9;
    for (int N : {5, 10, 20, 40}) {
        SolverOptions opt;
        opt.n_modes = N;
        const auto sol = solve_event({}, Outcome::Trade, opt);
        const auto bm = boundary_mismatch(sol, {});
        CHECK(bm.rms < prev_rms);
        prev_rms = bm.rms;
    }
    CHECK(prev_rms < 0.12);  // sine-tail scale ~ 0.5 / sqrt(N)
}

TEST_CASE("clamped evaluation stays in range and reports the excess") {
    const auto c = reference_triple();
    SolverOptions opt;
    opt.n_modes = 40;  // auto-reduces
    const auto sols = solve_all_events(c, opt);
    const OrthantState near_trade{1.0, 1.0, 0.05};
    double excess = 0.0;
    const double p = eval_probability(sols.trade, near_trade, c, &excess);
    const double raw = eval_raw(sols.trade, near_trade, c);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(excess >= 0.0);
    CHECK(excess == doctest::Approx(std::abs(raw - p)).epsilon(1e-15));
    CHECK_THROWS_AS(eval_raw(sols.trade, {0.0, 1.0, 1.0}, c), std::invalid_argument);
}

TEST_CASE("solution text files round-trip exactly") {
    const CorrelationTriple c{0.2, 0.3, -0.1};
    SolverOptions opt;
    opt.n_modes = 10;
    const auto sol = solve_event(c, Outcome::UpTick, opt);

    std::stringstream ss;
    save_solution(ss, sol);
    const auto back = load_solution(ss);
    CHECK(back.event == sol.event);
    CHECK(back.phi_max == sol.phi_max);
    CHECK(back.zeta_shift == sol.zeta_shift);
    CHECK(back.base_term == sol.base_term);
    REQUIRE(back.coeffs.size() == sol.coeffs.size());
    for (size_t i = 0; i < sol.coeffs.size(); ++i) CHECK(back.coeffs[i] == sol.coeffs[i]);

    std::istringstream bad("bogus 7\n");
    CHECK_THROWS_AS(load_solution(bad), std::runtime_error);
    std::istringstream truncated("lobq-series 1\nevent up\nphi_max 1.5\nzeta_shift 0\n"
                                 "base_term 1\nn_modes 3\n0.5\n");
    CHECK_THROWS_AS(load_solution(truncated), std::runtime_error);
}

TEST_CASE("outcome names are stable identifiers") {
    CHECK(std::string(outcome_name(Outcome::DownTick)) == "down");
    CHECK(std::string(outcome_name(Outcome::UpTick)) == "up");
    CHECK(std::string(outcome_name(Outcome::Trade)) == "trade");
}
