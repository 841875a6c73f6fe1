#pragma once

#include <iosfwd>
#include <vector>

#include "lobq/model.hpp"
#include "lobq/quadrature.hpp"

namespace lobq {

// First event reached by the book from a given state.
enum class Outcome { DownTick = 0, UpTick = 1, Trade = 2 };

const char* outcome_name(Outcome e);

// Truncated generalized Fourier solution of the first-passage problem on the
// semi-infinite strip 0 <= phi <= phi_max, zeta <= Z(phi):
//
//   P(phi, zeta) = base(phi) + sum_n c_n sin(k_n phi) exp(k_n (zeta - shift)),
//   k_n = pi n / phi_max.
//
// base is phi/phi_max for UpTick, 1 - phi/phi_max for DownTick, 0 for Trade.
// The shift (= max Z when positive, else 0) keeps every stored exponent
// non-positive on the domain, so evaluation cannot overflow; it is absorbed
// into the coefficients and fixed at assembly time.
struct SeriesSolution {
    Outcome event = Outcome::Trade;
    double phi_max = 0.0;
    double zeta_shift = 0.0;
    bool base_term = false;
    std::vector<double> coeffs;  // c_1 .. c_N

    int n_modes() const { return static_cast<int>(coeffs.size()); }
};

// ==== boundary-fit linear system ============================================
//
//   J_mn = int_0^phi_max sin(k_m p) sin(k_n p) e^{(k_m + k_n)(Z(p) - shift)} dp
//   I_m  = int_0^phi_max data(p) sin(k_m p) e^{k_m (Z(p) - shift)} dp
//
// where data is the required boundary value on zeta = Z(phi) minus the base
// term: 1 for Trade, -phi/phi_max for UpTick, -(1 - phi/phi_max) for DownTick.
// Integrals are evaluated with Gauss-Legendre quadrature; J is the Gram
// matrix of the boundary-restricted modes, so solving J c = I is the L2
// projection of the boundary data onto the truncated mode set.

struct BoundarySystem {
    int n_modes = 0;
    double phi_max = 0.0;
    double zeta_shift = 0.0;
    std::vector<double> J;  // row-major n_modes x n_modes, symmetric
    std::vector<double> I;  // length n_modes

    double j(int m, int n) const { return J[static_cast<size_t>(m) * n_modes + n]; }
};

// quad.n_nodes = 0 selects max(2N, 4N + 40) nodes.
BoundarySystem assemble_system(const CorrelationTriple& corr, Outcome event,
                               int n_modes, const QuadratureSpec& quad = {});

// Solves J c = I. Throws std::runtime_error when the condition estimate
// exceeds max_condition or the residual cannot be brought below
// 1e-8 * ||I||_inf; the message instructs the caller to reduce the mode
// count or increase quadrature nodes.
std::vector<double> solve_coefficients(const BoundarySystem& sys,
                                       double max_condition = 1e12);

// ==== event solutions =======================================================

struct SolverOptions {
    int n_modes = 40;
    QuadratureSpec quad;          // n_nodes = 0 => max(2N, 4N + 40)
    double max_condition = 1e12;  // refuse a solve above this estimate
    // When the fit is rejected as ill-conditioned, retry with fewer modes
    // (the strongly curved boundaries reached near the feasibility edge
    // support only a handful of stable modes).
    bool auto_reduce = true;
};

struct SolveReport {
    int requested_modes = 0;
    int effective_modes = 0;
    double condition = 0.0;  // estimate for the accepted system
};

struct EventSolutions {
    SeriesSolution down, up, trade;
};

// All three events from one assembly and one factorization. The DownTick
// coefficients are formed as -(trade + up) elementwise — the exact identity
// between the three right-hand sides — so the three series corrections
// cancel identically and p_down + p_up + p_trade == 1 to rounding error at
// any conditioning.
EventSolutions solve_all_events(const CorrelationTriple& corr,
                                const SolverOptions& opt = {},
                                SolveReport* report = nullptr);

// Single event via the same path as solve_all_events (consistent results).
SeriesSolution solve_event(const CorrelationTriple& corr, Outcome event,
                           const SolverOptions& opt = {},
                           SolveReport* report = nullptr);

// ==== evaluation ============================================================

// Evaluate in strip coordinates (no domain checks, no clamping).
double eval_strip(const SeriesSolution& sol, double phi, double zeta);

// Evaluate at a book state. Requires the open positive orthant. The raw
// variant may fall outside [0, 1] near the domain boundary due to series
// truncation; eval_probability clamps and can report the excess.
double eval_raw(const SeriesSolution& sol, const OrthantState& s,
                const CorrelationTriple& corr);
double eval_probability(const SeriesSolution& sol, const OrthantState& s,
                        const CorrelationTriple& corr,
                        double* clamp_excess = nullptr);

struct EventProbabilities {
    double p_down = 0.0, p_up = 0.0, p_trade = 0.0;
    double clamp_excess = 0.0;  // max clamping magnitude over the three
};

EventProbabilities event_probabilities(const EventSolutions& sols,
                                       const OrthantState& s,
                                       const CorrelationTriple& corr);

// ==== diagnostics ===========================================================

// Residual of the fitted boundary condition P(phi, Z(phi)) = boundary data,
// measured with raw (unclamped) evaluation at n_probe Gauss-Legendre nodes.
// Pass the solver's node count to probe the assembly nodes themselves.
struct BoundaryMismatch {
    double max_abs = 0.0;  // worst node deviation (corner-dominated)
    double rms = 0.0;      // quadrature-weighted root mean square
};
BoundaryMismatch boundary_mismatch(const SeriesSolution& sol,
                                   const CorrelationTriple& corr,
                                   int n_probe = 512);

// Condition estimate of the boundary-fit matrix at these parameters.
double fit_condition(const CorrelationTriple& corr, const SolverOptions& opt = {});

// Versioned text round-trip (full double precision).
void save_solution(std::ostream& os, const SeriesSolution& sol);
SeriesSolution load_solution(std::istream& is);

}  // namespace lobq
