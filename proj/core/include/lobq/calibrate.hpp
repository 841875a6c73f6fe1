#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lobq/curves.hpp"
#include "lobq/mc.hpp"
#include "lobq/model.hpp"
#include "lobq/series.hpp"

namespace lobq {

// One bucketed curve in calibration form: aligned to a BucketSpec, NaN mean
// marks an empty bucket, std_error <= 0 removes the bucket from the loss.
struct CalCurve {
    std::vector<double> mean;
    std::vector<double> std_error;
};

// The seven curves the model is fitted to, on shared bucket edges:
// event probabilities for the near-side pegger (favourable move,
// unfavourable move, fill) and side-conditional mid-move and wait curves.
struct CalibrationTarget {
    BucketSpec buckets;
    CalCurve p_fav, p_unfav, p_fill;
    CalCurve move_buy, move_sell;  // mid move in spreads until buy/sell trade
    CalCurve wait_buy, wait_sell;  // seconds until buy/sell trade

    std::array<const CalCurve*, 7> curves() const {
        return {&p_fav, &p_unfav, &p_fill, &move_buy, &move_sell, &wait_buy, &wait_sell};
    }
    static const std::array<const char*, 7>& curve_names();
};

// Knobs for producing model-side curves (shared by target synthesis and
// objective evaluation; keep them identical for common-random-number fits).
struct ModelCurveConfig {
    SimConfig mc;           // seed is THE common-random-number seed
    SolverOptions solver;
    Side near_side = Side::Bid;
};

// Model-implied curves at the bucket midpoints: event probabilities from the
// series solver, move/wait from the Monte Carlo engine.
CalibrationTarget model_curves(const ModelParams& params, const BucketSpec& buckets,
                               double depth, const ModelCurveConfig& cfg = {});

// Inverse-variance-weighted least squares across all seven curves; wait
// curves are first normalized by the target's own cross-bucket mean wait so
// every term is dimensionless. Returns +inf outside the valid region
// (D <= 0, |rho| >= 1, phi0 <= 0, depth <= 0).
double objective(const ModelParams& params, const CalibrationTarget& target,
                 double depth, const ModelCurveConfig& cfg = {});

struct CalibrateOptions {
    bool tie_ryz = true;     // constrain rho_yz = -rho_xz (paper solution shape)
    bool fit_depth = false;  // fifth free parameter; otherwise fixed from data
    double depth = 2.0;
    int max_iter = 150;        // Nelder-Mead iterations per start
    int n_restarts = 3;        // randomized restarts after the initial run
    double tol = 1e-6;         // stop when the simplex objective spread falls below
    std::uint64_t seed = 99;   // restart-perturbation stream
    ModelCurveConfig curve_cfg;

    CalibrateOptions() {
        // Calibration-grade Monte Carlo: coarse but common-random-number
        // consistent, so target and model noise cancel in the objective.
        curve_cfg.mc.n_paths = 1024;
        curve_cfg.mc.dt = 0.05;
        curve_cfg.mc.horizon = 200.0;
    }
};

struct CalibrationResult {
    ModelParams params;
    double depth = 0.0;
    double objective = 0.0;
    std::array<double, 7> curve_residuals{};  // weighted SSE per curve
    std::vector<double> trace;                // best objective after each iteration
    bool converged = false;
};

// Derivative-free simplex fit of (rho_xy, rho_xz[, rho_yz][, depth], phi0)
// to the target. Deterministic for fixed seeds. Never returns parameters
// with D <= 0. Restarts are skipped once the objective is already at or
// below tol (it cannot improve within the noise floor). A false convergence
// flag reports the tolerance was not reached within the iteration budget;
// the best point found is still returned.
CalibrationResult calibrate(const CalibrationTarget& target, const ModelParams& init,
                            const CalibrateOptions& opt = {});

}  // namespace lobq
