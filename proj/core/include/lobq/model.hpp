#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

// Top-of-book queue model: bid/ask queue sizes and a trade-arrival level,
// each driven by correlated unit-variance Brownian motions. Queue sizes are
// expressed in normalized units (shares divided by the per-side volatility
// scale), so one unit of time is one second.

namespace lobq {

enum class Side { Bid, Ask };

struct Imbalance {
    double value = 0.0;  // (q_b - q_a) / (q_b + q_a), in [-1, 1]
};

// Signed queue imbalance. Rejects NaN and non-positive total size.
Imbalance compute_imbalance(double bid_qty, double ask_qty);

struct CorrelationTriple {
    double rho_xy = 0.0;  // bid queue vs ask queue
    double rho_xz = 0.0;  // bid queue vs trade-arrival level
    double rho_yz = 0.0;  // ask queue vs trade-arrival level

    // Determinant of the 3x3 correlation matrix; must be > 0 for the triple
    // to describe a valid Brownian driver.
    double det() const {
        return 1.0 - rho_xy * rho_xy - rho_xz * rho_xz - rho_yz * rho_yz
             + 2.0 * rho_xy * rho_xz * rho_yz;
    }
    bool valid() const;
    void require_valid() const;  // throws std::invalid_argument
};

// Shrinks (rho_xz, rho_yz) toward zero until det() >= margin. Returns the
// input unchanged when it is already inside the region. Used to map
// externally-reported correlation values that are jointly infeasible onto
// the nearest usable triple along the (rho_xz, rho_yz) ray.
CorrelationTriple project_feasible(const CorrelationTriple& c, double margin = 0.05);

// Reset distribution for a depleted queue, in share units.
struct ResetDistribution {
    enum class Kind { Lognormal, Fixed, Empirical };
    Kind kind = Kind::Lognormal;
    double median = 1.0;          // lognormal median / fixed value
    double dispersion = 0.5;      // lognormal sigma (log scale)
    std::vector<double> values;   // empirical samples, all > 0
};

struct ModelParams {
    CorrelationTriple corr;
    double phi0 = 3.5;     // trade-level restart value, sqrt(seconds)
    double sigma_b = 1.0;  // bid queue volatility, shares / sqrt(sec)
    double sigma_a = 1.0;  // ask queue volatility
    ResetDistribution reset_b;
    ResetDistribution reset_a;
    double tick = 1.0;     // price increment per queue depletion
    double spread = 1.0;   // quoted spread (price units)
    double depth = 2.0;    // total visible size q_b + q_a used for curves, shares

    void require_valid() const;
};

// States live in the open positive quadrant/orthant (normalized units).
struct WedgeState {
    double x = 1.0;  // bid queue / sigma_b
    double y = 1.0;  // ask queue / sigma_a
};

struct OrthantState {
    double x = 1.0;
    double y = 1.0;
    double z = 3.5;  // trade-arrival level, hits 0 => near-side trade
};

struct PlanePoint { double alpha = 0.0, beta = 0.0; };
struct FramePoint { double alpha = 0.0, beta = 0.0, gamma = 0.0; };
struct PolarPoint { double r = 0.0, phi = 0.0; };
struct SphericalPoint { double r = 0.0, theta = 0.0, phi = 0.0; };
struct StripPoint { double phi = 0.0, zeta = 0.0; };  // strip coordinates

// Opening angle of the image wedge: phi_max = arccos(-rho_xy).
double phi_max(double rho_xy);

// Linear map removing the bid/ask correlation; the positive quadrant maps to
// the wedge 0 <= phi <= phi_max.
PlanePoint decorrelate_2d(const WedgeState& s, double rho_xy);
PolarPoint to_polar(const PlanePoint& p);

// Probability that the ask queue depletes before the bid queue (an up-tick)
// for correlated queues started at s. Closed form; equals phi/phi_max of the
// decorrelated angle.
double uptick_probability(const WedgeState& s, double rho_xy);

// Linear map whitening all three drivers. Requires corr.valid().
FramePoint decorrelate_3d(const OrthantState& s, const CorrelationTriple& corr);
SphericalPoint to_spherical(const FramePoint& f);

// Conformal strip coordinate: zeta = ln tan(theta/2), theta in (0, pi).
double zeta_of_theta(double theta);

// (phi, zeta) of a state; the orthant interior maps to zeta < boundary_Z(phi).
StripPoint to_strip(const OrthantState& s, const CorrelationTriple& corr);

// Image of the trade plane z = 0: zeta = Z(phi) with
// cot Theta(phi) = c1 sin phi + c2 cos phi, Z = ln tan(Theta/2).
struct BoundaryCoeffs { double c1 = 0.0, c2 = 0.0; };
BoundaryCoeffs boundary_coeffs(const CorrelationTriple& corr);
double boundary_Z(double phi, const CorrelationTriple& corr);

// Book state at a given imbalance: q_b + q_a = depth (shares), queue sizes
// normalized by the per-side sigmas, z at the restart level phi0.
WedgeState wedge_from_imbalance(const Imbalance& imb, double depth, const ModelParams& p);
OrthantState state_from_imbalance(const Imbalance& imb, double depth, const ModelParams& p);

}  // namespace lobq
