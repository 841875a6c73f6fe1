#include "lobq/model.hpp"

namespace lobq {

Imbalance compute_imbalance(double bid_qty, double ask_qty) {
    if (std::isnan(bid_qty) || std::isnan(ask_qty))
        throw std::invalid_argument("compute_imbalance: NaN queue size");
    if (bid_qty < 0.0 || ask_qty < 0.0)
        throw std::invalid_argument("compute_imbalance: negative queue size");
    const double tot = bid_qty + ask_qty;
    if (tot <= 0.0)
        throw std::invalid_argument("compute_imbalance: empty book");
    return {(bid_qty - ask_qty) / tot};
}

bool CorrelationTriple::valid() const {
    auto ok = [](double r) { return std::isfinite(r) && std::abs(r) < 1.0; };
    return ok(rho_xy) && ok(rho_xz) && ok(rho_yz) && det() > 0.0;
}

void CorrelationTriple::require_valid() const {
    if (!valid())
        throw std::invalid_argument(
            "correlation triple infeasible: each |rho| must be < 1 and the "
            "correlation-matrix determinant must be positive (det = " +
            std::to_string(det()) + ")");
}

CorrelationTriple project_feasible(const CorrelationTriple& c, double margin) {
    if (!(margin > 0.0))
        throw std::invalid_argument("project_feasible: margin must be > 0");
    const double A = 1.0 - c.rho_xy * c.rho_xy;
    if (A <= margin)
        throw std::invalid_argument("project_feasible: |rho_xy| too close to 1");
    if (c.det() >= margin) return c;
    // det(lam) = A - lam^2 * B with B = rho_xz^2 + rho_yz^2 - 2 rho_xy rho_xz rho_yz
    const double B = c.rho_xz * c.rho_xz + c.rho_yz * c.rho_yz
                   - 2.0 * c.rho_xy * c.rho_xz * c.rho_yz;
    if (B <= 0.0) return c;  // det already >= A > margin
    const double lam = std::sqrt((A - margin) / B);
    return {c.rho_xy, lam * c.rho_xz, lam * c.rho_yz};
}

void ModelParams::require_valid() const {
    corr.require_valid();
    if (!(phi0 > 0.0)) throw std::invalid_argument("phi0 must be > 0");
    if (!(sigma_b > 0.0) || !(sigma_a > 0.0))
        throw std::invalid_argument("sigma_b/sigma_a must be > 0");
    if (!(tick > 0.0) || !(spread > 0.0))
        throw std::invalid_argument("tick/spread must be > 0");
    if (!(depth > 0.0)) throw std::invalid_argument("depth must be > 0");
    auto check_reset = [](const ResetDistribution& r, const char* what) {
        if (r.kind == ResetDistribution::Kind::Empirical) {
            if (r.values.empty())
                throw std::invalid_argument(std::string(what) + ": empirical reset has no samples");
            for (double v : r.values)
                if (!(v > 0.0))
                    throw std::invalid_argument(std::string(what) + ": empirical reset sample <= 0");
            return;
        }
        if (!(r.median > 0.0))
            throw std::invalid_argument(std::string(what) + ": reset median must be > 0");
        if (r.dispersion < 0.0)
            throw std::invalid_argument(std::string(what) + ": reset dispersion must be >= 0");
    };
    check_reset(reset_b, "reset_b");
    check_reset(reset_a, "reset_a");
}

double phi_max(double rho_xy) {
    if (!(std::abs(rho_xy) < 1.0))
        throw std::invalid_argument("phi_max: |rho_xy| must be < 1");
    return std::acos(-rho_xy);
}

PlanePoint decorrelate_2d(const WedgeState& s, double rho_xy) {
    const double sq = std::sqrt(1.0 - rho_xy * rho_xy);
    return {s.x, (-rho_xy * s.x + s.y) / sq};
}

PolarPoint to_polar(const PlanePoint& p) {
    // atan2(alpha, beta): angle measured from the beta axis, in [0, pi]
    // for alpha >= 0.
    return {std::hypot(p.alpha, p.beta), std::atan2(p.alpha, p.beta)};
}

double uptick_probability(const WedgeState& s, double rho_xy) {
    if (!(s.x >= 0.0) || !(s.y >= 0.0) || !(s.x + s.y > 0.0))
        throw std::invalid_argument("uptick_probability: need x, y >= 0 with x + y > 0");
    if (!(std::abs(rho_xy) < 1.0))
        throw std::invalid_argument("uptick_probability: |rho_xy| must be < 1");
    const double c = std::sqrt((1.0 + rho_xy) / (1.0 - rho_xy));
    return 0.5 * (1.0 - std::atan(c * (s.y - s.x) / (s.y + s.x)) / std::atan(c));
}

FramePoint decorrelate_3d(const OrthantState& s, const CorrelationTriple& corr) {
    corr.require_valid();
    const double rxy = corr.rho_xy, rxz = corr.rho_xz, ryz = corr.rho_yz;
    const double sq = std::sqrt(1.0 - rxy * rxy);
    const double sd = std::sqrt(corr.det());
    return {s.x,
            (-rxy * s.x + s.y) / sq,
            ((rxy * ryz - rxz) * s.x + (rxy * rxz - ryz) * s.y
             + (1.0 - rxy * rxy) * s.z) / (sq * sd)};
}

SphericalPoint to_spherical(const FramePoint& f) {
    const double rho = std::hypot(f.alpha, f.beta);
    return {std::hypot(rho, f.gamma), std::atan2(rho, f.gamma),
            std::atan2(f.alpha, f.beta)};
}

double zeta_of_theta(double theta) {
    if (!(theta > 0.0) || !(theta < 3.14159265358979323846))
        throw std::invalid_argument("zeta_of_theta: theta must be in (0, pi)");
    return std::log(std::tan(0.5 * theta));
}

StripPoint to_strip(const OrthantState& s, const CorrelationTriple& corr) {
    const SphericalPoint sp = to_spherical(decorrelate_3d(s, corr));
    return {sp.phi, zeta_of_theta(sp.theta)};
}

BoundaryCoeffs boundary_coeffs(const CorrelationTriple& corr) {
    corr.require_valid();
    const double sq = std::sqrt(1.0 - corr.rho_xy * corr.rho_xy);
    const double sd = std::sqrt(corr.det());
    return {-corr.rho_xz * sq / sd, (corr.rho_xy * corr.rho_xz - corr.rho_yz) / sd};
}

double boundary_Z(double phi, const CorrelationTriple& corr) {
    const BoundaryCoeffs bc = boundary_coeffs(corr);
    const double cot = bc.c1 * std::sin(phi) + bc.c2 * std::cos(phi);
    return std::log(std::tan(0.5 * std::atan2(1.0, cot)));
}

WedgeState wedge_from_imbalance(const Imbalance& imb, double depth, const ModelParams& p) {
    if (!(std::abs(imb.value) <= 1.0))
        throw std::invalid_argument("wedge_from_imbalance: |I| must be <= 1");
    if (!(depth > 0.0))
        throw std::invalid_argument("wedge_from_imbalance: depth must be > 0");
    const double qb = 0.5 * depth * (1.0 + imb.value);
    const double qa = 0.5 * depth * (1.0 - imb.value);
    return {qb / p.sigma_b, qa / p.sigma_a};
}

OrthantState state_from_imbalance(const Imbalance& imb, double depth, const ModelParams& p) {
    const WedgeState w = wedge_from_imbalance(imb, depth, p);
    return {w.x, w.y, p.phi0};
}

}  // namespace lobq
