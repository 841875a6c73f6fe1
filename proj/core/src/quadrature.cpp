#include "lobq/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace lobq {

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    constexpr double EPS = 1.0e-15;
    const double xm = 0.5 * (b + a);
    const double xl = 0.5 * (b - a);

    QuadratureRule r;
    r.x.resize(n);
    r.w.resize(n);

    const int m = (n + 1) / 2;  // roots are symmetric; compute half
    for (int i = 0; i < m; ++i) {
        // Chebyshev-based initial guess for the i-th root.
        double z = std::cos(3.14159265358979323846 * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) <= EPS) break;
        }
        r.x[i] = xm - xl * z;
        r.x[n - 1 - i] = xm + xl * z;
        r.w[i] = 2.0 * xl / ((1.0 - z * z) * pp * pp);
        r.w[n - 1 - i] = r.w[i];
    }
    return r;
}

}  // namespace lobq
