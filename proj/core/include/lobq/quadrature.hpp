#pragma once

#include <cstddef>
#include <vector>

namespace lobq {

struct QuadratureSpec {
    int n_nodes = 0;  // 0 => pick automatically from the mode count
};

struct QuadratureRule {
    std::vector<double> x;  // nodes
    std::vector<double> w;  // weights
};

// Gauss-Legendre nodes and weights on [a, b], computed by Newton iteration
// on the Legendre recurrence.
QuadratureRule gauss_legendre(int n, double a, double b);

}  // namespace lobq
