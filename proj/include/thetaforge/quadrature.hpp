#pragma once

#include <vector>

namespace thetaforge {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton on P_n, cached per n).
const QuadratureRule& gauss_legendre(int n);

// n-point Gauss-Hermite rule for the weight e^{-x^2} on R (Golub-Welsch,
// cached per n).
const QuadratureRule& gauss_hermite(int n);

}  // namespace thetaforge
