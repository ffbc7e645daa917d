#pragma once

#include <vector>

namespace glasslab::rs {

// Gaussian quadrature rules for the two kinds of integrals in the RS
// fixed-point systems: expectations over a standard Gaussian (probabilists'
// Gauss-Hermite; weights sum to 1) and integrals over [-1,1] (Gauss-Legendre;
// weights sum to 2). Nodes/weights are computed by Golub-Welsch from the
// Jacobi matrix of the respective orthogonal polynomials.
struct Quadrature {
    int order = 0;
    std::vector<double> hermite_nodes;
    std::vector<double> hermite_weights;
    std::vector<double> legendre_nodes;
    std::vector<double> legendre_weights;

    // E[f(z)], z ~ N(0,1).
    template <class F>
    double gauss_expect(F&& f) const {
        double acc = 0.0;
        for (int i = 0; i < order; ++i) acc += hermite_weights[i] * f(hermite_nodes[i]);
        return acc;
    }

    // Integral of f over [-1,1].
    template <class F>
    double box_integral(F&& f) const {
        double acc = 0.0;
        for (int i = 0; i < order; ++i) acc += legendre_weights[i] * f(legendre_nodes[i]);
        return acc;
    }
};

Quadrature make_quadrature(int order);

} // namespace glasslab::rs
