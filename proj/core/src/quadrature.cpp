#include "glasslab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace glasslab::rs {

namespace {

// Eigenvalues and first eigenvector components of a symmetric tridiagonal
// matrix (diagonal d, off-diagonal e), via QL with implicit shifts. On exit d
// holds eigenvalues and q holds the first component of each normalized
// eigenvector. This is the classic Golub-Welsch ingredient; matrices here are
// at most a few hundred rows.
void tridiag_eigen_first_components(std::vector<double>& d, std::vector<double>& e,
                                    std::vector<double>& q) {
    const int n = static_cast<int>(d.size());
    q.assign(n, 0.0);
    if (n == 0) return;
    q[0] = 1.0;
    if (n == 1) return;
    e.push_back(0.0);

    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
            }
            if (m != l) {
                if (++iter == 60) throw std::runtime_error("quadrature: tridiagonal QL did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    f = q[i + 1];
                    q[i + 1] = s * q[i] + c * f;
                    q[i] = c * q[i] - s * f;
                }
                if (r == 0.0 && m - 1 >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

struct Rule {
    std::vector<double> nodes, weights;
};

// total_mass is the integral of the weight measure (1 for N(0,1), 2 for
// Lebesgue on [-1,1]).
Rule golub_welsch(std::vector<double> diag, std::vector<double> off, double total_mass) {
    const int n = static_cast<int>(diag.size());
    std::vector<double> q;
    tridiag_eigen_first_components(diag, off, q);

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return diag[a] < diag[b]; });

    Rule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = diag[idx[i]];
        rule.weights[i] = total_mass * q[idx[i]] * q[idx[i]];
    }
    return rule;
}

} // namespace

Quadrature make_quadrature(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");

    Quadrature quad;
    quad.order = order;

    // Probabilists' Hermite: Jacobi matrix has zero diagonal, off-diagonal sqrt(k).
    {
        std::vector<double> diag(order, 0.0), off(order - 1);
        for (int k = 1; k < order; ++k) off[k - 1] = std::sqrt(static_cast<double>(k));
        Rule r = golub_welsch(std::move(diag), std::move(off), 1.0);
        quad.hermite_nodes = std::move(r.nodes);
        quad.hermite_weights = std::move(r.weights);
    }

    // Legendre on [-1,1]: off-diagonal k/sqrt(4k^2-1).
    {
        std::vector<double> diag(order, 0.0), off(order - 1);
        for (int k = 1; k < order; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
        Rule r = golub_welsch(std::move(diag), std::move(off), 2.0);
        quad.legendre_nodes = std::move(r.nodes);
        quad.legendre_weights = std::move(r.weights);
    }

    return quad;
}

} // namespace glasslab::rs
