#pragma once

#include <cmath>
#include <limits>

#include "glasslab/model.hpp"
#include "glasslab/quadrature.hpp"

namespace glasslab::rs {

// Converged replica-symmetric order parameters with residual certification.
// Fields not applicable to a kind stay NaN. big_r = 2*kappa + r - sigma - tau
// and v2 = 1/big_r are the single source of truth for the ST limiting
// marginal variance.
struct RSSolution {
    ModelKind kind = ModelKind::sk_ising;
    double q = std::numeric_limits<double>::quiet_NaN();
    double rho = std::numeric_limits<double>::quiet_NaN();
    double r = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    double sigma = std::numeric_limits<double>::quiet_NaN();
    double big_r = std::numeric_limits<double>::quiet_NaN();
    double v2 = std::numeric_limits<double>::quiet_NaN();
    double residual_inf = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    int quad_order = 0;
    double tol_used = 0.0;
    double q0_used = 0.0;
    double damping_used = 0.0;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 10000;
    double damping = 0.5;
    double q0 = 0.5;
    double rho0 = 0.75;
};

// Everything a residual recheck needs to re-evaluate the fixed-point maps.
struct RsProblem {
    ModelKind kind = ModelKind::sk_ising;
    double beta = 0.0;
    double h = 0.0;
    double alpha = 0.0;
    double kappa = 0.0;
    double shrink = 1.0;
    PotentialU u;
};

// q = E tanh^2(beta sqrt(q) z + h).
RSSolution solve_sk(double beta, double h, const Quadrature& quad, const SolveOptions& opts = {});

// Coupled (q, rho) for the [-1,1]-spin SK variant; inner x-integrals against
// exp(h x) * uniform[-1,1] by Gauss-Legendre, outer z by Gauss-Hermite.
RSSolution solve_sk_box(double beta, double h, const Quadrature& quad, const SolveOptions& opts = {});

// Coupled (q, r) plus the limiting thin-shell value tau. `shrink` in (0,1]
// evaluates the truncated variant (u composed with shrink, alpha^- folded in).
RSSolution solve_perceptron(double alpha, const PotentialU& u, double shrink, const Quadrature& quad,
                            const SolveOptions& opts = {});

// Five-parameter ST system (r, tau, sigma, rho, q); (r,tau,sigma) by nested
// quadrature given (rho,q), then (rho,q) by the closed forms.
RSSolution solve_st(double alpha, const PotentialU& u, double kappa, double h, double shrink,
                    const Quadrature& quad, const SolveOptions& opts = {});

// Infinity norm of all equation defects, recomputed at doubled quadrature
// order (2Q+1). Independent certification of any claimed fixed point.
double residual(const RsProblem& problem, const RSSolution& solution, const Quadrature& quad);

RsProblem sk_problem(double beta, double h);
RsProblem sk_box_problem(double beta, double h);
RsProblem perceptron_problem(double alpha, const PotentialU& u, double shrink);
RsProblem st_problem(double alpha, const PotentialU& u, double kappa, double h, double shrink);

RSSolution solve(const RsProblem& problem, const Quadrature& quad, const SolveOptions& opts = {});

} // namespace glasslab::rs
