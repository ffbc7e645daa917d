#include "glasslab/rs.hpp"

#include <algorithm>
#include <stdexcept>

namespace glasslab::rs {

namespace {

double sk_map(double beta, double h, double q, const Quadrature& quad) {
    const double s = beta * std::sqrt(std::max(q, 0.0));
    return quad.gauss_expect([&](double z) {
        const double t = std::tanh(s * z + h);
        return t * t;
    });
}

struct BoxMoments {
    double q_map, rho_map;
};

// Inner tilted x-moments for the [-1,1] model at one outer Gaussian node,
// then averaged over z: q <- E[m(z)^2], rho <- E[s(z)].
BoxMoments sk_box_map(double beta, double h, double q, double rho, const Quadrature& quad) {
    const double sq = beta * std::sqrt(std::max(q, 0.0));
    const double c2 = 0.5 * beta * beta * std::max(rho - q, 0.0);
    double acc_q = 0.0, acc_rho = 0.0;
    for (int i = 0; i < quad.order; ++i) {
        const double z = quad.hermite_nodes[i];
        double z0 = 0.0, z1 = 0.0, z2 = 0.0;
        for (int j = 0; j < quad.order; ++j) {
            const double x = quad.legendre_nodes[j];
            const double e = quad.legendre_weights[j] * std::exp(x * sq * z + c2 * x * x + h * x);
            z0 += e;
            z1 += e * x;
            z2 += e * x * x;
        }
        const double m = z1 / z0;
        acc_q += quad.hermite_weights[i] * m * m;
        acc_rho += quad.hermite_weights[i] * (z2 / z0);
    }
    return {acc_q, acc_rho};
}

struct TiltedMoments {
    double r_map, tau_map, sigma_map;
};

// Nested expectation over theta = sqrt(q) z + sqrt(spread) xi with the
// exp(u(shrink*theta)) tilt; returns the alpha-scaled (r, tau, sigma) maps.
// The shrink form is equivalent to evaluating the u~ equations at alpha^-.
TiltedMoments gardner_maps(double alpha, const PotentialU& u, double shrink, double q, double spread,
                           const Quadrature& quad, bool want_sigma) {
    if (u.is_zero) return {0.0, 0.0, 0.0};
    const double sq = std::sqrt(std::max(q, 0.0));
    const double sx = std::sqrt(std::max(spread, 0.0));
    double acc_r = 0.0, acc_tau = 0.0, acc_sigma = 0.0;
    for (int i = 0; i < quad.order; ++i) {
        const double zq = sq * quad.hermite_nodes[i];
        double z0 = 0.0, z1 = 0.0, z2 = 0.0, zs = 0.0;
        for (int j = 0; j < quad.order; ++j) {
            const double theta = shrink * (zq + sx * quad.hermite_nodes[j]);
            const double e = quad.hermite_weights[j] * std::exp(u.eval(theta));
            const double d1 = u.d1(theta);
            z0 += e;
            z1 += e * d1;
            z2 += e * d1 * d1;
            if (want_sigma) zs += e * u.d2(theta);
        }
        const double w = quad.hermite_weights[i];
        acc_r += w * (z1 / z0) * (z1 / z0);
        acc_tau += w * (z2 / z0);
        if (want_sigma) acc_sigma += w * (zs / z0);
    }
    return {alpha * acc_r, alpha * acc_tau, alpha * acc_sigma};
}

double perceptron_q_map(double r, const Quadrature& quad) {
    const double s = std::sqrt(std::max(r, 0.0));
    return quad.gauss_expect([&](double z) {
        const double t = std::tanh(s * z);
        return t * t;
    });
}

} // namespace

RSSolution solve_sk(double beta, double h, const Quadrature& quad, const SolveOptions& opts) {
    if (beta <= 0.0) throw std::invalid_argument("solve_sk: beta must be > 0");
    RSSolution sol;
    sol.kind = ModelKind::sk_ising;
    sol.quad_order = quad.order;
    sol.tol_used = opts.tol;
    sol.q0_used = opts.q0;
    sol.damping_used = opts.damping;

    double q = opts.q0;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double f = sk_map(beta, h, q, quad);
        sol.residual_inf = std::abs(q - f);
        sol.iterations = it;
        if (sol.residual_inf <= opts.tol) {
            sol.converged = true;
            break;
        }
        q = (1.0 - opts.damping) * q + opts.damping * f;
        q = std::clamp(q, 0.0, 1.0);
    }
    sol.q = q;
    return sol;
}

RSSolution solve_sk_box(double beta, double h, const Quadrature& quad, const SolveOptions& opts) {
    if (beta <= 0.0) throw std::invalid_argument("solve_sk_box: beta must be > 0");
    RSSolution sol;
    sol.kind = ModelKind::sk_box;
    sol.quad_order = quad.order;
    sol.tol_used = opts.tol;
    sol.q0_used = opts.q0;
    sol.damping_used = opts.damping;

    double q = opts.q0, rho = opts.rho0;
    double damping = opts.damping;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const BoxMoments f = sk_box_map(beta, h, q, rho, quad);
        sol.residual_inf = std::max(std::abs(q - f.q_map), std::abs(rho - f.rho_map));
        sol.iterations = it;
        if (sol.residual_inf <= opts.tol) {
            sol.converged = true;
            break;
        }
        double qn = (1.0 - damping) * q + damping * f.q_map;
        double rn = (1.0 - damping) * rho + damping * f.rho_map;
        if (rn < qn) {
            // rho - q must stay nonnegative; retry more cautiously.
            damping *= 0.5;
            if (damping < 1e-6) throw std::runtime_error("solve_sk_box: cannot keep rho >= q");
            continue;
        }
        q = std::clamp(qn, 0.0, 1.0);
        rho = std::clamp(rn, 0.0, 1.0);
    }
    sol.q = q;
    sol.rho = rho;
    sol.damping_used = damping;
    return sol;
}

RSSolution solve_perceptron(double alpha, const PotentialU& u, double shrink, const Quadrature& quad,
                            const SolveOptions& opts) {
    if (alpha <= 0.0) throw std::invalid_argument("solve_perceptron: alpha must be > 0");
    RSSolution sol;
    sol.kind = ModelKind::perceptron;
    sol.quad_order = quad.order;
    sol.tol_used = opts.tol;
    sol.q0_used = opts.q0;
    sol.damping_used = opts.damping;

    double q = opts.q0;
    double r = 0.5 * alpha * u.bound_D * u.bound_D;
    for (int it = 1; it <= opts.max_iter; ++it) {
        const double fq = perceptron_q_map(r, quad);
        const TiltedMoments fm = gardner_maps(alpha, u, shrink, q, 1.0 - q, quad, false);
        sol.residual_inf = std::max(std::abs(q - fq), std::abs(r - fm.r_map));
        sol.iterations = it;
        if (sol.residual_inf <= opts.tol) {
            sol.converged = true;
            break;
        }
        q = std::clamp((1.0 - opts.damping) * q + opts.damping * fq, 0.0, 1.0);
        r = (1.0 - opts.damping) * r + opts.damping * fm.r_map;
        if (!(r >= 0.0)) throw std::runtime_error("solve_perceptron: negative r signals quadrature trouble");
    }
    sol.q = q;
    sol.r = r;
    sol.tau = gardner_maps(alpha, u, shrink, q, 1.0 - q, quad, false).tau_map;
    return sol;
}

RSSolution solve_st(double alpha, const PotentialU& u, double kappa, double h, double shrink,
                    const Quadrature& quad, const SolveOptions& opts) {
    if (alpha <= 0.0 || kappa <= 0.0) throw std::invalid_argument("solve_st: alpha, kappa must be > 0");
    RSSolution sol;
    sol.kind = ModelKind::st;
    sol.quad_order = quad.order;
    sol.tol_used = opts.tol;
    sol.q0_used = opts.q0;
    sol.damping_used = opts.damping;

    const double d2 = u.bound_D * u.bound_D;
    double q = opts.q0, rho = opts.rho0;
    double r = 0.5 * alpha * d2, tau = 0.5 * alpha * d2;
    double sigma = u.concave_flag ? -0.5 * alpha * d2 : 0.0;
    double damping = opts.damping;

    for (int it = 1; it <= opts.max_iter; ++it) {
        const TiltedMoments fm = gardner_maps(alpha, u, shrink, q, rho - q, quad, true);
        const double big_r = 2.0 * kappa + fm.r_map - fm.sigma_map - fm.tau_map;
        if (big_r <= 0.0) {
            damping *= 0.5;
            if (damping < 1e-6) throw std::runtime_error("solve_st: R <= 0 persisted under damping");
            continue;
        }
        const double q_map = (fm.r_map + h * h) / (big_r * big_r);
        const double rho_map = 1.0 / big_r + q_map;

        sol.residual_inf = std::max({std::abs(r - fm.r_map), std::abs(tau - fm.tau_map),
                                     std::abs(sigma - fm.sigma_map), std::abs(rho - rho_map),
                                     std::abs(q - q_map)});
        sol.iterations = it;
        if (sol.residual_inf <= opts.tol) {
            sol.converged = true;
            break;
        }
        r = (1.0 - damping) * r + damping * fm.r_map;
        tau = (1.0 - damping) * tau + damping * fm.tau_map;
        sigma = (1.0 - damping) * sigma + damping * fm.sigma_map;
        double qn = (1.0 - damping) * q + damping * q_map;
        double rn = (1.0 - damping) * rho + damping * rho_map;
        if (rn <= qn) {
            damping *= 0.5;
            if (damping < 1e-6) throw std::runtime_error("solve_st: cannot keep rho > q");
            continue;
        }
        q = std::max(qn, 0.0);
        rho = rn;
    }
    sol.q = q;
    sol.rho = rho;
    sol.r = r;
    sol.tau = tau;
    sol.sigma = sigma;
    sol.big_r = 2.0 * kappa + r - sigma - tau;
    sol.v2 = 1.0 / sol.big_r;
    sol.damping_used = damping;
    return sol;
}

RsProblem sk_problem(double beta, double h) {
    RsProblem p;
    p.kind = ModelKind::sk_ising;
    p.beta = beta;
    p.h = h;
    return p;
}

RsProblem sk_box_problem(double beta, double h) {
    RsProblem p = sk_problem(beta, h);
    p.kind = ModelKind::sk_box;
    return p;
}

RsProblem perceptron_problem(double alpha, const PotentialU& u, double shrink) {
    RsProblem p;
    p.kind = ModelKind::perceptron;
    p.alpha = alpha;
    p.u = u;
    p.shrink = shrink;
    return p;
}

RsProblem st_problem(double alpha, const PotentialU& u, double kappa, double h, double shrink) {
    RsProblem p = perceptron_problem(alpha, u, shrink);
    p.kind = ModelKind::st;
    p.kappa = kappa;
    p.h = h;
    return p;
}

RSSolution solve(const RsProblem& p, const Quadrature& quad, const SolveOptions& opts) {
    switch (p.kind) {
        case ModelKind::sk_ising: return solve_sk(p.beta, p.h, quad, opts);
        case ModelKind::sk_box: return solve_sk_box(p.beta, p.h, quad, opts);
        case ModelKind::perceptron: return solve_perceptron(p.alpha, p.u, p.shrink, quad, opts);
        case ModelKind::st: return solve_st(p.alpha, p.u, p.kappa, p.h, p.shrink, quad, opts);
    }
    throw std::logic_error("unreachable");
}

double residual(const RsProblem& p, const RSSolution& sol, const Quadrature& quad) {
    const Quadrature fine = make_quadrature(2 * quad.order + 1);
    switch (p.kind) {
        case ModelKind::sk_ising:
            return std::abs(sol.q - sk_map(p.beta, p.h, sol.q, fine));
        case ModelKind::sk_box: {
            const BoxMoments f = sk_box_map(p.beta, p.h, sol.q, sol.rho, fine);
            return std::max(std::abs(sol.q - f.q_map), std::abs(sol.rho - f.rho_map));
        }
        case ModelKind::perceptron: {
            const TiltedMoments f = gardner_maps(p.alpha, p.u, p.shrink, sol.q, 1.0 - sol.q, fine, false);
            const double dq = std::abs(sol.q - perceptron_q_map(sol.r, fine));
            return std::max({dq, std::abs(sol.r - f.r_map), std::abs(sol.tau - f.tau_map)});
        }
        case ModelKind::st: {
            const TiltedMoments f = gardner_maps(p.alpha, p.u, p.shrink, sol.q, sol.rho - sol.q, fine, true);
            const double big_r = 2.0 * p.kappa + f.r_map - f.sigma_map - f.tau_map;
            const double q_map = (f.r_map + p.h * p.h) / (big_r * big_r);
            const double rho_map = 1.0 / big_r + q_map;
            return std::max({std::abs(sol.r - f.r_map), std::abs(sol.tau - f.tau_map),
                             std::abs(sol.sigma - f.sigma_map), std::abs(sol.rho - rho_map),
                             std::abs(sol.q - q_map)});
        }
    }
    throw std::logic_error("unreachable");
}

} // namespace glasslab::rs
