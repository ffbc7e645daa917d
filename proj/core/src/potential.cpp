#include "glasslab/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace glasslab {

namespace {

inline double logistic(double z) {
    if (z >= 0.0) {
        const double e = std::exp(-z);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z), overflow-safe.
inline double softplus(double z) {
    if (z > 30.0) return z + std::exp(-z);
    if (z < -30.0) return std::exp(z);
    return std::log1p(std::exp(z));
}

// Derivatives of the logistic s(z): all expressible in s.
inline double s1(double s) { return s * (1.0 - s); }
inline double s2(double s) { return s * (1.0 - s) * (1.0 - 2.0 * s); }
inline double s3(double s) { return s * (1.0 - s) * (1.0 - 6.0 * s + 6.0 * s * s); }

} // namespace

PotentialU zero_potential() {
    PotentialU u;
    u.name = "zero";
    auto z = [](double) { return 0.0; };
    u.eval = z;
    u.d1 = z;
    u.d2 = z;
    u.d3 = z;
    u.d4 = z;
    u.bound_D = 0.0;
    u.concave_flag = true;
    u.linear_growth_flag = true;
    u.is_zero = true;
    return u;
}

PotentialU neg_sigmoid_potential(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("neg_sigmoid: a, b must be positive");
    PotentialU u;
    u.name = "neg_sigmoid(" + std::to_string(a) + "," + std::to_string(b) + ")";
    u.eval = [a, b](double x) { return -a * logistic(b * x); };
    u.d1 = [a, b](double x) { return -a * b * s1(logistic(b * x)); };
    u.d2 = [a, b](double x) { return -a * b * b * s2(logistic(b * x)); };
    u.d3 = [a, b](double x) { return -a * b * b * b * s3(logistic(b * x)); };
    u.d4 = [a, b](double x) {
        const double s = logistic(b * x);
        return -a * b * b * b * b * s * (1.0 - s) * (1.0 - 2.0 * s) * (1.0 - 12.0 * s + 12.0 * s * s);
    };
    const double bm = std::max(1.0, b);
    u.bound_D = a * bm * bm * bm * bm;
    u.concave_flag = false;
    u.linear_growth_flag = true;
    u.is_zero = false;
    return u;
}

PotentialU neg_softplus_potential(double a, double b) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("neg_softplus: a, b must be positive");
    PotentialU u;
    u.name = "neg_softplus(" + std::to_string(a) + "," + std::to_string(b) + ")";
    u.eval = [a, b](double x) { return -a * softplus(b * x); };
    u.d1 = [a, b](double x) { return -a * b * logistic(b * x); };
    u.d2 = [a, b](double x) { return -a * b * b * s1(logistic(b * x)); };
    u.d3 = [a, b](double x) { return -a * b * b * b * s2(logistic(b * x)); };
    u.d4 = [a, b](double x) { return -a * b * b * b * b * s3(logistic(b * x)); };
    const double bm = std::max(1.0, b);
    u.bound_D = a * bm * bm * bm * bm;
    u.concave_flag = true;
    u.linear_growth_flag = true;
    u.is_zero = false;
    return u;
}

PotentialU scaled_potential(const PotentialU& u, double s) {
    if (s <= 0.0 || s > 1.0) throw std::invalid_argument("scaled_potential: shrink must be in (0,1]");
    if (u.is_zero) return u;
    PotentialU v = u;
    v.name = u.name + "@shrink=" + std::to_string(s);
    v.eval = [f = u.eval, s](double x) { return f(s * x); };
    v.d1 = [f = u.d1, s](double x) { return s * f(s * x); };
    v.d2 = [f = u.d2, s](double x) { return s * s * f(s * x); };
    v.d3 = [f = u.d3, s](double x) { return s * s * s * f(s * x); };
    v.d4 = [f = u.d4, s](double x) { return s * s * s * s * f(s * x); };
    return v;
}

PotentialU make_potential(const std::string& name, double a, double b) {
    if (name == "zero") return zero_potential();
    if (name == "neg_sigmoid") return neg_sigmoid_potential(a, b);
    if (name == "neg_softplus") return neg_softplus_potential(a, b);
    throw std::invalid_argument("unknown potential: " + name);
}

std::vector<std::string> validate_potential(const PotentialU& u, const std::vector<int>& orders) {
    std::vector<std::string> violations;
    if (u.is_zero) return violations;

    constexpr int n_grid = 10000;
    constexpr double lo = -10.0, hi = 10.0;
    const double tol = 1e-9 * std::max(1.0, u.bound_D);

    auto deriv_at = [&](int d, double x) -> double {
        switch (d) {
            case 0: return u.eval(x);
            case 1: return u.d1(x);
            case 2: return u.d2(x);
            case 3: return u.d3(x);
            case 4: return u.d4(x);
            default: throw std::invalid_argument("derivative order must be in 0..4");
        }
    };

    for (int i = 0; i < n_grid; ++i) {
        const double x = lo + (hi - lo) * i / (n_grid - 1);
        for (int d : orders) {
            if (std::abs(deriv_at(d, x)) > u.bound_D + tol) {
                violations.push_back("derivative order " + std::to_string(d) + " exceeds bound at x=" +
                                     std::to_string(x));
            }
        }
        if (u.concave_flag && u.d2(x) > tol) {
            violations.push_back("declared concave but d2 > 0 at x=" + std::to_string(x));
        }
        if (u.linear_growth_flag && u.eval(x) < -u.bound_D * (1.0 + std::abs(x)) - tol) {
            violations.push_back("linear growth bound violated at x=" + std::to_string(x));
        }
        if (!violations.empty() && violations.size() > 8) return violations;
    }
    return violations;
}

} // namespace glasslab
