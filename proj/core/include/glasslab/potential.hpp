#pragma once

#include <functional>
#include <string>
#include <vector>

namespace glasslab {

// Smooth activation potential for the Gardner-type models, together with the
// derivative bounds the models assume. Eval and derivatives are closures so
// that rescaled variants (u composed with a shrink factor) stay cheap to
// build. The bound is checked on a fixed grid, not proven globally.
struct PotentialU {
    std::string name = "zero";
    std::function<double(double)> eval;
    std::function<double(double)> d1;
    std::function<double(double)> d2;
    std::function<double(double)> d3;
    std::function<double(double)> d4;
    double bound_D = 0.0;
    bool concave_flag = false;
    bool linear_growth_flag = false;
    bool is_zero = true;

    double operator()(double x) const { return is_zero ? 0.0 : eval(x); }
    double deriv(double x) const { return is_zero ? 0.0 : d1(x); }
};

// u(x) = 0. Valid for both Perceptron and ST limits; every RS order parameter
// it induces vanishes.
PotentialU zero_potential();

// u(x) = -a * logistic(b*x). Bounded with bounded derivatives of all orders;
// the default Perceptron potential.
PotentialU neg_sigmoid_potential(double a, double b);

// u(x) = -a * log(1 + exp(b*x)). Nonpositive, concave, linear growth; the
// default ST potential.
PotentialU neg_softplus_potential(double a, double b);

// u composed with a shrink factor s in (0,1]: y -> u(s*y). Derivative bounds
// are preserved for s <= 1.
PotentialU scaled_potential(const PotentialU& u, double s);

// Build one of the named potentials above ("zero", "neg_sigmoid",
// "neg_softplus"); throws on unknown names.
PotentialU make_potential(const std::string& name, double a, double b);

// Grid checks of the declared invariants: derivative bounds for the listed
// orders, concavity when flagged, linear growth when flagged. Sampled on
// 10^4 points over [-10,10]. Returns human-readable violations (empty = ok).
std::vector<std::string> validate_potential(const PotentialU& u, const std::vector<int>& orders);

} // namespace glasslab
