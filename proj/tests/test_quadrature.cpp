#include <doctest.h>

#include <cmath>

#include "glasslab/quadrature.hpp"

using glasslab::rs::make_quadrature;

TEST_CASE("hermite rule integrates Gaussian moments") {
    for (int order : {21, 41, 61, 81}) {
        const auto quad = make_quadrature(order);
        double w = 0.0;
        for (double wi : quad.hermite_weights) w += wi;
        CHECK(std::abs(w - 1.0) < 1e-12);
        CHECK(std::abs(quad.gauss_expect([](double z) { return z * z; }) - 1.0) < 1e-10);
        CHECK(std::abs(quad.gauss_expect([](double z) { return z * z * z * z; }) - 3.0) < 1e-10);
        CHECK(std::abs(quad.gauss_expect([](double z) { return z; })) < 1e-12);
    }
}

TEST_CASE("hermite rule reproduces the Gaussian mgf") {
    const auto quad = make_quadrature(61);
    for (double lambda : {0.3, 1.0, 2.0}) {
        const double expected = std::exp(0.5 * lambda * lambda);
        CHECK(quad.gauss_expect([&](double z) { return std::exp(lambda * z); }) ==
              doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("legendre rule integrates polynomials and exp on [-1,1]") {
    const auto quad = make_quadrature(41);
    double w = 0.0;
    for (double wi : quad.legendre_weights) w += wi;
    CHECK(std::abs(w - 2.0) < 1e-12);
    CHECK(quad.box_integral([](double x) { return x * x; }) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(quad.box_integral([](double x) { return x * x * x; }) == doctest::Approx(0.0).epsilon(1e-12));
    const double expected = std::exp(1.0) - std::exp(-1.0);
    CHECK(quad.box_integral([](double x) { return std::exp(x); }) == doctest::Approx(expected).epsilon(1e-12));
}
