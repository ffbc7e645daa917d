#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "glasslab/potential.hpp"
#include "glasslab/rng.hpp"

namespace glasslab {

enum class ModelKind { sk_ising, sk_box, perceptron, st };

enum class SpinDomain { pm_one, box, real };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
SpinDomain domain_of(ModelKind kind);
bool is_gardner(ModelKind kind);
bool is_pm_one(ModelKind kind);

// Which of the four models to build, with its parameters. Gardner sizes come
// from alpha (M = round(alpha*N)) unless m_override is set.
struct ModelSpec {
    ModelKind kind = ModelKind::sk_ising;
    double beta = 1.0;  // SK kinds
    double h = 0.0;     // external field (ST: per-site h*g_i)
    double kappa = 1.0; // ST regularizer
    double alpha = 0.5; // Gardner constraint ratio
    int m_override = 0; // explicit M; 0 means use alpha
    PotentialU u;       // Gardner kinds

    int gardner_m(int n_sites) const;
};

struct SpecCheck {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

// Validates a spec at a given size. ST kappa below the concrete largeness
// threshold (instantiated at k=2, p=1, eps=0.1) is a warning, not an error;
// M > 10N for ST is an error.
SpecCheck validate_spec(const ModelSpec& spec, int n_sites);

// The concrete kappa_0 threshold used by validate_spec.
double st_kappa0(double alpha, double h, double bound_D, int k = 2, int p = 1, double eps = 0.1);

// One frozen realization of all Gaussian randomness for a model instance.
// Regenerating from the same (spec, n_sites, seed) is bit-identical.
struct Disorder {
    ModelKind kind = ModelKind::sk_ising;
    int n_sites = 0;
    int m = 0; // Gardner column count
    std::uint64_t seed = 0;
    std::vector<double> couplings;       // n*n row-major, symmetric, zero diagonal (SK kinds)
    std::vector<double> gardner;         // n*m row-major (Gardner kinds)
    std::vector<double> field_gaussians; // length n (ST)

    double coupling(int i, int j) const { return couplings[static_cast<std::size_t>(i) * n_sites + j]; }
    double g(int i, int mm) const { return gardner[static_cast<std::size_t>(i) * m + mm]; }
};

Disorder sample_disorder(const ModelSpec& spec, int n_sites, std::uint64_t seed);

struct SpinConfiguration {
    SpinDomain domain = SpinDomain::pm_one;
    std::vector<double> values;
};

// Uniform random configuration in the model's domain (pm_one/box) or a
// standard Gaussian start (real).
SpinConfiguration random_configuration(const ModelSpec& spec, int n_sites, Rng& rng);

// -H(x), exactly per the model formula. The [-1,1]-SK external field lives in
// the reference measure and is NOT part of -H; use log_weight for the full
// unnormalized Gibbs log-density.
double energy(const ModelSpec& spec, const Disorder& disorder, const SpinConfiguration& config);

// log of the unnormalized Gibbs density against the flat reference
// (counting measure on {-1,1}^N, uniform on [-1,1]^N, Lebesgue on R^N).
double log_weight(const ModelSpec& spec, const Disorder& disorder, const SpinConfiguration& config);

// S_m = N^{-1/2} sum_i g_{i,m} x_i for Gardner kinds.
void gardner_fields(const Disorder& disorder, std::span<const double> x, std::vector<double>& s_out);

} // namespace glasslab
