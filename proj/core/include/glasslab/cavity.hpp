#pragma once

#include <span>
#include <vector>

#include "glasslab/model.hpp"

namespace glasslab {

// Per-cavity-site term f_j(x) = linear*x + quadratic*x^2.
struct SiteTerm {
    double linear = 0.0;
    double quadratic = 0.0;
    double operator()(double x) const { return linear * x + quadratic * x * x; }
};

// Cavity decomposition of a model instance at k cavity sites (the first k
// coordinates): a truncated (N-k)-system plus linear cavity couplings
// sum_j x_j * varrho * A_j . w(y) plus per-site terms.
//
// SK kinds: truncated system runs at beta^- = beta*sqrt((N-k)/N), A_j has
// entries g_{j,i}/sqrt(N-k), varrho = beta^-, w(y) = y.
// Gardner kinds: truncated potential is u composed with the shrink factor,
// A_j has entries g_{j,m}/sqrt(M), varrho = 1, w_m(y) =
// sqrt(alpha^-) * u~'(S_m^-), which makes A_j.w = sum_m g_{j,m}/sqrt(N) u'(S_m^0).
struct CavityDecomposition {
    int k = 0;
    double varrho = 1.0;
    double shrink = 1.0;
    ModelSpec truncated_spec;
    Disorder truncated_disorder;
    std::vector<std::vector<double>> cavity_vectors; // k vectors
    std::vector<SiteTerm> site_terms;                // k terms
    double st_sigma_minus = 0.0;
    ModelKind kind() const { return truncated_spec.kind; }
    int parent_sites() const { return truncated_disorder.n_sites + k; }
    double alpha_minus() const; // M/(N-k) for Gardner kinds
};

// st_sigma_minus: the truncated-system RS parameter entering the ST site
// term -(kappa - sigma^-/2) x^2; pass 0 when no RS solution is at hand.
CavityDecomposition cavity_decompose(const ModelSpec& spec, const Disorder& disorder, int k,
                                     double st_sigma_minus = 0.0);

// w(y) for the decomposition; y has N-k coordinates.
std::vector<double> cavity_w(const CavityDecomposition& decomp, std::span<const double> y);

// -H_{N,0}(x): the decomposable surrogate Hamiltonian. Drops the intra-k
// interaction for SK kinds; first-order cavity form for Gardner kinds. For
// the [-1,1]-SK kind the e^{hx} reference tilt is excluded, mirroring energy().
double decomposed_energy(const CavityDecomposition& decomp, const SpinConfiguration& config);

} // namespace glasslab
