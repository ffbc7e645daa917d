#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glasslab/cavity.hpp"
#include "glasslab/exact.hpp"
#include "glasslab/rs.hpp"
#include "glasslab/sampler.hpp"
#include "glasslab/stats.hpp"

namespace glasslab::verify {

enum class MarginalForm { partial, limiting };
std::string to_string(MarginalForm form);
MarginalForm form_from_string(const std::string& s);

enum class Backend { exact, mcmc, auto_select };
std::string to_string(Backend backend);
Backend backend_from_string(const std::string& s);

// auto: exact iff a +-1 kind and every N <= 26.
Backend resolve_backend(Backend requested, ModelKind kind, int max_n);

// One normalized per-site factor of a predicted product marginal.
struct SiteFactor {
    SpinDomain domain = SpinDomain::pm_one;
    double field = 0.0;           // pm_one: P(+1) = e^field / (2 cosh field)
    double lin = 0.0, quad = 0.0; // box: density prop. to exp(lin x + quad x^2) on [-1,1]
    double mean = 0.0, var = 1.0; // real: Gaussian
};

// Product measure predicted by the cavity/RS theory. The partial form plugs
// in this disorder's cavity fields; the limiting form replaces them with
// beta^- sqrt(q^-) z_j (SK), sqrt(r^-) z_j (Gardner) for fresh Gaussians z_j.
struct PredictedMarginal {
    ModelKind model = ModelKind::sk_ising;
    MarginalForm form = MarginalForm::partial;
    int k = 0;
    std::vector<SiteFactor> sites;

    exact::MarginalTable table() const; // pm_one kinds
    // Masses of one axis's bins (len(edges)-1 values).
    std::vector<double> axis_masses(int j, const std::vector<double>& edges) const;
    std::function<double(double)> site_cdf(int j) const;
    double site_normalization(int j) const; // == 1 up to quadrature error
};

// cavity_field_values convention: SK_ISING / PERCEPTRON pass the exact-module
// cavity fields verbatim (SK includes +h); SK_BOX passes varrho*A_j.<y>^- and
// ST passes a_j.<U>^- (h-dependent parts are added here). The limiting form
// requires z_draws (k fresh standard Gaussians) and the truncated-system RS
// solution.
PredictedMarginal predicted_product(const CavityDecomposition& decomp, const rs::RSSolution& truncated_rs,
                                    MarginalForm form, std::span<const double> z_draws = {},
                                    std::span<const double> cavity_field_values = {});

// (1/2) sum |a_i - b_i|; equals the sup over subsets for finite spaces.
double tv_discrete(const exact::MarginalTable& a, const exact::MarginalTable& b);

// Histogram total variation against the predicted product on the histogram's
// own edges; a lower bound of the true TV.
double tv_continuous(const mcmc::MarginalHistogram& a, const PredictedMarginal& b);

// Max over axes of the per-axis KS distance of raw samples against the
// predicted site CDFs.
double ks_to_predicted(const std::vector<double>& samples, int k, const PredictedMarginal& b);

// Left-hand side of the E>=1 hypothesis for one site factor, minimized over
// P on a grid in [-10,10].
double e_hypothesis_min(ModelKind kind, double varrho, double xi_minus_upsilon, const SiteTerm& site,
                        const rs::Quadrature& quad);

// The abstract theorem's exponential-moment constant C (diagnostic only);
// +inf when the defining integral diverges. Reported, never asserted.
double c_constant(ModelKind kind, int k, int p, double eps, double varrho, double bound_d_sq, double xi,
                  const SiteTerm& site, const rs::Quadrature& quad);

// Disorder-averaged local-independence statistics for one system size.
struct LIReport {
    ModelKind model = ModelKind::sk_ising;
    int n_sites = 0;
    int k = 0;
    int p = 1;
    MarginalForm form = MarginalForm::partial;
    std::string backend;
    int n_disorders = 0;
    std::uint64_t master_seed = 0;
    double tv_moment_2p = 0.0, tv_moment_se = 0.0;
    double tv_mean = 0.0, tv_se = 0.0;
    double ks_mean = 0.0, ks_se = 0.0; // continuous backends
    double var_r12 = 0.0, var_r12_se = 0.0;
    double var_r11 = 0.0, var_r11_se = 0.0;
    double e_hyp_min = 1.0;
    double c_diag = 0.0;
    bool exploratory = false;
};

struct SweepSettings {
    Backend backend = Backend::auto_select;
    mcmc::ChainConfig chain;
    int workers = 0;
    int quad_order = 61;
    bool concentration = true; // also accumulate overlap moments per disorder
    // Per-N persistence/resume plumbing for the CLI (optional).
    std::function<void(int, std::uint64_t, const std::vector<double>&)> record_sink;
    std::function<const std::map<std::uint64_t, std::vector<double>>*(int)> resume_source;
};

struct LISweepResult {
    std::vector<LIReport> reports;
    stats::SlopeFit slope; // log tv_moment_2p vs log N
    std::vector<std::string> stat_names;
    std::vector<mcmc::DisorderAggregate> per_n; // raw per-disorder records
};

LISweepResult li_sweep(const ModelSpec& spec, const std::vector<int>& n_list, int k, int p, int n_disorders,
                       MarginalForm form, std::uint64_t master_seed, const SweepSettings& settings = {});

struct ConcentrationReport {
    ModelKind model;
    int n_sites = 0;
    int n_disorders = 0;
    double var_r12 = 0.0, var_r12_se = 0.0;
    double var_r11 = 0.0, var_r11_se = 0.0;
    double var_aux_overlap = 0.0, var_aux_overlap_se = 0.0;
    double var_aux_norm = 0.0, var_aux_norm_se = 0.0;
    double s_n = 1.0; // 4th single-site moment under nu_N
    double t_n = 1.0; // 8th
    std::string backend;
};

ConcentrationReport concentration_stats(const ModelSpec& spec, int n_sites, int n_disorders,
                                        std::uint64_t master_seed, const SweepSettings& settings = {},
                                        const mcmc::SweepHooks& hooks = {});

struct GapReport {
    int n_sites = 0;
    int k = 0, p = 1;
    int n_disorders = 0;
    double gap = 0.0, gap_se = 0.0; // disorder mean of TV(G, G_0)^{2p}
    double tv_mean = 0.0;
    std::vector<double> per_disorder_tv2p;
};

// Decomposition gap sup_B (G^(k)[B] - G_0^(k)[B])^{2p} with both marginals
// exact; +-1 kinds only.
GapReport decomposition_gap(const ModelSpec& spec, int n_sites, int k, int p, int n_disorders,
                            std::uint64_t master_seed, int workers = 0,
                            const mcmc::SweepHooks& hooks = {});

struct ProjectionFunction {
    std::string name;
    std::function<double(double)> f;
    bool is_constant = false;
};

// tanh, cos(0.5x), cos(x), cos(2x), clipped quadratic.
std::vector<ProjectionFunction> default_battery();

struct ProjectionReport {
    ModelKind model;
    int n_sites = 0;
    int k = 0;
    int n_disorders = 0;
    std::vector<std::string> fn_names;
    std::vector<double> msd_partial, msd_partial_se; // mean squared discrepancy vs conditional form
    std::vector<double> msd_limiting, msd_limiting_se;
    double c1 = 0.0, c2 = 0.0; // measured thin-shell / overlap variances
    double d1 = 0.0, d2 = 0.0; // paper rate functions at (c1, c2)
    double rho_used = 1.0, q_used = 0.0;
};

// Random-projection Gaussianity check: discrepancy between <g(Theta^T x)> and
// the conditional-Gaussian prediction, for fresh Theta per disorder. Exact
// backend, +-1 kinds (the projected vector is the spin vector for SK and the
// u'-field vector for the Perceptron).
ProjectionReport projection_test(const ModelSpec& spec, int n_sites, int k,
                                 const std::vector<ProjectionFunction>& battery, int n_disorders,
                                 std::uint64_t master_seed, int workers = 0, int quad_order = 61,
                                 const mcmc::SweepHooks& hooks = {});

// Truncated-system RS solution matching cavity_decompose(spec, ., k) at size
// n_sites (the predicted-marginal constants).
rs::RSSolution truncated_rs_solution(const ModelSpec& spec, int n_sites, int k, const rs::Quadrature& quad);

} // namespace glasslab::verify
