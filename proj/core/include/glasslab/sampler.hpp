#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "glasslab/exact.hpp"
#include "glasslab/model.hpp"

namespace glasslab::mcmc {

struct ChainConfig {
    int n_sweeps = 20000;
    int burn_in = 2000;
    int thin = 1;
    double proposal_std = 1.0; // continuous kinds; auto-tuned during burn-in
    std::uint64_t seed = 1;
    bool keep_samples = true; // buffer kept k-coordinate samples of replica 1
};

// Binned density over R^k with per-axis edges. masses + outside_mass sum to
// 1; outside_mass is the fraction of samples falling off the binned range.
struct MarginalHistogram {
    int k = 0;
    std::vector<std::vector<double>> edges;
    std::vector<double> masses; // row-major over the k-dim grid
    double outside_mass = 0.0;
};

int default_bin_count(std::size_t n_kept);
std::vector<double> uniform_edges(double lo, double hi, int bins);
MarginalHistogram histogram_from_samples(const std::vector<double>& samples, int k,
                                         std::vector<std::vector<double>> edges);

struct SampleStats {
    int k = 0;
    int n_kept = 0;
    exact::MarginalTable marginal; // pm_one kinds
    MarginalHistogram histogram;   // continuous kinds
    std::vector<double> site_means;
    double overlap_mean = 0.0, overlap_sq = 0.0; // replica-pair R12 statistics
    double norm_mean = 0.0, norm_sq = 0.0;       // R11 statistics (replica 1)
    double aux_overlap_mean = 0.0;               // (1/N) sum_m u'(S^1_m) u'(S^2_m)
    double aux_overlap_sq = 0.0;
    double aux_norm_mean = 0.0;                  // (1/N) sum_m u'^2(S^1_m)
    double aux_norm_sq = 0.0;
    double x4_mean = 0.0, x8_mean = 0.0;         // site-averaged 4th/8th moments
    double ess_min = 0.0;
    double acceptance_rate = 1.0;
    double proposal_std_final = 0.0;
    std::vector<std::string> flags;
    std::vector<double> samples;         // kept k-coords, row-major (replica 1)
    std::vector<double> aux_field_means; // <u'(S_m)> (Gardner kinds, replica-averaged)
};

// Two independent replica chains on the same disorder. Single-site heat-bath
// (Glauber) for +-1 spins, heat-bath with inverse-CDF on a 512-point grid for
// [-1,1] spins, single-site Gaussian-proposal Metropolis for ST. S_m fields
// are maintained incrementally. Statistics use post-burn-in sweeps, thinned.
SampleStats run_chain(const ModelSpec& spec, const Disorder& disorder, const ChainConfig& config, int k);

// One estimator evaluation per disorder realization; throw to mark a failure.
using Estimator = std::function<std::vector<double>(const ModelSpec&, const Disorder&, std::uint64_t)>;

// Persistence hooks: on_record is invoked serialized (single writer) as each
// disorder completes; precomputed indices are skipped (resume support).
struct SweepHooks {
    std::function<void(std::uint64_t, const std::vector<double>&)> on_record;
    const std::map<std::uint64_t, std::vector<double>>* precomputed = nullptr;
};

struct DisorderAggregate {
    std::vector<std::string> stat_names;
    std::vector<std::vector<double>> records; // successful per-disorder stat vectors, index order
    std::vector<std::uint64_t> record_indices;
    std::vector<std::uint64_t> seeds;
    std::vector<std::uint64_t> failed_indices;
    std::vector<std::string> failure_messages;
    std::vector<double> mean;
    std::vector<double> variance; // sample variance across disorders
    std::vector<double> se;       // jackknife (delete-one) standard errors
    int n_requested = 0;
};

// Runs the estimator across independent disorder draws with per-index RNG
// substreams, so results are independent of execution order and worker
// count. Failures are recorded and excluded; more than 10% aborts.
DisorderAggregate disorder_average(const ModelSpec& spec, int n_sites, int n_disorders,
                                   const Estimator& estimator, std::uint64_t master_seed, int workers,
                                   std::vector<std::string> stat_names = {}, const SweepHooks& hooks = {});

std::uint64_t disorder_seed(std::uint64_t master_seed, std::uint64_t index);

} // namespace glasslab::mcmc
