#include "glasslab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "glasslab/parallel.hpp"
#include "glasslab/stats.hpp"

namespace glasslab::mcmc {

namespace {

inline double logistic(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

constexpr int kBoxGrid = 512;

// One replica's state. local[] carries the SK fields sum_j g_ij x_j, s[] the
// Gardner fields S_m; both are maintained incrementally under site updates.
struct Replica {
    std::vector<double> x;
    std::vector<double> local;
    std::vector<double> s;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
};

class ChainDriver {
  public:
    ChainDriver(const ModelSpec& spec, const Disorder& dis) : spec_(spec), dis_(dis), n_(dis.n_sites) {
        c_ = spec.beta / std::sqrt(static_cast<double>(n_));
        inv_sqrt_n_ = 1.0 / std::sqrt(static_cast<double>(n_));
    }

    void init(Replica& rep, Rng& rng) const {
        rep.x.resize(n_);
        for (auto& xi : rep.x) {
            switch (domain_of(spec_.kind)) {
                case SpinDomain::pm_one: xi = (rng.next_u64() & 1u) ? 1.0 : -1.0; break;
                case SpinDomain::box: xi = 2.0 * rng.uniform() - 1.0; break;
                case SpinDomain::real: xi = rng.normal() * 0.5; break;
            }
        }
        if (spec_.kind == ModelKind::sk_ising || spec_.kind == ModelKind::sk_box) {
            rep.local.assign(n_, 0.0);
            for (int i = 0; i < n_; ++i) {
                const double* row = dis_.couplings.data() + static_cast<std::size_t>(i) * n_;
                double acc = 0.0;
                for (int j = 0; j < n_; ++j) acc += row[j] * rep.x[j];
                rep.local[i] = acc;
            }
        } else {
            gardner_fields(dis_, rep.x, rep.s);
        }
    }

    void sweep(Replica& rep, Rng& rng, double proposal_std) const {
        switch (spec_.kind) {
            case ModelKind::sk_ising: sweep_sk_ising(rep, rng); break;
            case ModelKind::sk_box: sweep_sk_box(rep, rng); break;
            case ModelKind::perceptron: sweep_perceptron(rep, rng); break;
            case ModelKind::st: sweep_st(rep, rng, proposal_std); break;
        }
    }

  private:
    void flip_update_local(Replica& rep, int i, double x_new) const {
        const double d = x_new - rep.x[i];
        if (d == 0.0) return;
        const double* row = dis_.couplings.data() + static_cast<std::size_t>(i) * n_;
        for (int j = 0; j < n_; ++j) rep.local[j] += d * row[j];
        rep.x[i] = x_new;
    }

    void sweep_sk_ising(Replica& rep, Rng& rng) const {
        for (int i = 0; i < n_; ++i) {
            const double a = c_ * rep.local[i] + spec_.h;
            const double x_new = (rng.uniform() < logistic(2.0 * a)) ? 1.0 : -1.0;
            flip_update_local(rep, i, x_new);
        }
        rep.proposed += n_;
        rep.accepted += n_;
    }

    void sweep_sk_box(Replica& rep, Rng& rng) const {
        // Conditional density of x_i is exp(a x) on [-1,1]; inverse-CDF on a
        // 512-point midpoint grid, linear within cells.
        double cdf[kBoxGrid];
        for (int i = 0; i < n_; ++i) {
            const double a = c_ * rep.local[i] + spec_.h;
            const double abs_a = std::abs(a);
            double acc = 0.0;
            for (int c = 0; c < kBoxGrid; ++c) {
                const double xm = -1.0 + 2.0 * (c + 0.5) / kBoxGrid;
                acc += std::exp(a * xm - abs_a);
                cdf[c] = acc;
            }
            const double u = rng.uniform() * acc;
            const int cell = static_cast<int>(std::lower_bound(cdf, cdf + kBoxGrid, u) - cdf);
            const double prev = (cell == 0) ? 0.0 : cdf[cell - 1];
            const double frac = (cdf[cell] > prev) ? (u - prev) / (cdf[cell] - prev) : 0.5;
            const double x_new = -1.0 + 2.0 * (cell + frac) / kBoxGrid;
            flip_update_local(rep, i, x_new);
        }
        rep.proposed += n_;
        rep.accepted += n_;
    }

    void sweep_perceptron(Replica& rep, Rng& rng) const {
        const int m = dis_.m;
        std::vector<double> base(m);
        for (int i = 0; i < n_; ++i) {
            const double* row = dis_.gardner.data() + static_cast<std::size_t>(i) * m;
            double dlog = 0.0;
            for (int mm = 0; mm < m; ++mm) {
                const double gm = row[mm] * inv_sqrt_n_;
                base[mm] = rep.s[mm] - rep.x[i] * gm;
                dlog += spec_.u(base[mm] + gm) - spec_.u(base[mm] - gm);
            }
            const double x_new = (rng.uniform() < logistic(dlog)) ? 1.0 : -1.0;
            if (x_new != rep.x[i]) {
                for (int mm = 0; mm < m; ++mm) rep.s[mm] = base[mm] + x_new * row[mm] * inv_sqrt_n_;
                rep.x[i] = x_new;
            }
        }
        rep.proposed += n_;
        rep.accepted += n_;
    }

    void sweep_st(Replica& rep, Rng& rng, double proposal_std) const {
        const int m = dis_.m;
        for (int i = 0; i < n_; ++i) {
            const double xi = rep.x[i];
            const double xp = xi + proposal_std * rng.normal();
            const double d = xp - xi;
            double dlog = -spec_.kappa * (xp * xp - xi * xi) + spec_.h * dis_.field_gaussians[i] * d;
            const double* row = dis_.gardner.data() + static_cast<std::size_t>(i) * m;
            if (!spec_.u.is_zero) {
                for (int mm = 0; mm < m; ++mm) {
                    const double sm = rep.s[mm];
                    dlog += spec_.u.eval(sm + d * row[mm] * inv_sqrt_n_) - spec_.u.eval(sm);
                }
            }
            ++rep.proposed;
            if (dlog >= 0.0 || std::log(rng.uniform_pos()) < dlog) {
                ++rep.accepted;
                for (int mm = 0; mm < m; ++mm) rep.s[mm] += d * row[mm] * inv_sqrt_n_;
                rep.x[i] = xp;
            }
        }
    }

    const ModelSpec& spec_;
    const Disorder& dis_;
    int n_;
    double c_ = 0.0;
    double inv_sqrt_n_ = 0.0;
};

} // namespace

int default_bin_count(std::size_t n_kept) {
    const int b = static_cast<int>(std::ceil(2.0 * std::cbrt(static_cast<double>(n_kept))));
    return std::clamp(b, 16, 128);
}

std::vector<double> uniform_edges(double lo, double hi, int bins) {
    std::vector<double> edges(bins + 1);
    for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * i / bins;
    return edges;
}

MarginalHistogram histogram_from_samples(const std::vector<double>& samples, int k,
                                         std::vector<std::vector<double>> edges) {
    if (k < 1 || static_cast<int>(edges.size()) != k)
        throw std::invalid_argument("histogram_from_samples: need one edge vector per axis");
    MarginalHistogram h;
    h.k = k;
    h.edges = std::move(edges);
    std::size_t cells = 1;
    for (auto& e : h.edges) {
        if (e.size() < 2) throw std::invalid_argument("histogram_from_samples: axis needs >= 2 edges");
        cells *= e.size() - 1;
    }
    h.masses.assign(cells, 0.0);
    const std::size_t n = samples.size() / k;
    std::size_t outside = 0;
    for (std::size_t row = 0; row < n; ++row) {
        std::size_t idx = 0;
        bool in = true;
        for (int a = 0; a < k; ++a) {
            const auto& e = h.edges[a];
            const double v = samples[row * k + a];
            if (v < e.front() || v >= e.back()) {
                in = false;
                break;
            }
            const std::size_t bin =
                static_cast<std::size_t>(std::upper_bound(e.begin(), e.end(), v) - e.begin()) - 1;
            idx = idx * (e.size() - 1) + bin;
        }
        if (in)
            h.masses[idx] += 1.0;
        else
            ++outside;
    }
    if (n > 0) {
        for (auto& mass : h.masses) mass /= static_cast<double>(n);
        h.outside_mass = static_cast<double>(outside) / static_cast<double>(n);
    }
    return h;
}

SampleStats run_chain(const ModelSpec& spec, const Disorder& disorder, const ChainConfig& cfg, int k) {
    const int n = disorder.n_sites;
    if (k < 0 || k > 4 || k > n) throw std::invalid_argument("run_chain: need 0 <= k <= min(4, N)");
    if (cfg.burn_in >= cfg.n_sweeps) throw std::invalid_argument("run_chain: burn_in must be < n_sweeps");
    if (cfg.thin < 1) throw std::invalid_argument("run_chain: thin must be >= 1");
    if (spec.kind == ModelKind::st && cfg.proposal_std <= 0.0)
        throw std::invalid_argument("run_chain: proposal_std must be > 0 for ST");

    ChainDriver driver(spec, disorder);
    Rng rng1(cfg.seed, 0, StreamRole::chain_replica_1);
    Rng rng2(cfg.seed, 0, StreamRole::chain_replica_2);
    Replica rep1, rep2;
    driver.init(rep1, rng1);
    driver.init(rep2, rng2);

    const bool continuous = domain_of(spec.kind) != SpinDomain::pm_one;
    const bool gardner = is_gardner(spec.kind);
    const int m = disorder.m;

    // Burn-in, with proposal tuning for ST frozen afterwards.
    double proposal_std = cfg.proposal_std;
    std::uint64_t tune_prop = 0, tune_acc = 0;
    for (int sweep = 0; sweep < cfg.burn_in; ++sweep) {
        const std::uint64_t p0 = rep1.proposed, a0 = rep1.accepted;
        driver.sweep(rep1, rng1, proposal_std);
        driver.sweep(rep2, rng2, proposal_std);
        if (spec.kind == ModelKind::st) {
            tune_prop += rep1.proposed - p0;
            tune_acc += rep1.accepted - a0;
            if (tune_prop >= 100) {
                const double rate = static_cast<double>(tune_acc) / static_cast<double>(tune_prop);
                proposal_std = std::clamp(proposal_std * std::exp(0.7 * (rate - 0.44)), 1e-4, 1e3);
                tune_prop = tune_acc = 0;
            }
        }
    }
    rep1.proposed = rep1.accepted = 0;
    rep2.proposed = rep2.accepted = 0;

    SampleStats out;
    out.k = k;
    out.site_means.assign(n, 0.0);
    if (!continuous) out.marginal = exact::MarginalTable{k, std::vector<double>(std::size_t{1} << k, 0.0)};
    if (gardner) out.aux_field_means.assign(m, 0.0);

    std::vector<double> overlap_series;
    std::vector<double> coord_series;
    double acc_overlap = 0.0, acc_overlap_sq = 0.0;
    double acc_norm = 0.0, acc_norm_sq = 0.0;
    double acc_aux_overlap = 0.0, acc_aux_overlap_sq = 0.0;
    double acc_aux_norm = 0.0, acc_aux_norm_sq = 0.0;
    double acc_x4 = 0.0, acc_x8 = 0.0;
    std::vector<double> up1(gardner ? m : 0), up2(gardner ? m : 0);
    int kept = 0;

    for (int sweep = cfg.burn_in; sweep < cfg.n_sweeps; ++sweep) {
        driver.sweep(rep1, rng1, proposal_std);
        driver.sweep(rep2, rng2, proposal_std);
        if ((sweep - cfg.burn_in) % cfg.thin != 0) continue;
        ++kept;

        double r12 = 0.0, r11 = 0.0, x4 = 0.0, x8 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double xi = rep1.x[i];
            out.site_means[i] += xi;
            r12 += xi * rep2.x[i];
            r11 += xi * xi;
            const double xi4 = xi * xi * xi * xi;
            x4 += xi4;
            x8 += xi4 * xi4;
        }
        r12 /= n;
        r11 /= n;
        acc_overlap += r12;
        acc_overlap_sq += r12 * r12;
        acc_norm += r11;
        acc_norm_sq += r11 * r11;
        acc_x4 += x4 / n;
        acc_x8 += x8 / n;
        overlap_series.push_back(r12);
        coord_series.push_back(rep1.x[0]);

        if (!continuous) {
            std::size_t idx = 0;
            for (int j = 0; j < k; ++j) idx = idx * 2 + (rep1.x[j] > 0.0 ? 1 : 0);
            out.marginal.probs[idx] += 1.0;
        }
        if (cfg.keep_samples && k > 0)
            for (int j = 0; j < k; ++j) out.samples.push_back(rep1.x[j]);

        if (gardner) {
            double aux_ov = 0.0, aux_nm = 0.0;
            for (int mm = 0; mm < m; ++mm) {
                up1[mm] = spec.u.deriv(rep1.s[mm]);
                up2[mm] = spec.u.deriv(rep2.s[mm]);
                aux_ov += up1[mm] * up2[mm];
                aux_nm += up1[mm] * up1[mm];
                out.aux_field_means[mm] += 0.5 * (up1[mm] + up2[mm]);
            }
            aux_ov /= n;
            aux_nm /= n;
            acc_aux_overlap += aux_ov;
            acc_aux_overlap_sq += aux_ov * aux_ov;
            acc_aux_norm += aux_nm;
            acc_aux_norm_sq += aux_nm * aux_nm;
        }
    }

    out.n_kept = kept;
    if (kept == 0) throw std::runtime_error("run_chain: no kept sweeps");
    const double inv = 1.0 / kept;
    for (auto& v : out.site_means) v *= inv;
    if (!continuous)
        for (auto& p : out.marginal.probs) p *= inv;
    if (gardner)
        for (auto& v : out.aux_field_means) v *= inv;
    out.overlap_mean = acc_overlap * inv;
    out.overlap_sq = acc_overlap_sq * inv;
    out.norm_mean = acc_norm * inv;
    out.norm_sq = acc_norm_sq * inv;
    out.aux_overlap_mean = acc_aux_overlap * inv;
    out.aux_overlap_sq = acc_aux_overlap_sq * inv;
    out.aux_norm_mean = acc_aux_norm * inv;
    out.aux_norm_sq = acc_aux_norm_sq * inv;
    out.x4_mean = acc_x4 * inv;
    out.x8_mean = acc_x8 * inv;

    const double ess_overlap = stats::ess_initial_positive(overlap_series);
    const double ess_coord = stats::ess_initial_positive(coord_series);
    out.ess_min = std::min(ess_overlap, ess_coord);

    out.proposal_std_final = proposal_std;
    if (spec.kind == ModelKind::st) {
        out.acceptance_rate =
            rep1.proposed ? static_cast<double>(rep1.accepted) / static_cast<double>(rep1.proposed) : 0.0;
        if (out.acceptance_rate < 0.1 || out.acceptance_rate > 0.9)
            out.flags.push_back("acceptance_rate outside [0.1, 0.9] after tuning");
    } else {
        out.acceptance_rate = 1.0;
    }

    if (continuous && cfg.keep_samples && k > 0) {
        std::vector<std::vector<double>> edges(k);
        const int bins = default_bin_count(static_cast<std::size_t>(kept));
        for (int a = 0; a < k; ++a) {
            if (spec.kind == ModelKind::sk_box) {
                edges[a] = uniform_edges(-1.0, 1.0 + 1e-12, bins);
            } else {
                double lo = out.samples[a], hi = out.samples[a];
                for (int row = 0; row < kept; ++row) {
                    lo = std::min(lo, out.samples[static_cast<std::size_t>(row) * k + a]);
                    hi = std::max(hi, out.samples[static_cast<std::size_t>(row) * k + a]);
                }
                const double pad = 1e-9 + 1e-3 * (hi - lo);
                edges[a] = uniform_edges(lo - pad, hi + pad, bins);
            }
        }
        out.histogram = histogram_from_samples(out.samples, k, std::move(edges));
    }
    return out;
}

std::uint64_t disorder_seed(std::uint64_t master_seed, std::uint64_t index) {
    return seed_stream(master_seed, index, StreamRole::disorder).words[0];
}

DisorderAggregate disorder_average(const ModelSpec& spec, int n_sites, int n_disorders,
                                   const Estimator& estimator, std::uint64_t master_seed, int workers,
                                   std::vector<std::string> stat_names, const SweepHooks& hooks) {
    if (n_disorders < 2) throw std::invalid_argument("disorder_average: n_disorders must be >= 2");

    struct Slot {
        std::vector<double> stats;
        std::string error;
        bool failed = false;
    };
    std::vector<Slot> slots(n_disorders);
    std::vector<std::uint64_t> seeds(n_disorders);
    std::vector<std::size_t> todo;
    todo.reserve(n_disorders);
    for (int d = 0; d < n_disorders; ++d) {
        seeds[d] = disorder_seed(master_seed, d);
        if (hooks.precomputed) {
            auto it = hooks.precomputed->find(static_cast<std::uint64_t>(d));
            if (it != hooks.precomputed->end()) {
                slots[d].stats = it->second;
                continue;
            }
        }
        todo.push_back(static_cast<std::size_t>(d));
    }

    std::mutex sink_mutex;
    parallel_for(todo.size(), workers, [&](std::size_t t) {
        const std::size_t d = todo[t];
        try {
            const Disorder dis = sample_disorder(spec, n_sites, seeds[d]);
            slots[d].stats = estimator(spec, dis, d);
            if (hooks.on_record) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                hooks.on_record(d, slots[d].stats);
            }
        } catch (const std::exception& e) {
            slots[d].failed = true;
            slots[d].error = e.what();
        }
    });

    DisorderAggregate agg;
    agg.stat_names = std::move(stat_names);
    agg.n_requested = n_disorders;
    agg.seeds = std::move(seeds);
    for (int d = 0; d < n_disorders; ++d) {
        if (slots[d].failed) {
            agg.failed_indices.push_back(d);
            agg.failure_messages.push_back(slots[d].error);
        } else {
            agg.records.push_back(std::move(slots[d].stats));
            agg.record_indices.push_back(d);
        }
    }
    if (10 * agg.failed_indices.size() > static_cast<std::size_t>(n_disorders))
        throw std::runtime_error("disorder_average: more than 10% of disorders failed (first: " +
                                 (agg.failure_messages.empty() ? std::string("?") : agg.failure_messages.front()) +
                                 ")");
    if (agg.records.empty()) throw std::runtime_error("disorder_average: no successful disorders");

    const std::size_t n_stats = agg.records.front().size();
    agg.mean.resize(n_stats);
    agg.variance.resize(n_stats);
    agg.se.resize(n_stats);
    std::vector<double> column(agg.records.size());
    for (std::size_t s = 0; s < n_stats; ++s) {
        for (std::size_t i = 0; i < agg.records.size(); ++i) column[i] = agg.records[i][s];
        agg.mean[s] = stats::mean(column);
        agg.variance[s] = stats::sample_variance(column);
        agg.se[s] = stats::jackknife_se_mean(column);
    }
    return agg;
}

} // namespace glasslab::mcmc
