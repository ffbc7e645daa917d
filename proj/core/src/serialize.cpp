#include "glasslab/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace glasslab::io {

namespace {

json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

constexpr char kDisorderMagic[8] = {'G', 'L', 'D', 'I', 'S', 'O', 'R', 'D'};

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json to_json(const rs::RSSolution& sol) {
    json j;
    j["schema"] = "rs_solution/1";
    j["model"] = to_string(sol.kind);
    json params;
    params["q"] = number_or_null(sol.q);
    params["rho"] = number_or_null(sol.rho);
    params["r"] = number_or_null(sol.r);
    params["tau"] = number_or_null(sol.tau);
    params["sigma"] = number_or_null(sol.sigma);
    params["R"] = number_or_null(sol.big_r);
    params["V2"] = number_or_null(sol.v2);
    j["params"] = params;
    j["residual_inf"] = sol.residual_inf;
    j["iterations"] = sol.iterations;
    j["converged"] = sol.converged;
    j["quadrature_order"] = sol.quad_order;
    j["tol"] = sol.tol_used;
    j["q0"] = sol.q0_used;
    j["damping"] = sol.damping_used;
    return j;
}

json to_json(const exact::ExactSummary& s, bool include_pair_corr) {
    json j;
    j["schema"] = "exact_summary/1";
    j["logZ"] = s.log_partition;
    j["means"] = s.site_means;
    if (include_pair_corr && !s.pair_corr.empty()) j["pair_corr"] = s.pair_corr;
    j["marginal"] = {{"k", s.marginal.k}, {"probs", s.marginal.probs}};
    return j;
}

json to_json(const verify::LIReport& r) {
    json j;
    j["schema"] = "li_report/1";
    j["model"] = to_string(r.model);
    j["N"] = r.n_sites;
    j["k"] = r.k;
    j["p"] = r.p;
    j["form"] = verify::to_string(r.form);
    j["backend"] = r.backend;
    j["n_disorders"] = r.n_disorders;
    j["master_seed"] = r.master_seed;
    j["tv_moment_2p"] = r.tv_moment_2p;
    j["tv_moment_se"] = r.tv_moment_se;
    j["tv_mean"] = r.tv_mean;
    j["tv_se"] = r.tv_se;
    j["ks_mean"] = r.ks_mean;
    j["ks_se"] = r.ks_se;
    j["var_r12"] = r.var_r12;
    j["var_r12_se"] = r.var_r12_se;
    j["var_r11"] = r.var_r11;
    j["var_r11_se"] = r.var_r11_se;
    j["e_hypothesis_min"] = r.e_hyp_min;
    j["c_diagnostic"] = number_or_null(r.c_diag);
    j["exploratory"] = r.exploratory;
    return j;
}

json to_json(const verify::ConcentrationReport& r) {
    json j;
    j["schema"] = "concentration/1";
    j["model"] = to_string(r.model);
    j["N"] = r.n_sites;
    j["n_disorders"] = r.n_disorders;
    j["backend"] = r.backend;
    j["var_r12"] = r.var_r12;
    j["var_r12_se"] = r.var_r12_se;
    j["var_r11"] = r.var_r11;
    j["var_r11_se"] = r.var_r11_se;
    j["var_aux_overlap"] = r.var_aux_overlap;
    j["var_aux_overlap_se"] = r.var_aux_overlap_se;
    j["var_aux_norm"] = r.var_aux_norm;
    j["var_aux_norm_se"] = r.var_aux_norm_se;
    j["S_N"] = r.s_n;
    j["T_N"] = r.t_n;
    return j;
}

json to_json(const verify::GapReport& r, bool include_records) {
    json j;
    j["schema"] = "decomposition_gap/1";
    j["N"] = r.n_sites;
    j["k"] = r.k;
    j["p"] = r.p;
    j["n_disorders"] = r.n_disorders;
    j["gap"] = r.gap;
    j["gap_se"] = r.gap_se;
    j["tv_mean"] = r.tv_mean;
    if (include_records) j["per_disorder_tv2p"] = r.per_disorder_tv2p;
    return j;
}

json to_json(const verify::ProjectionReport& r) {
    json j;
    j["schema"] = "projection/1";
    j["model"] = to_string(r.model);
    j["N"] = r.n_sites;
    j["k"] = r.k;
    j["n_disorders"] = r.n_disorders;
    j["functions"] = r.fn_names;
    j["msd_partial"] = r.msd_partial;
    j["msd_partial_se"] = r.msd_partial_se;
    j["msd_limiting"] = r.msd_limiting;
    j["msd_limiting_se"] = r.msd_limiting_se;
    j["c1"] = r.c1;
    j["c2"] = r.c2;
    j["d1"] = r.d1;
    j["d2"] = r.d2;
    j["rho"] = r.rho_used;
    j["q"] = r.q_used;
    return j;
}

json to_json(const mcmc::SampleStats& s, bool include_samples) {
    json j;
    j["schema"] = "sample_stats/1";
    j["k"] = s.k;
    j["n_kept"] = s.n_kept;
    if (!s.marginal.probs.empty()) j["marginal"] = {{"k", s.marginal.k}, {"probs", s.marginal.probs}};
    if (!s.histogram.masses.empty()) {
        j["histogram"] = {{"k", s.histogram.k},
                          {"edges", s.histogram.edges},
                          {"masses", s.histogram.masses},
                          {"outside_mass", s.histogram.outside_mass}};
    }
    j["site_means"] = s.site_means;
    j["overlap_mean"] = s.overlap_mean;
    j["overlap_sq"] = s.overlap_sq;
    j["norm_mean"] = s.norm_mean;
    j["norm_sq"] = s.norm_sq;
    j["aux_overlap_mean"] = s.aux_overlap_mean;
    j["aux_norm_mean"] = s.aux_norm_mean;
    j["x4_mean"] = s.x4_mean;
    j["x8_mean"] = s.x8_mean;
    j["ess_min"] = s.ess_min;
    j["acceptance_rate"] = s.acceptance_rate;
    j["proposal_std_final"] = s.proposal_std_final;
    j["flags"] = s.flags;
    if (include_samples) j["samples"] = s.samples;
    return j;
}

void write_samples_csv(const mcmc::SampleStats& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_samples_csv: cannot open " + path);
    for (int j = 0; j < s.k; ++j) out << (j ? "," : "") << "x" << (j + 1);
    out << "\n";
    const std::size_t rows = s.k > 0 ? s.samples.size() / s.k : 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (int j = 0; j < s.k; ++j) out << (j ? "," : "") << format_double(s.samples[r * s.k + j]);
        out << "\n";
    }
}

void save_disorder(const Disorder& d, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_disorder: cannot open " + path);

    char header[32] = {};
    std::memcpy(header, kDisorderMagic, 8);
    const std::uint32_t kind = static_cast<std::uint32_t>(d.kind);
    const std::uint32_t n = static_cast<std::uint32_t>(d.n_sites);
    const std::uint32_t m = static_cast<std::uint32_t>(d.m);
    std::memcpy(header + 8, &kind, 4);
    std::memcpy(header + 12, &n, 4);
    std::memcpy(header + 16, &m, 4);
    std::memcpy(header + 24, &d.seed, 8);
    out.write(header, 32);

    auto write_block = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 8));
    };
    write_block(d.couplings);
    write_block(d.gardner);
    write_block(d.field_gaussians);
    if (!out) throw std::runtime_error("save_disorder: write failed for " + path);
}

Disorder load_disorder(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_disorder: cannot open " + path);

    char header[32];
    in.read(header, 32);
    if (!in || std::memcmp(header, kDisorderMagic, 8) != 0)
        throw std::runtime_error("load_disorder: bad magic in " + path);

    std::uint32_t kind, n, m;
    std::memcpy(&kind, header + 8, 4);
    std::memcpy(&n, header + 12, 4);
    std::memcpy(&m, header + 16, 4);

    Disorder d;
    d.kind = static_cast<ModelKind>(kind);
    d.n_sites = static_cast<int>(n);
    d.m = static_cast<int>(m);
    std::memcpy(&d.seed, header + 24, 8);

    auto read_block = [&](std::vector<double>& v, std::size_t count) {
        v.resize(count);
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * 8));
    };
    if (d.kind == ModelKind::sk_ising || d.kind == ModelKind::sk_box) {
        read_block(d.couplings, static_cast<std::size_t>(d.n_sites) * d.n_sites);
    } else {
        read_block(d.gardner, static_cast<std::size_t>(d.n_sites) * d.m);
        if (d.kind == ModelKind::st) read_block(d.field_gaussians, d.n_sites);
    }
    if (!in) throw std::runtime_error("load_disorder: truncated file " + path);
    return d;
}

std::string summary_csv_header() { return "model,N,k,p,form,n_disorders,statistic,value,se,seed"; }

std::string summary_csv_row(const std::string& model, int n_sites, int k, int p, const std::string& form,
                            int n_disorders, const std::string& statistic, double value, double se,
                            std::uint64_t seed) {
    std::string row;
    row += model;
    row += ',' + std::to_string(n_sites);
    row += ',' + std::to_string(k);
    row += ',' + std::to_string(p);
    row += ',' + form;
    row += ',' + std::to_string(n_disorders);
    row += ',' + statistic;
    row += ',' + format_double(value);
    row += ',' + format_double(se);
    row += ',' + std::to_string(seed);
    return row;
}

} // namespace glasslab::io
