#include "glasslab/cavity.hpp"

#include <cmath>
#include <stdexcept>

namespace glasslab {

double CavityDecomposition::alpha_minus() const {
    if (!is_gardner(kind())) return 0.0;
    return static_cast<double>(truncated_disorder.m) / truncated_disorder.n_sites;
}

CavityDecomposition cavity_decompose(const ModelSpec& spec, const Disorder& disorder, int k,
                                     double st_sigma_minus) {
    const int n = disorder.n_sites;
    if (k < 1 || k >= n) throw std::invalid_argument("cavity_decompose: need 1 <= k < N");
    if (k > 4) throw std::invalid_argument("cavity_decompose: k <= 4 supported");

    CavityDecomposition dec;
    dec.k = k;
    dec.shrink = std::sqrt(static_cast<double>(n - k) / n);
    dec.st_sigma_minus = st_sigma_minus;

    dec.truncated_spec = spec;
    Disorder& td = dec.truncated_disorder;
    td.kind = spec.kind;
    td.n_sites = n - k;
    td.seed = disorder.seed;

    dec.cavity_vectors.assign(k, {});
    dec.site_terms.assign(k, {});

    switch (spec.kind) {
        case ModelKind::sk_ising:
        case ModelKind::sk_box: {
            dec.truncated_spec.beta = spec.beta * dec.shrink;
            dec.varrho = dec.truncated_spec.beta;
            const int nt = n - k;
            td.couplings.assign(static_cast<std::size_t>(nt) * nt, 0.0);
            for (int i = 0; i < nt; ++i)
                for (int j = 0; j < nt; ++j)
                    td.couplings[static_cast<std::size_t>(i) * nt + j] = disorder.coupling(i + k, j + k);
            const double inv = 1.0 / std::sqrt(static_cast<double>(nt));
            for (int j = 0; j < k; ++j) {
                auto& a = dec.cavity_vectors[j];
                a.resize(nt);
                for (int i = 0; i < nt; ++i) a[i] = disorder.coupling(j, i + k) * inv;
                if (spec.kind == ModelKind::sk_ising) dec.site_terms[j].linear = spec.h;
            }
            break;
        }
        case ModelKind::perceptron:
        case ModelKind::st: {
            dec.truncated_spec.u = scaled_potential(spec.u, dec.shrink);
            dec.truncated_spec.m_override = disorder.m;
            dec.varrho = 1.0;
            const int nt = n - k, m = disorder.m;
            td.m = m;
            td.gardner.resize(static_cast<std::size_t>(nt) * m);
            for (int i = 0; i < nt; ++i)
                for (int mm = 0; mm < m; ++mm)
                    td.gardner[static_cast<std::size_t>(i) * m + mm] = disorder.g(i + k, mm);
            const double inv = 1.0 / std::sqrt(static_cast<double>(m));
            for (int j = 0; j < k; ++j) {
                auto& a = dec.cavity_vectors[j];
                a.resize(m);
                for (int mm = 0; mm < m; ++mm) a[mm] = disorder.g(j, mm) * inv;
            }
            if (spec.kind == ModelKind::st) {
                td.field_gaussians.assign(disorder.field_gaussians.begin() + k, disorder.field_gaussians.end());
                for (int j = 0; j < k; ++j) {
                    dec.site_terms[j].linear = spec.h * disorder.field_gaussians[j];
                    dec.site_terms[j].quadratic = -(spec.kappa - st_sigma_minus / 2.0);
                }
            }
            break;
        }
    }
    return dec;
}

std::vector<double> cavity_w(const CavityDecomposition& dec, std::span<const double> y) {
    const int nt = dec.truncated_disorder.n_sites;
    if (static_cast<int>(y.size()) != nt) throw std::invalid_argument("cavity_w: y dimension mismatch");

    if (!is_gardner(dec.kind())) return std::vector<double>(y.begin(), y.end());

    std::vector<double> s;
    gardner_fields(dec.truncated_disorder, y, s); // S_m^- under the truncated system
    const double root_alpha_minus = std::sqrt(dec.alpha_minus());
    std::vector<double> w(s.size());
    const PotentialU& ut = dec.truncated_spec.u; // u~ = u(shrink * .)
    for (std::size_t mm = 0; mm < s.size(); ++mm) w[mm] = root_alpha_minus * ut.deriv(s[mm]);
    return w;
}

double decomposed_energy(const CavityDecomposition& dec, const SpinConfiguration& config) {
    const int n = dec.parent_sites();
    if (static_cast<int>(config.values.size()) != n)
        throw std::invalid_argument("decomposed_energy: config dimension mismatch");
    if (config.domain != domain_of(dec.kind()))
        throw std::invalid_argument("decomposed_energy: config domain mismatch");

    const int k = dec.k;
    SpinConfiguration yc;
    yc.domain = config.domain;
    yc.values.assign(config.values.begin() + k, config.values.end());

    double acc = energy(dec.truncated_spec, dec.truncated_disorder, yc);

    const std::vector<double> w = cavity_w(dec, yc.values);
    for (int j = 0; j < k; ++j) {
        const auto& a = dec.cavity_vectors[j];
        double dot = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * w[i];
        acc += config.values[j] * dec.varrho * dot;
        acc += dec.site_terms[j](config.values[j]);
    }
    return acc;
}

} // namespace glasslab
