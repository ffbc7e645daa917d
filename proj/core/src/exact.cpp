#include "glasslab/exact.hpp"

#include <array>

namespace glasslab::exact {

namespace {

// Kahan-compensated accumulator over a flat array; the compensation array is
// rescaled together with the sums inside a WeightFrame.
struct KahanArray {
    std::vector<double> sum, comp;
    explicit KahanArray(std::size_t n) : sum(n, 0.0), comp(n, 0.0) {}
    void attach(detail::WeightFrame& frame) {
        frame.attach(sum.data(), sum.size());
        frame.attach(comp.data(), comp.size());
    }
    inline void add(std::size_t i, double v) {
        const double y = v - comp[i];
        const double t = sum[i] + y;
        comp[i] = (t - sum[i]) - y;
        sum[i] = t;
    }
};

// Bit-reversal of the low k bits: Gray-code bit j is site j's spin, while the
// marginal table wants site 1 as the most significant index digit.
std::array<std::uint32_t, 16> marginal_index_lut(int k) {
    std::array<std::uint32_t, 16> lut{};
    const int cells = 1 << k;
    for (int bits = 0; bits < cells; ++bits) {
        std::uint32_t idx = 0;
        for (int j = 0; j < k; ++j)
            if (bits >> j & 1) idx |= 1u << (k - 1 - j);
        lut[bits] = idx;
    }
    return lut;
}

} // namespace

ExactSummary enumerate(const ModelSpec& spec, const Disorder& disorder, const EnumerateOptions& options) {
    const int n = disorder.n_sites;
    const int k = options.k;
    if (k < 0 || k > 4 || k > n) throw std::invalid_argument("enumerate: need 0 <= k <= 4 and k <= N");
    if (n > kMaxEnumerationSites) throw std::invalid_argument("enumerate: N exceeds the enumeration cap");

    const bool want_pc = options.pair_corr;
    const bool want_aux = options.aux_field_means && spec.kind == ModelKind::perceptron;
    const int m = disorder.m;

    detail::WeightFrame frame;
    KahanArray z(1);
    KahanArray means(n);
    KahanArray marginal(std::size_t{1} << k);
    z.attach(frame);
    means.attach(frame);
    marginal.attach(frame);

    std::vector<double> pc;
    if (want_pc) {
        pc.assign(static_cast<std::size_t>(n) * n, 0.0);
        frame.attach(pc.data(), pc.size());
    }
    KahanArray aux(want_aux ? m : 0);
    if (want_aux) aux.attach(frame);

    const auto lut = marginal_index_lut(k);
    const std::uint64_t kmask = (std::uint64_t{1} << k) - 1;

    gray_walk(spec, disorder, [&](double logw, const double* x, std::uint64_t gray, int, const double* fields) {
        const double w = frame.weight(logw);
        z.add(0, w);
        for (int i = 0; i < n; ++i) means.add(i, w * x[i]);
        marginal.add(lut[gray & kmask], w);
        if (want_pc) {
            for (int i = 0; i < n; ++i) {
                const double wx = w * x[i];
                double* row = pc.data() + static_cast<std::size_t>(i) * n;
                for (int j = i; j < n; ++j) row[j] += wx * x[j];
            }
        }
        if (want_aux) {
            for (int mm = 0; mm < m; ++mm) aux.add(mm, w * spec.u.deriv(fields[mm]));
        }
    });

    ExactSummary out;
    const double zsum = z.sum[0];
    out.log_partition = frame.shift() + std::log(zsum);

    out.site_means.resize(n);
    for (int i = 0; i < n; ++i) out.site_means[i] = means.sum[i] / zsum;

    out.marginal.k = k;
    out.marginal.probs.resize(std::size_t{1} << k);
    for (std::size_t c = 0; c < out.marginal.probs.size(); ++c) out.marginal.probs[c] = marginal.sum[c] / zsum;

    if (want_pc) {
        out.pair_corr.assign(static_cast<std::size_t>(n) * n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                const double v = (i == j) ? 1.0 : pc[static_cast<std::size_t>(i) * n + j] / zsum;
                out.pair_corr[static_cast<std::size_t>(i) * n + j] = v;
                out.pair_corr[static_cast<std::size_t>(j) * n + i] = v;
            }
        }
    }
    if (want_aux) {
        out.aux_field_means.resize(m);
        for (int mm = 0; mm < m; ++mm) out.aux_field_means[mm] = aux.sum[mm] / zsum;
    }
    return out;
}

ExactSummary enumerate(const ModelSpec& spec, const Disorder& disorder, int k) {
    EnumerateOptions options;
    options.k = k;
    return enumerate(spec, disorder, options);
}

MarginalTable exact_marginal(const ModelSpec& spec, const Disorder& disorder, int k) {
    return enumerate(spec, disorder, k).marginal;
}

std::vector<double> cavity_fields(const CavityDecomposition& dec) {
    const ModelKind kind = dec.kind();
    if (kind != ModelKind::sk_ising && kind != ModelKind::perceptron)
        throw std::invalid_argument("cavity_fields: exact backend handles the +-1 kinds only");
    if (dec.truncated_disorder.n_sites > kMaxEnumerationSites)
        throw std::invalid_argument("cavity_fields: truncated system exceeds the enumeration cap");

    EnumerateOptions options;
    options.aux_field_means = (kind == ModelKind::perceptron);
    const ExactSummary trunc = enumerate(dec.truncated_spec, dec.truncated_disorder, options);

    std::vector<double> fields(dec.k, 0.0);
    if (kind == ModelKind::sk_ising) {
        for (int j = 0; j < dec.k; ++j) {
            double dot = 0.0;
            const auto& a = dec.cavity_vectors[j];
            for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * trunc.site_means[i];
            fields[j] = dec.varrho * dot + dec.truncated_spec.h;
        }
    } else {
        // <w_m>^- = sqrt(alpha^-) <u~'(S_m^-)>^-, so A_j . <w>^- = a_j . <U>^-.
        const double root_alpha_minus = std::sqrt(dec.alpha_minus());
        for (int j = 0; j < dec.k; ++j) {
            double dot = 0.0;
            const auto& a = dec.cavity_vectors[j];
            for (std::size_t mm = 0; mm < a.size(); ++mm)
                dot += a[mm] * root_alpha_minus * trunc.aux_field_means[mm];
            fields[j] = dot;
        }
    }
    return fields;
}

OverlapMoments overlap_moments(const ExactSummary& summary) {
    const int n = static_cast<int>(summary.site_means.size());
    if (summary.pair_corr.empty()) throw std::invalid_argument("overlap_moments: pair_corr was not accumulated");

    OverlapMoments om;
    double s1 = 0.0;
    for (double mi : summary.site_means) s1 += mi * mi;
    om.mean_r12 = s1 / n;

    double s2 = 0.0;
    for (double c : summary.pair_corr) s2 += c * c;
    om.mean_r12_sq = s2 / (static_cast<double>(n) * n);

    om.mean_r11 = 1.0;
    om.mean_r11_sq = 1.0;
    return om;
}

} // namespace glasslab::exact
