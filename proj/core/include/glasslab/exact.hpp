#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "glasslab/cavity.hpp"
#include "glasslab/model.hpp"

namespace glasslab::exact {

inline constexpr int kMaxEnumerationSites = 26;

// Exact Gibbs marginal on k coordinates, probabilities indexed by
// (s_1,...,s_k) in {-1,+1}^k in lexicographic order with -1 < +1.
struct MarginalTable {
    int k = 0;
    std::vector<double> probs;
};

struct ExactSummary {
    double log_partition = 0.0;
    std::vector<double> site_means;      // <x_i>
    std::vector<double> pair_corr;       // <x_i x_j>, N*N row-major; empty unless requested
    MarginalTable marginal;              // first-k marginal
    std::vector<double> aux_field_means; // <u'(S_m)>; empty unless requested (Gardner)
};

struct EnumerateOptions {
    int k = 0;
    bool pair_corr = false;
    bool aux_field_means = false;
};

namespace detail {

// Streaming log-sum-exp frame with a running maximum exponent. Accumulator
// arrays register for rescaling when a new maximum arrives.
class WeightFrame {
  public:
    void attach(double* data, std::size_t size) { arrays_.push_back({data, size}); }

    // exp(logw - shift), rescaling all registered accumulators first when
    // logw exceeds the current maximum.
    double weight(double logw) {
        if (logw > shift_) {
            if (shift_ != -std::numeric_limits<double>::infinity()) {
                const double f = std::exp(shift_ - logw);
                for (auto& [ptr, sz] : arrays_)
                    for (std::size_t i = 0; i < sz; ++i) ptr[i] *= f;
            }
            shift_ = logw;
            return 1.0;
        }
        return std::exp(logw - shift_);
    }

    double shift() const { return shift_; }

  private:
    double shift_ = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<double*, std::size_t>> arrays_;
};

} // namespace detail

// Walks {-1,+1}^N in reflected-binary Gray-code order, maintaining the log
// Gibbs weight incrementally. visit(logw, x, gray, flipped, fields) is called
// once per state; flipped is the site flipped to reach this state (-1 for the
// initial all-minus state); fields points at the maintained S_m vector for
// the Perceptron and is null for SK. Supported kinds: sk_ising, perceptron.
template <class Visit>
void gray_walk(const ModelSpec& spec, const Disorder& disorder, Visit&& visit) {
    const int n = disorder.n_sites;
    if (n > kMaxEnumerationSites) throw std::invalid_argument("gray_walk: N exceeds enumeration cap");
    if (spec.kind != ModelKind::sk_ising && spec.kind != ModelKind::perceptron)
        throw std::invalid_argument("gray_walk: exact enumeration is for the +-1 kinds");

    std::vector<double> x(n, -1.0);
    const std::uint64_t n_states = std::uint64_t{1} << n;

    if (spec.kind == ModelKind::sk_ising) {
        const double c = spec.beta / std::sqrt(static_cast<double>(n));
        const double h = spec.h;
        std::vector<double> local(n, 0.0); // local[i] = sum_j g_ij x_j
        for (int i = 0; i < n; ++i) {
            const double* row = disorder.couplings.data() + static_cast<std::size_t>(i) * n;
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += row[j] * x[j];
            local[i] = s;
        }
        double logw = 0.0;
        for (int i = 0; i < n; ++i) logw += 0.5 * c * x[i] * local[i] + h * x[i];

        std::uint64_t gray = 0;
        visit(logw, x.data(), gray, -1, static_cast<const double*>(nullptr));
        for (std::uint64_t s = 1; s < n_states; ++s) {
            const int b = std::countr_zero(s);
            const double xb = x[b];
            logw -= 2.0 * xb * (c * local[b] + h);
            const double step = -2.0 * xb;
            const double* row = disorder.couplings.data() + static_cast<std::size_t>(b) * n;
            for (int j = 0; j < n; ++j) local[j] += step * row[j];
            x[b] = -xb;
            gray ^= (std::uint64_t{1} << b);
            visit(logw, x.data(), gray, b, static_cast<const double*>(nullptr));
        }
        return;
    }

    // Perceptron: maintain the M fields S_m; log weight recomputed from them.
    const int m = disorder.m;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<double> s_fields(m, 0.0);
    for (int i = 0; i < n; ++i) {
        const double* row = disorder.gardner.data() + static_cast<std::size_t>(i) * m;
        for (int mm = 0; mm < m; ++mm) s_fields[mm] += x[i] * row[mm];
    }
    for (auto& s : s_fields) s *= inv_sqrt_n;

    const PotentialU& u = spec.u;
    auto total_u = [&]() {
        double acc = 0.0;
        if (!u.is_zero)
            for (int mm = 0; mm < m; ++mm) acc += u.eval(s_fields[mm]);
        return acc;
    };

    double logw = total_u();
    std::uint64_t gray = 0;
    visit(logw, x.data(), gray, -1, s_fields.data());
    for (std::uint64_t s = 1; s < n_states; ++s) {
        const int b = std::countr_zero(s);
        const double step = -2.0 * x[b] * inv_sqrt_n;
        const double* row = disorder.gardner.data() + static_cast<std::size_t>(b) * m;
        for (int mm = 0; mm < m; ++mm) s_fields[mm] += step * row[mm];
        x[b] = -x[b];
        logw = total_u();
        gray ^= (std::uint64_t{1} << b);
        visit(logw, x.data(), gray, b, s_fields.data());
    }
}

// Exact Gibbs computations by full Gray-code enumeration: log Z, site means,
// optionally pair correlations and the <u'(S_m)> vector, and the first-k
// marginal. Kahan-compensated accumulation for the probability-weighted
// means; streamed log-sum-exp for log Z.
ExactSummary enumerate(const ModelSpec& spec, const Disorder& disorder, const EnumerateOptions& options);
ExactSummary enumerate(const ModelSpec& spec, const Disorder& disorder, int k);

MarginalTable exact_marginal(const ModelSpec& spec, const Disorder& disorder, int k);

// Cavity fields of the decomposition, computed exactly on the truncated
// system: beta * a_j . <y>^- + h for SK, a_j . <U>^- for the Perceptron.
std::vector<double> cavity_fields(const CavityDecomposition& decomp);

struct OverlapMoments {
    double mean_r12 = 0.0;
    double mean_r12_sq = 0.0;
    double mean_r11 = 1.0;
    double mean_r11_sq = 1.0;
};

// Replica overlap moments under a single disorder: <R12> = N^-1 sum <x_i>^2,
// <R12^2> = N^-2 sum <x_i x_j>^2. Requires pair_corr. +-1 kinds have R11 = 1.
OverlapMoments overlap_moments(const ExactSummary& summary);

} // namespace glasslab::exact
