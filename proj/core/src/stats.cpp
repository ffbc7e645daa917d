#include "glasslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glasslab::stats {

double pairwise_sum(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n == 0) return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double mean(std::span<const double> values) {
    if (values.empty()) return 0.0;
    return pairwise_sum(values) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    const double m = mean(values);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (values[i] - m) * (values[i] - m);
    return pairwise_sum(sq) / static_cast<double>(n - 1);
}

double standard_error(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    return std::sqrt(sample_variance(values) / static_cast<double>(values.size()));
}

double jackknife_se_mean(std::span<const double> values) { return standard_error(values); }

double jackknife_se(const std::vector<std::vector<double>>& records,
                    const std::function<double(const std::vector<std::vector<double>>&)>& functional) {
    const std::size_t n = records.size();
    if (n < 2) return 0.0;
    std::vector<double> leave_one(n);
    std::vector<std::vector<double>> retained;
    retained.reserve(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        retained.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) retained.push_back(records[j]);
        leave_one[i] = functional(retained);
    }
    const double m = mean(leave_one);
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = (leave_one[i] - m) * (leave_one[i] - m);
    return std::sqrt((static_cast<double>(n) - 1.0) / n * pairwise_sum(sq));
}

SlopeFit ols_slope(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("ols_slope: need matching x,y with n >= 2");

    auto fit = [](std::span<const double> xs, std::span<const double> ys) {
        const double mx = mean(xs), my = mean(ys);
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
        }
        return std::pair<double, double>{sxy / sxx, my - sxy / sxx * mx};
    };

    SlopeFit out;
    auto [slope, intercept] = fit(x, y);
    out.slope = slope;
    out.intercept = intercept;

    if (n >= 3) {
        std::vector<double> leave_one(n);
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < n; ++i) {
            xs.clear();
            ys.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                xs.push_back(x[j]);
                ys.push_back(y[j]);
            }
            leave_one[i] = fit(xs, ys).first;
        }
        const double m = mean(leave_one);
        double ssq = 0.0;
        for (double v : leave_one) ssq += (v - m) * (v - m);
        out.se = std::sqrt((static_cast<double>(n) - 1.0) / n * ssq);
    }
    out.ci_lo = out.slope - 1.96 * out.se;
    out.ci_hi = out.slope + 1.96 * out.se;
    return out;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

double ess_initial_positive(std::span<const double> series) {
    // Long series: estimate the autocorrelation time on a prefix and scale.
    constexpr std::size_t kMaxLen = 65536;
    if (series.size() > kMaxLen) {
        const double sub = ess_initial_positive(series.first(kMaxLen));
        return sub / static_cast<double>(kMaxLen) * static_cast<double>(series.size());
    }
    const std::size_t n = series.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(series);
    const std::size_t max_lag = std::min<std::size_t>(n / 2, 2000);

    std::vector<double> gamma(max_lag, 0.0);
    for (std::size_t lag = 0; lag < max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += (series[t] - m) * (series[t + lag] - m);
        gamma[lag] = s / static_cast<double>(n);
    }
    if (gamma[0] <= 0.0) return static_cast<double>(n);

    // Sum paired autocovariances while the pairs stay positive.
    double tau = gamma[0];
    for (std::size_t lag = 1; lag + 1 < max_lag; lag += 2) {
        const double pair = gamma[lag] + gamma[lag + 1];
        if (pair <= 0.0) break;
        tau += 2.0 * pair;
    }
    return std::max(1.0, static_cast<double>(n) * gamma[0] / tau);
}

double symmetric_min_eigenvalue(std::vector<double> a, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (off < 1e-24) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(at(p, q)) < 1e-300) continue;
                const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = at(i, p), aiq = at(i, q);
                    at(i, p) = c * aip - s * aiq;
                    at(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = at(p, i), aqi = at(q, i);
                    at(p, i) = c * api - s * aqi;
                    at(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    double min_ev = at(0, 0);
    for (int i = 1; i < n; ++i) min_ev = std::min(min_ev, at(i, i));
    return min_ev;
}

} // namespace glasslab::stats
