#include "glasslab/model.hpp"

#include <cmath>
#include <stdexcept>

namespace glasslab {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::sk_ising: return "sk_ising";
        case ModelKind::sk_box: return "sk_box";
        case ModelKind::perceptron: return "perceptron";
        case ModelKind::st: return "st";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "sk_ising") return ModelKind::sk_ising;
    if (s == "sk_box") return ModelKind::sk_box;
    if (s == "perceptron") return ModelKind::perceptron;
    if (s == "st") return ModelKind::st;
    throw std::invalid_argument("unknown model kind: " + s);
}

SpinDomain domain_of(ModelKind kind) {
    switch (kind) {
        case ModelKind::sk_ising:
        case ModelKind::perceptron: return SpinDomain::pm_one;
        case ModelKind::sk_box: return SpinDomain::box;
        case ModelKind::st: return SpinDomain::real;
    }
    return SpinDomain::pm_one;
}

bool is_gardner(ModelKind kind) { return kind == ModelKind::perceptron || kind == ModelKind::st; }
bool is_pm_one(ModelKind kind) { return domain_of(kind) == SpinDomain::pm_one; }

int ModelSpec::gardner_m(int n_sites) const {
    if (!is_gardner(kind)) return 0;
    if (m_override > 0) return m_override;
    const int m = static_cast<int>(std::llround(alpha * n_sites));
    return std::max(m, 1);
}

double st_kappa0(double alpha, double h, double bound_D, int k, int p, double eps) {
    const double eps_bar = 1.0 / (2.0 * eps) - 1.0;
    const double d2 = bound_D * bound_D;
    const double a = 48.0 * k * k * p * p * p * (1.0 + 8.0 * eps_bar * eps_bar) * (alpha * d2 + h * h);
    const double b = std::sqrt(150.0 * (1.0 + h * h)) * alpha * d2 * d2;
    return std::max(a, b);
}

SpecCheck validate_spec(const ModelSpec& spec, int n_sites) {
    SpecCheck check;
    if (n_sites < 2) check.errors.push_back("n_sites must be >= 2");

    switch (spec.kind) {
        case ModelKind::sk_ising:
        case ModelKind::sk_box:
            if (spec.beta <= 0.0) check.errors.push_back("beta must be > 0 for SK kinds");
            break;
        case ModelKind::perceptron: {
            if (spec.gardner_m(n_sites) < 1) check.errors.push_back("perceptron needs M >= 1");
            auto v = validate_potential(spec.u, {0, 1, 2, 3});
            for (auto& m : v) check.errors.push_back("potential: " + m);
            break;
        }
        case ModelKind::st: {
            const int m = spec.gardner_m(n_sites);
            if (m < 1) check.errors.push_back("st needs M >= 1");
            if (m > 10 * n_sites) check.errors.push_back("st requires M <= 10*N");
            if (spec.kappa <= 0.0) check.errors.push_back("kappa must be > 0");
            if (spec.h < 0.0) check.errors.push_back("st requires h >= 0");
            auto v = validate_potential(spec.u, {1, 2, 3, 4});
            for (auto& msg : v) check.errors.push_back("potential: " + msg);
            if (!spec.u.is_zero) {
                if (!spec.u.concave_flag) check.errors.push_back("st potential must be concave");
                bool nonpos = true;
                for (int i = 0; i <= 100; ++i) {
                    if (spec.u.eval(-10.0 + 0.2 * i) > 1e-12) nonpos = false;
                }
                if (!nonpos) check.errors.push_back("st potential must satisfy u <= 0");
            }
            const double k0 = st_kappa0(spec.alpha, spec.h, spec.u.bound_D);
            if (spec.kappa < k0) {
                check.warnings.push_back("kappa below the largeness threshold kappa0=" + std::to_string(k0) +
                                         "; run is outside the validated zone");
            }
            break;
        }
    }
    return check;
}

Disorder sample_disorder(const ModelSpec& spec, int n_sites, std::uint64_t seed) {
    auto check = validate_spec(spec, n_sites);
    if (!check.ok()) throw std::invalid_argument("sample_disorder: " + check.errors.front());

    Disorder d;
    d.kind = spec.kind;
    d.n_sites = n_sites;
    d.seed = seed;

    Rng rng(seed_stream(seed, static_cast<std::uint64_t>(n_sites), StreamRole::disorder));

    if (spec.kind == ModelKind::sk_ising || spec.kind == ModelKind::sk_box) {
        d.couplings.assign(static_cast<std::size_t>(n_sites) * n_sites, 0.0);
        for (int i = 0; i < n_sites; ++i) {
            for (int j = i + 1; j < n_sites; ++j) {
                const double g = rng.normal();
                d.couplings[static_cast<std::size_t>(i) * n_sites + j] = g;
                d.couplings[static_cast<std::size_t>(j) * n_sites + i] = g;
            }
        }
    } else {
        d.m = spec.gardner_m(n_sites);
        d.gardner.resize(static_cast<std::size_t>(n_sites) * d.m);
        for (auto& g : d.gardner) g = rng.normal();
        if (spec.kind == ModelKind::st) {
            d.field_gaussians.resize(n_sites);
            for (auto& g : d.field_gaussians) g = rng.normal();
        }
    }
    return d;
}

SpinConfiguration random_configuration(const ModelSpec& spec, int n_sites, Rng& rng) {
    SpinConfiguration c;
    c.domain = domain_of(spec.kind);
    c.values.resize(n_sites);
    for (auto& x : c.values) {
        switch (c.domain) {
            case SpinDomain::pm_one: x = (rng.next_u64() & 1u) ? 1.0 : -1.0; break;
            case SpinDomain::box: x = 2.0 * rng.uniform() - 1.0; break;
            case SpinDomain::real: x = rng.normal(); break;
        }
    }
    return c;
}

namespace {

void check_config(const ModelSpec& spec, const Disorder& disorder, const SpinConfiguration& config) {
    if (config.domain != domain_of(spec.kind)) throw std::invalid_argument("config domain does not match model kind");
    if (static_cast<int>(config.values.size()) != disorder.n_sites)
        throw std::invalid_argument("config dimension does not match disorder");
    if (disorder.kind != spec.kind) throw std::invalid_argument("disorder kind does not match spec");
}

double sk_interaction(const ModelSpec& spec, const Disorder& d, std::span<const double> x) {
    const int n = d.n_sites;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double* row = d.couplings.data() + static_cast<std::size_t>(i) * n;
        double s = 0.0;
        for (int j = i + 1; j < n; ++j) s += row[j] * x[j];
        acc += x[i] * s;
    }
    return spec.beta / std::sqrt(static_cast<double>(n)) * acc;
}

} // namespace

void gardner_fields(const Disorder& d, std::span<const double> x, std::vector<double>& s_out) {
    const int n = d.n_sites, m = d.m;
    s_out.assign(m, 0.0);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; ++i) {
        const double xi = x[i];
        const double* row = d.gardner.data() + static_cast<std::size_t>(i) * m;
        for (int mm = 0; mm < m; ++mm) s_out[mm] += xi * row[mm];
    }
    for (auto& s : s_out) s *= inv_sqrt_n;
}

double energy(const ModelSpec& spec, const Disorder& disorder, const SpinConfiguration& config) {
    check_config(spec, disorder, config);
    const int n = disorder.n_sites;
    std::span<const double> x(config.values);

    switch (spec.kind) {
        case ModelKind::sk_ising: {
            double field = 0.0;
            for (double xi : x) field += xi;
            return sk_interaction(spec, disorder, x) + spec.h * field;
        }
        case ModelKind::sk_box:
            return sk_interaction(spec, disorder, x);
        case ModelKind::perceptron: {
            std::vector<double> s;
            gardner_fields(disorder, x, s);
            double acc = 0.0;
            for (double sm : s) acc += spec.u(sm);
            return acc;
        }
        case ModelKind::st: {
            std::vector<double> s;
            gardner_fields(disorder, x, s);
            double acc = 0.0;
            for (double sm : s) acc += spec.u(sm);
            double norm2 = 0.0, field = 0.0;
            for (int i = 0; i < n; ++i) {
                norm2 += x[i] * x[i];
                field += disorder.field_gaussians[i] * x[i];
            }
            return acc - spec.kappa * norm2 + spec.h * field;
        }
    }
    return 0.0;
}

double log_weight(const ModelSpec& spec, const Disorder& disorder, const SpinConfiguration& config) {
    double lw = energy(spec, disorder, config);
    if (spec.kind == ModelKind::sk_box) {
        double field = 0.0;
        for (double xi : config.values) field += xi;
        lw += spec.h * field;
    }
    return lw;
}

} // namespace glasslab
