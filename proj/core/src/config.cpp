#include "glasslab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "glasslab/rng.hpp"

namespace glasslab::cli {

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::rs_solve: return "rs-solve";
        case ExperimentKind::li_sweep: return "li-sweep";
        case ExperimentKind::concentration: return "concentration";
        case ExperimentKind::decompose_gap: return "decompose-gap";
        case ExperimentKind::projection: return "projection";
    }
    return "?";
}

ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "rs-solve") return ExperimentKind::rs_solve;
    if (s == "li-sweep") return ExperimentKind::li_sweep;
    if (s == "concentration") return ExperimentKind::concentration;
    if (s == "decompose-gap") return ExperimentKind::decompose_gap;
    if (s == "projection") return ExperimentKind::projection;
    throw ConfigError("unknown experiment kind: " + s);
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

class Fields {
  public:
    explicit Fields(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected `key = value`");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            if (entries_.count(key))
                throw ConfigError("line " + std::to_string(lineno) + ": duplicate key `" + key + "`");
            entries_[key] = Entry{value, lineno, false};
        }
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        return it->second.value;
    }

    template <class Parse>
    auto numeric(const std::string& key, Parse parse, decltype(parse("", 0)) fallback) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        it->second.used = true;
        return parse(it->second.value, it->second.line);
    }

    int line_of(const std::string& key) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    void reject_unknown() const {
        for (const auto& [key, entry] : entries_) {
            if (!entry.used)
                throw ConfigError("line " + std::to_string(entry.line) + ": unknown key `" + key + "`");
        }
    }

    std::string canonical() const {
        std::vector<std::string> lines;
        for (const auto& [key, entry] : entries_) lines.push_back(key + " = " + entry.value);
        std::sort(lines.begin(), lines.end());
        std::string out;
        for (const auto& l : lines) out += l + "\n";
        return out;
    }

  private:
    std::map<std::string, Entry> entries_;
};

double parse_double(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": not a number: `" + v + "`");
    }
}

long long parse_int(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": not an integer: `" + v + "`");
    }
}

std::uint64_t parse_u64(const std::string& v, int line) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError("line " + std::to_string(line) + ": not an unsigned integer: `" + v + "`");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    Fields fields(text);
    ExperimentConfig cfg;

    cfg.experiment = experiment_from_string(fields.str("experiment", "rs-solve"));
    cfg.model.kind = model_kind_from_string(fields.str("model", "sk_ising"));
    cfg.model.beta = fields.numeric("beta", parse_double, 0.3);
    cfg.model.h = fields.numeric("h", parse_double, 0.0);
    cfg.model.kappa = fields.numeric("kappa", parse_double, 1.0);
    cfg.model.alpha = fields.numeric("alpha", parse_double, 0.5);
    cfg.model.m_override = static_cast<int>(fields.numeric("M", parse_int, 0LL));

    const std::string pot = fields.str("potential", "zero");
    const double pa = fields.numeric("potential_a", parse_double, 1.0);
    const double pb = fields.numeric("potential_b", parse_double, 1.0);
    try {
        cfg.model.u = make_potential(pot, pa, pb);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("line ") + std::to_string(fields.line_of("potential")) + ": " + e.what());
    }

    if (fields.has("N")) {
        cfg.n_grid.clear();
        const int line = fields.line_of("N");
        for (const auto& item : split_list(fields.str("N", ""))) {
            const long long n = parse_int(item, line);
            if (n < 2 || n > 4096) throw ConfigError("line " + std::to_string(line) + ": N out of range [2,4096]");
            cfg.n_grid.push_back(static_cast<int>(n));
        }
        if (cfg.n_grid.empty()) throw ConfigError("line " + std::to_string(line) + ": empty N grid");
    }

    cfg.k = static_cast<int>(fields.numeric("k", parse_int, 2LL));
    cfg.p = static_cast<int>(fields.numeric("p", parse_int, 1LL));
    cfg.n_disorders = static_cast<int>(fields.numeric("n_disorders", parse_int, 100LL));
    cfg.backend = verify::backend_from_string(fields.str("backend", "auto"));
    cfg.form = verify::form_from_string(fields.str("form", "partial"));
    cfg.quadrature_order = static_cast<int>(fields.numeric("quadrature_order", parse_int, 61LL));
    cfg.master_seed = fields.numeric("master_seed", parse_u64, std::uint64_t{1});
    cfg.out_dir = fields.str("out", "out");
    cfg.workers = static_cast<int>(fields.numeric("workers", parse_int, 0LL));

    cfg.chain.n_sweeps = static_cast<int>(fields.numeric("sweeps", parse_int, 20000LL));
    cfg.chain.burn_in = static_cast<int>(fields.numeric("burn_in", parse_int, 2000LL));
    cfg.chain.thin = static_cast<int>(fields.numeric("thin", parse_int, 1LL));
    cfg.chain.proposal_std = fields.numeric("proposal_std", parse_double, 1.0);

    if (fields.has("battery")) cfg.battery = split_list(fields.str("battery", ""));

    fields.reject_unknown();

    // Range checks, addressed to the offending line where one exists.
    auto fail = [&](const std::string& key, const std::string& msg) {
        const int line = fields.line_of(key);
        throw ConfigError((line ? "line " + std::to_string(line) + ": " : "") + msg);
    };
    if (cfg.model.kind == ModelKind::sk_ising || cfg.model.kind == ModelKind::sk_box) {
        if (cfg.model.beta <= 0.0) fail("beta", "beta must be > 0");
    }
    if (cfg.model.kind == ModelKind::st && cfg.model.kappa <= 0.0) fail("kappa", "kappa must be > 0");
    if (is_gardner(cfg.model.kind) && cfg.model.alpha <= 0.0 && cfg.model.m_override <= 0)
        fail("alpha", "alpha must be > 0 (or set M)");
    if (cfg.k < 1 || cfg.k > 4) fail("k", "k must be in [1,4]");
    if (cfg.p < 1 || cfg.p > 4) fail("p", "p must be in [1,4]");
    if (cfg.n_disorders < 2) fail("n_disorders", "n_disorders must be >= 2");
    if (cfg.quadrature_order < 3 || cfg.quadrature_order > 401)
        fail("quadrature_order", "quadrature_order must be in [3,401]");
    if (cfg.chain.thin < 1) fail("thin", "thin must be >= 1");
    if (cfg.chain.burn_in < 0 || cfg.chain.burn_in >= cfg.chain.n_sweeps)
        fail("burn_in", "need 0 <= burn_in < sweeps");
    if (cfg.chain.proposal_std <= 0.0) fail("proposal_std", "proposal_std must be > 0");
    if (cfg.workers < 0) fail("workers", "workers must be >= 0");
    for (int n : cfg.n_grid)
        if (cfg.k >= n) fail("N", "k must be smaller than every N");

    cfg.raw_text = fields.canonical();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0x6c62272e07bb0142ULL;
    for (char c : cfg.raw_text) h = mix64(h ^ static_cast<unsigned char>(c));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string model_to_config_text(const ModelSpec& spec) {
    std::ostringstream out;
    out << "model = " << to_string(spec.kind) << "\n";
    switch (spec.kind) {
        case ModelKind::sk_ising:
        case ModelKind::sk_box:
            out << "beta = " << spec.beta << "\n";
            out << "h = " << spec.h << "\n";
            break;
        case ModelKind::perceptron:
        case ModelKind::st:
            if (spec.m_override > 0)
                out << "M = " << spec.m_override << "\n";
            else
                out << "alpha = " << spec.alpha << "\n";
            if (spec.kind == ModelKind::st) {
                out << "kappa = " << spec.kappa << "\n";
                out << "h = " << spec.h << "\n";
            }
            out << "potential = " << spec.u.name.substr(0, spec.u.name.find('(')) << "\n";
            break;
    }
    return out.str();
}

} // namespace glasslab::cli
