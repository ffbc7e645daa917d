#include "glasslab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "glasslab/serialize.hpp"

namespace glasslab::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// records.jsonl sink: one line per completed disorder, single writer.
class RecordLog {
  public:
    RecordLog(const fs::path& path, const std::string& experiment,
              const std::vector<std::string>& stat_names)
        : experiment_(experiment), stat_names_(stat_names) {
        // Load existing lines for resume before reopening in append mode.
        if (fs::exists(path)) {
            std::ifstream in(path);
            std::string line;
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                json j = json::parse(line, nullptr, false);
                if (j.is_discarded() || j.value("experiment", "") != experiment_) continue;
                const int n = j.value("N", 0);
                const std::uint64_t idx = j.value("index", std::uint64_t{0});
                std::vector<double> stats;
                for (const auto& name : stat_names_) {
                    if (!j["stats"].contains(name)) {
                        stats.clear();
                        break;
                    }
                    stats.push_back(j["stats"][name].get<double>());
                }
                if (!stats.empty()) resumed_[n][idx] = std::move(stats);
            }
        }
        out_.open(path, std::ios::app);
        if (!out_) throw std::runtime_error("cannot open " + path.string());
    }

    const std::map<std::uint64_t, std::vector<double>>* resume_for(int n) const {
        auto it = resumed_.find(n);
        return it == resumed_.end() ? nullptr : &it->second;
    }

    void append(int n, std::uint64_t index, std::uint64_t seed, const std::vector<double>& stats) {
        json j;
        j["experiment"] = experiment_;
        j["N"] = n;
        j["index"] = index;
        j["seed"] = seed;
        json s;
        for (std::size_t i = 0; i < stats.size() && i < stat_names_.size(); ++i) s[stat_names_[i]] = stats[i];
        j["stats"] = s;
        std::lock_guard<std::mutex> lock(mutex_);
        out_ << j.dump() << "\n";
        out_.flush();
        ++written_;
    }

    std::size_t written() const { return written_; }
    std::size_t resumed_count() const {
        std::size_t c = 0;
        for (const auto& [n, m] : resumed_) c += m.size();
        return c;
    }

  private:
    std::string experiment_;
    std::vector<std::string> stat_names_;
    std::map<int, std::map<std::uint64_t, std::vector<double>>> resumed_;
    std::ofstream out_;
    std::mutex mutex_;
    std::size_t written_ = 0;
};

struct SummaryWriter {
    std::vector<std::string> rows;
    void add(const ModelSpec& model, int n, int k, int p, const std::string& form, int n_dis,
             const std::string& stat, double value, double se, std::uint64_t seed) {
        rows.push_back(io::summary_csv_row(to_string(model.kind), n, k, p, form, n_dis, stat, value, se, seed));
    }
    void write(const fs::path& path) const {
        std::ofstream out(path);
        out << io::summary_csv_header() << "\n";
        for (const auto& row : rows) out << row << "\n";
    }
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    out << j.dump(2) << "\n";
}

std::vector<verify::ProjectionFunction> battery_from_names(const std::vector<std::string>& names) {
    const auto all = verify::default_battery();
    std::vector<verify::ProjectionFunction> out;
    for (const auto& name : names) {
        bool found = false;
        for (const auto& fn : all) {
            if (fn.name == name) {
                out.push_back(fn);
                found = true;
                break;
            }
        }
        if (name == "const") {
            verify::ProjectionFunction c{"const", [](double) { return 1.0; }, true};
            out.push_back(c);
            found = true;
        }
        if (!found) throw ConfigError("unknown projection test function: " + name);
    }
    if (out.empty()) throw ConfigError("empty projection battery");
    return out;
}

} // namespace

RunResult run(const ExperimentConfig& cfg) {
    // Validate everything that can fail before touching the filesystem.
    const int max_n = *std::max_element(cfg.n_grid.begin(), cfg.n_grid.end());
    SpecCheck check = validate_spec(cfg.model, max_n);
    if (!check.ok()) return {1, "invalid model spec: " + check.errors.front()};
    std::vector<verify::ProjectionFunction> battery;
    if (cfg.experiment == ExperimentKind::projection) battery = battery_from_names(cfg.battery);
    const verify::Backend backend = verify::resolve_backend(cfg.backend, cfg.model.kind, max_n);
    if (backend == verify::Backend::exact &&
        (!is_pm_one(cfg.model.kind) || max_n > exact::kMaxEnumerationSites))
        return {1, "exact backend infeasible for this model/N"};
    if (cfg.experiment == ExperimentKind::decompose_gap && !is_pm_one(cfg.model.kind))
        return {1, "decompose-gap requires a +-1 model kind"};

    const std::string hash = config_hash(cfg);
    const fs::path out_dir(cfg.out_dir);
    const fs::path manifest_path = out_dir / "manifest.json";
    fs::create_directories(out_dir);

    // Refuse to mix runs of different configs in one directory.
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        json prev = json::parse(in, nullptr, false);
        if (prev.is_discarded() || prev.value("config_hash", "") != hash)
            return {1, "output directory holds a different run (config hash mismatch)"};
    }

    json manifest;
    manifest["schema"] = "manifest/1";
    manifest["tool_version"] = kToolVersion;
    manifest["experiment"] = to_string(cfg.experiment);
    manifest["config_hash"] = hash;
    manifest["config"] = cfg.raw_text;
    manifest["started_at"] = iso_now();
    manifest["master_seed"] = cfg.master_seed;
    for (const auto& w : check.warnings) manifest["warnings"].push_back(w);

    SummaryWriter summary;
    std::vector<std::string> artifacts = {"summary.csv"};
    json failures = json::array();

    try {
        switch (cfg.experiment) {
            case ExperimentKind::rs_solve: {
                const rs::Quadrature quad = rs::make_quadrature(cfg.quadrature_order);
                rs::RsProblem problem;
                switch (cfg.model.kind) {
                    case ModelKind::sk_ising: problem = rs::sk_problem(cfg.model.beta, cfg.model.h); break;
                    case ModelKind::sk_box: problem = rs::sk_box_problem(cfg.model.beta, cfg.model.h); break;
                    case ModelKind::perceptron:
                        problem = rs::perceptron_problem(cfg.model.alpha, cfg.model.u, 1.0);
                        break;
                    case ModelKind::st:
                        problem = rs::st_problem(cfg.model.alpha, cfg.model.u, cfg.model.kappa, cfg.model.h, 1.0);
                        break;
                }
                const rs::RSSolution sol = rs::solve(problem, quad);
                const double res = rs::residual(problem, sol, quad);
                json j = io::to_json(sol);
                j["residual_doubled_quadrature"] = res;
                write_json(out_dir / "rs_solution.json", j);
                artifacts.push_back("rs_solution.json");
                const int n0 = cfg.n_grid.front();
                auto row = [&](const std::string& stat, double v) {
                    if (!std::isnan(v)) summary.add(cfg.model, n0, cfg.k, cfg.p, "-", 0, stat, v, 0.0, cfg.master_seed);
                };
                row("q", sol.q);
                row("rho", sol.rho);
                row("r", sol.r);
                row("tau", sol.tau);
                row("sigma", sol.sigma);
                row("V2", sol.v2);
                row("residual_inf", sol.residual_inf);
                row("residual_doubled_quadrature", res);
                if (!sol.converged) throw std::runtime_error("RS solver did not converge");
                break;
            }
            case ExperimentKind::li_sweep: {
                verify::SweepSettings settings;
                settings.backend = cfg.backend;
                settings.chain = cfg.chain;
                settings.workers = cfg.workers;
                settings.quad_order = cfg.quadrature_order;
                const std::vector<std::string> names =
                    backend == verify::Backend::exact
                        ? std::vector<std::string>{"tv2p", "tv", "r12_mean", "r12_sq", "cavity_field_1"}
                        : std::vector<std::string>{"tv2p", "tv", "ks", "r12_mean", "r12_sq", "r11_mean",
                                                   "r11_sq", "aux_overlap", "aux_norm", "x4", "x8"};
                RecordLog log(out_dir / "records.jsonl", to_string(cfg.experiment), names);
                artifacts.push_back("records.jsonl");
                settings.record_sink = [&](int n, std::uint64_t idx, const std::vector<double>& rec) {
                    log.append(n, idx, mcmc::disorder_seed(cfg.master_seed, idx), rec);
                };
                settings.resume_source = [&](int n) { return log.resume_for(n); };

                const auto result = verify::li_sweep(cfg.model, cfg.n_grid, cfg.k, cfg.p, cfg.n_disorders,
                                                     cfg.form, cfg.master_seed, settings);
                for (std::size_t i = 0; i < result.reports.size(); ++i) {
                    const auto& rep = result.reports[i];
                    const std::string name = "li_report_N" + std::to_string(rep.n_sites) + ".json";
                    write_json(out_dir / name, io::to_json(rep));
                    artifacts.push_back(name);
                    const std::string form = verify::to_string(rep.form);
                    summary.add(cfg.model, rep.n_sites, cfg.k, cfg.p, form, rep.n_disorders, "tv_moment_2p",
                                rep.tv_moment_2p, rep.tv_moment_se, cfg.master_seed);
                    summary.add(cfg.model, rep.n_sites, cfg.k, cfg.p, form, rep.n_disorders, "tv_mean",
                                rep.tv_mean, rep.tv_se, cfg.master_seed);
                    summary.add(cfg.model, rep.n_sites, cfg.k, cfg.p, form, rep.n_disorders, "var_r12",
                                rep.var_r12, rep.var_r12_se, cfg.master_seed);
                    if (backend == verify::Backend::mcmc) {
                        summary.add(cfg.model, rep.n_sites, cfg.k, cfg.p, form, rep.n_disorders, "ks_mean",
                                    rep.ks_mean, rep.ks_se, cfg.master_seed);
                        summary.add(cfg.model, rep.n_sites, cfg.k, cfg.p, form, rep.n_disorders, "var_r11",
                                    rep.var_r11, rep.var_r11_se, cfg.master_seed);
                    }
                    for (const auto& f : result.per_n[i].failed_indices) failures.push_back(f);
                }
                if (result.reports.size() >= 2)
                    summary.add(cfg.model, max_n, cfg.k, cfg.p, verify::to_string(cfg.form), cfg.n_disorders,
                                "tv2p_loglog_slope", result.slope.slope, result.slope.se, cfg.master_seed);
                break;
            }
            case ExperimentKind::concentration: {
                verify::SweepSettings settings;
                settings.backend = cfg.backend;
                settings.chain = cfg.chain;
                settings.workers = cfg.workers;
                settings.quad_order = cfg.quadrature_order;
                const std::vector<std::string> names =
                    backend == verify::Backend::exact
                        ? std::vector<std::string>{"r12", "r12sq", "aux_ov", "aux_ovsq", "aux_nm", "aux_nmsq"}
                        : std::vector<std::string>{"r12", "r12sq", "r11", "r11sq", "aux_ov", "aux_ovsq",
                                                   "aux_nm", "aux_nmsq", "x4", "x8"};
                RecordLog log(out_dir / "records.jsonl", to_string(cfg.experiment), names);
                artifacts.push_back("records.jsonl");
                for (int n : cfg.n_grid) {
                    mcmc::SweepHooks hooks;
                    hooks.on_record = [&, n](std::uint64_t idx, const std::vector<double>& rec) {
                        log.append(n, idx, mcmc::disorder_seed(cfg.master_seed, idx), rec);
                    };
                    hooks.precomputed = log.resume_for(n);
                    const auto rep = verify::concentration_stats(cfg.model, n, cfg.n_disorders,
                                                                 cfg.master_seed, settings, hooks);
                    const std::string name = "concentration_N" + std::to_string(n) + ".json";
                    write_json(out_dir / name, io::to_json(rep));
                    artifacts.push_back(name);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "var_r12", rep.var_r12,
                                rep.var_r12_se, cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "var_r11", rep.var_r11,
                                rep.var_r11_se, cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "var_aux_overlap",
                                rep.var_aux_overlap, rep.var_aux_overlap_se, cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "var_aux_norm",
                                rep.var_aux_norm, rep.var_aux_norm_se, cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "S_N", rep.s_n, 0.0,
                                cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "T_N", rep.t_n, 0.0,
                                cfg.master_seed);
                }
                break;
            }
            case ExperimentKind::decompose_gap: {
                std::vector<verify::GapReport> reports;
                RecordLog log(out_dir / "records.jsonl", to_string(cfg.experiment), {"gap2p", "tv"});
                artifacts.push_back("records.jsonl");
                for (int n : cfg.n_grid) {
                    mcmc::SweepHooks hooks;
                    hooks.on_record = [&, n](std::uint64_t idx, const std::vector<double>& rec) {
                        log.append(n, idx, mcmc::disorder_seed(cfg.master_seed, idx), rec);
                    };
                    hooks.precomputed = log.resume_for(n);
                    auto rep = verify::decomposition_gap(cfg.model, n, cfg.k, cfg.p, cfg.n_disorders,
                                                         cfg.master_seed, cfg.workers, hooks);
                    const std::string name = "gap_N" + std::to_string(n) + ".json";
                    write_json(out_dir / name, io::to_json(rep));
                    artifacts.push_back(name);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "gap_2p", rep.gap,
                                rep.gap_se, cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "gap_tv_mean", rep.tv_mean,
                                0.0, cfg.master_seed);
                    reports.push_back(std::move(rep));
                }
                for (std::size_t i = 0; i < reports.size(); ++i)
                    for (std::size_t j = 0; j < reports.size(); ++j)
                        if (reports[j].n_sites == 2 * reports[i].n_sites && reports[i].gap > 0.0) {
                            const double ratio = reports[j].gap / reports[i].gap;
                            const double se =
                                std::abs(ratio) * std::sqrt(std::pow(reports[j].gap_se / reports[j].gap, 2) +
                                                            std::pow(reports[i].gap_se / reports[i].gap, 2));
                            summary.add(cfg.model, reports[j].n_sites, cfg.k, cfg.p, "-",
                                        reports[j].n_disorders,
                                        "gap_ratio_vs_N" + std::to_string(reports[i].n_sites), ratio, se,
                                        cfg.master_seed);
                        }
                break;
            }
            case ExperimentKind::projection: {
                std::vector<std::string> names;
                for (const auto& fn : battery) names.push_back("msd1_" + fn.name);
                for (const auto& fn : battery) names.push_back("msd2_" + fn.name);
                names.insert(names.end(), {"r12", "r12sq", "r11", "r11sq"});
                RecordLog log(out_dir / "records.jsonl", to_string(cfg.experiment), names);
                artifacts.push_back("records.jsonl");
                for (int n : cfg.n_grid) {
                    mcmc::SweepHooks hooks;
                    hooks.on_record = [&, n](std::uint64_t idx, const std::vector<double>& rec) {
                        log.append(n, idx, mcmc::disorder_seed(cfg.master_seed, idx), rec);
                    };
                    hooks.precomputed = log.resume_for(n);
                    const auto rep = verify::projection_test(cfg.model, n, cfg.k, battery, cfg.n_disorders,
                                                             cfg.master_seed, cfg.workers,
                                                             cfg.quadrature_order, hooks);
                    const std::string name = "projection_N" + std::to_string(n) + ".json";
                    write_json(out_dir / name, io::to_json(rep));
                    artifacts.push_back(name);
                    for (std::size_t f = 0; f < rep.fn_names.size(); ++f) {
                        summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders,
                                    "msd_partial_" + rep.fn_names[f], rep.msd_partial[f],
                                    rep.msd_partial_se[f], cfg.master_seed);
                        summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders,
                                    "msd_limiting_" + rep.fn_names[f], rep.msd_limiting[f],
                                    rep.msd_limiting_se[f], cfg.master_seed);
                    }
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "d1", rep.d1, 0.0,
                                cfg.master_seed);
                    summary.add(cfg.model, n, cfg.k, cfg.p, "-", rep.n_disorders, "d2", rep.d2, 0.0,
                                cfg.master_seed);
                }
                break;
            }
        }
    } catch (const std::exception& e) {
        manifest["finished_at"] = iso_now();
        manifest["error"] = e.what();
        write_json(manifest_path, manifest);
        return {1, e.what()};
    }

    summary.write(out_dir / "summary.csv");
    manifest["failures"] = failures;
    manifest["artifacts"] = artifacts;
    for (const auto& name : artifacts) {
        if (name == "records.jsonl") {
            std::size_t count = 0;
            std::ifstream rin(out_dir / "records.jsonl");
            std::string line;
            while (std::getline(rin, line))
                if (!line.empty()) ++count;
            manifest["records"] = {{"file", "records.jsonl"}, {"count", count}};
        }
    }
    manifest["finished_at"] = iso_now();
    write_json(manifest_path, manifest);

    if (!failures.empty() &&
        10 * failures.size() > static_cast<std::size_t>(cfg.n_disorders) * cfg.n_grid.size())
        return {1, "more than 10% of disorders failed"};
    return {0, "ok"};
}

} // namespace glasslab::cli
