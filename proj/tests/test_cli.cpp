#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "glasslab/experiment.hpp"
#include "glasslab/serialize.hpp"

using namespace glasslab;
using namespace glasslab::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "glasslab_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("config parsing: defaults, lists, comments") {
    const auto cfg = parse_config_text(
        "# demo\n"
        "experiment = li-sweep\n"
        "model = sk_ising\n"
        "beta = 0.25\n"
        "h = 0.3\n"
        "N = 8, 12, 16\n"
        "k = 2\n"
        "n_disorders = 10\n"
        "master_seed = 42\n");
    CHECK(cfg.experiment == ExperimentKind::li_sweep);
    CHECK(cfg.model.beta == 0.25);
    CHECK(cfg.n_grid == std::vector<int>{8, 12, 16});
    CHECK(cfg.master_seed == 42);
    CHECK(cfg.p == 1);
    CHECK(cfg.quadrature_order == 61);
}

TEST_CASE("config errors carry line numbers and reject bad values") {
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = li-sweep\nbeta = frog\n"),
                         doctest::Contains("line 2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = li-sweep\nmodel = sk_ising\nbeta = -0.5\n"),
                         doctest::Contains("beta"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("unknown_key = 3\n"), doctest::Contains("unknown key"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config_text("experiment = li-sweep\nk = 7\n"), doctest::Contains("k"),
                         ConfigError);
    CHECK_THROWS(parse_config_text("experiment = li-sweep\nN = 8\nk = 2\nburn_in = 50\nsweeps = 10\n"));
}

TEST_CASE("config hash is stable under reordering and comments") {
    const auto a = parse_config_text("experiment = rs-solve\nbeta = 0.3\nh = 0.5\n");
    const auto b = parse_config_text("h = 0.5\n# note\nbeta = 0.3\nexperiment = rs-solve\n");
    CHECK(config_hash(a) == config_hash(b));
    const auto c = parse_config_text("experiment = rs-solve\nbeta = 0.31\nh = 0.5\n");
    CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("disorder binary round trip is bit exact") {
    ModelSpec spec;
    spec.kind = ModelKind::st;
    spec.kappa = 2.0;
    spec.alpha = 0.5;
    spec.u = neg_softplus_potential(0.5, 1.0);
    const Disorder d = sample_disorder(spec, 24, 99);
    const auto dir = fresh_dir("disorder_io");
    const std::string path = (dir / "d.bin").string();
    io::save_disorder(d, path);
    const Disorder back = io::load_disorder(path);
    CHECK(back.kind == d.kind);
    CHECK(back.n_sites == d.n_sites);
    CHECK(back.m == d.m);
    CHECK(back.seed == d.seed);
    CHECK(back.gardner == d.gardner);
    CHECK(back.field_gaussians == d.field_gaussians);
}

TEST_CASE("rs-solve run writes artifacts and certifies") {
    const auto dir = fresh_dir("rs_solve");
    auto cfg = parse_config_text(
        "experiment = rs-solve\n"
        "model = sk_ising\n"
        "beta = 0.3\n"
        "h = 0.5\n");
    cfg.out_dir = dir.string();
    const RunResult result = run(cfg);
    CHECK(result.exit_code == 0);

    const auto sol = nlohmann::json::parse(slurp(dir / "rs_solution.json"));
    CHECK(sol["converged"].get<bool>());
    CHECK(sol["residual_inf"].get<double>() < 1e-10);
    CHECK(sol["residual_doubled_quadrature"].get<double>() < 1e-9);

    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["config_hash"] == config_hash(cfg));
    // Manifest completeness: every referenced artifact exists and parses.
    for (const auto& name : manifest["artifacts"]) {
        const fs::path artifact = dir / name.get<std::string>();
        CHECK(fs::exists(artifact));
        if (artifact.extension() == ".json")
            CHECK(!nlohmann::json::parse(slurp(artifact), nullptr, false).is_discarded());
    }
    CHECK(fs::exists(dir / "summary.csv"));
    const std::string csv = slurp(dir / "summary.csv");
    CHECK(csv.find("model,N,k,p,form,n_disorders,statistic,value,se,seed") == 0);
}

TEST_CASE("malformed config: nonzero exit, no partial artifacts") {
    const auto dir = fresh_dir("bad_cfg");
    CHECK_THROWS_AS((void)parse_config_text("experiment = rs-solve\nbeta = -1\n"), ConfigError);
    // Parse rejects before run() can create anything.
    CHECK(fs::is_empty(dir));
}

TEST_CASE("li-sweep run: determinism across reruns and worker counts") {
    auto make_cfg = [&](const fs::path& dir, int workers) {
        auto cfg = parse_config_text(
            "experiment = li-sweep\n"
            "model = sk_ising\n"
            "beta = 0.25\n"
            "h = 0.3\n"
            "N = 8, 10\n"
            "k = 2\n"
            "n_disorders = 12\n"
            "backend = exact\n"
            "form = partial\n"
            "master_seed = 7\n"
            "quadrature_order = 41\n");
        cfg.out_dir = dir.string();
        cfg.workers = workers;
        return cfg;
    };

    const auto d1 = fresh_dir("sweep_w1");
    const auto d2 = fresh_dir("sweep_w8");
    const auto d3 = fresh_dir("sweep_rerun");
    CHECK(run(make_cfg(d1, 1)).exit_code == 0);
    CHECK(run(make_cfg(d2, 8)).exit_code == 0);
    CHECK(run(make_cfg(d3, 1)).exit_code == 0);

    CHECK(slurp(d1 / "summary.csv") == slurp(d2 / "summary.csv"));
    CHECK(slurp(d1 / "summary.csv") == slurp(d3 / "summary.csv"));
    CHECK(slurp(d1 / "li_report_N8.json") == slurp(d2 / "li_report_N8.json"));
    CHECK(slurp(d1 / "li_report_N10.json") == slurp(d2 / "li_report_N10.json"));

    SUBCASE("records are resumable: rerun skips completed indices") {
        auto cfg = make_cfg(d1, 1);
        const std::string before = slurp(d1 / "records.jsonl");
        CHECK(run(cfg).exit_code == 0);
        const std::string after = slurp(d1 / "records.jsonl");
        CHECK(before == after); // nothing recomputed, nothing appended
        CHECK(slurp(d1 / "summary.csv") == slurp(d2 / "summary.csv"));
    }

    SUBCASE("a different config hash refuses to share the directory") {
        auto cfg2 = parse_config_text(
            "experiment = li-sweep\nmodel = sk_ising\nbeta = 0.25\nh = 0.3\nN = 8, 10\nk = 2\n"
            "n_disorders = 12\nbackend = exact\nform = partial\nmaster_seed = 8\nquadrature_order = 41\n");
        cfg2.out_dir = d1.string();
        cfg2.workers = 1;
        const RunResult refuse = run(cfg2);
        CHECK(refuse.exit_code != 0);
    }
}

TEST_CASE("records.jsonl lines carry index, seed and named stats") {
    const auto dir = fresh_dir("records_check");
    auto cfg = parse_config_text(
        "experiment = decompose-gap\n"
        "model = sk_ising\n"
        "beta = 0.3\n"
        "h = 0.4\n"
        "N = 8\n"
        "k = 2\n"
        "n_disorders = 6\n"
        "master_seed = 3\n");
    cfg.out_dir = dir.string();
    REQUIRE(run(cfg).exit_code == 0);
    std::ifstream in(dir / "records.jsonl");
    std::string line;
    int count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto j = nlohmann::json::parse(line);
        CHECK(j.contains("index"));
        CHECK(j.contains("seed"));
        CHECK(j["stats"].contains("gap2p"));
        ++count;
    }
    CHECK(count == 6);
}

TEST_CASE("exact summary and sample stats serialize to versioned JSON") {
    ModelSpec spec;
    spec.kind = ModelKind::sk_ising;
    spec.beta = 0.4;
    spec.h = 0.2;
    const Disorder d = sample_disorder(spec, 8, 5);
    exact::EnumerateOptions opt;
    opt.k = 2;
    opt.pair_corr = true;
    const auto summary = exact::enumerate(spec, d, opt);
    const auto j = io::to_json(summary, true);
    CHECK(j["schema"] == "exact_summary/1");
    CHECK(j["means"].size() == 8);
    CHECK(j["pair_corr"].size() == 64);
    CHECK(j["marginal"]["probs"].size() == 4);
    const auto no_pc = io::to_json(summary, false);
    CHECK(!no_pc.contains("pair_corr"));

    mcmc::ChainConfig cfg;
    cfg.n_sweeps = 500;
    cfg.burn_in = 100;
    cfg.seed = 77;
    const auto stats = mcmc::run_chain(spec, d, cfg, 2);
    const auto sj = io::to_json(stats, false);
    CHECK(sj["schema"] == "sample_stats/1");
    CHECK(sj["n_kept"] == stats.n_kept);

    const auto dir = fresh_dir("samples_csv");
    io::write_samples_csv(stats, (dir / "samples.csv").string());
    std::ifstream in(dir / "samples.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "x1,x2");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == stats.n_kept);
}
