#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "glasslab/model.hpp"
#include "glasslab/sampler.hpp"
#include "glasslab/verify.hpp"

namespace glasslab::cli {

enum class ExperimentKind { rs_solve, li_sweep, concentration, decompose_gap, projection };
std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& s);

// Parsed, range-checked experiment description. All numeric fields are
// validated at parse time with line-addressed messages.
struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::rs_solve;
    ModelSpec model;
    std::vector<int> n_grid = {12};
    int k = 2;
    int p = 1;
    int n_disorders = 100;
    verify::Backend backend = verify::Backend::auto_select;
    mcmc::ChainConfig chain;
    int quadrature_order = 61;
    std::uint64_t master_seed = 1;
    std::string out_dir = "out";
    verify::MarginalForm form = verify::MarginalForm::partial;
    int workers = 0; // 0: GLASSLAB_WORKERS env or hardware
    std::vector<std::string> battery = {"tanh", "cos_half", "cos_1", "cos_2", "clipped_quad"};
    std::string raw_text; // canonicalized key=value lines (for hashing)
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parses the `key = value` format ('#' comments, blank lines ignored).
// Throws ConfigError with "line N: ..." messages.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Stable 64-bit hash of the canonicalized config (sorted key=value lines).
std::string config_hash(const ExperimentConfig& config);

// Model spec serialization in the same key=value format.
std::string model_to_config_text(const ModelSpec& spec);

} // namespace glasslab::cli
