#pragma once

#include <string>

#include "glasslab/config.hpp"

namespace glasslab::cli {

inline constexpr const char* kToolVersion = "glasslab 0.1.0";

struct RunResult {
    int exit_code = 0;
    std::string message;
};

// Dispatches an experiment: validates, runs the module pipeline, and writes
// manifest.json, records.jsonl, summary.csv and per-result JSON files into
// config.out_dir. Per-disorder records are appended as they complete, and a
// rerun with the same config hash skips completed indices.
RunResult run(const ExperimentConfig& config);

} // namespace glasslab::cli
