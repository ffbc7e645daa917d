#pragma once

#include <string>

#include <json.hpp>

#include "glasslab/exact.hpp"
#include "glasslab/model.hpp"
#include "glasslab/rs.hpp"
#include "glasslab/sampler.hpp"
#include "glasslab/verify.hpp"

namespace glasslab::io {

using json = nlohmann::json;

json to_json(const rs::RSSolution& solution);
json to_json(const exact::ExactSummary& summary, bool include_pair_corr);
json to_json(const mcmc::SampleStats& stats, bool include_samples = false);
json to_json(const verify::LIReport& report);
json to_json(const verify::ConcentrationReport& report);
json to_json(const verify::GapReport& report, bool include_records = false);
json to_json(const verify::ProjectionReport& report);

// Raw thinned k-coordinate samples, one CSV row per kept sweep.
void write_samples_csv(const mcmc::SampleStats& stats, const std::string& path);

// Flat little-endian float64 block with a 32-byte header
// (magic "GLDISORD", kind, N, M, seed). Bit-exact round trip.
void save_disorder(const Disorder& disorder, const std::string& path);
Disorder load_disorder(const std::string& path);

// Fixed summary.csv header: model,N,k,p,form,n_disorders,statistic,value,se,seed
std::string summary_csv_header();
std::string summary_csv_row(const std::string& model, int n_sites, int k, int p, const std::string& form,
                            int n_disorders, const std::string& statistic, double value, double se,
                            std::uint64_t seed);

std::string format_double(double v);

} // namespace glasslab::io
