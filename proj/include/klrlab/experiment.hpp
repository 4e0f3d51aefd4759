#pragma once

#include <cstddef>
#include <exception>
#include <string>
#include <vector>

#include "json.hpp"

#include "klrlab/config.hpp"

namespace klrlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Outcome of one scenario run. `report` is exactly what report.json holds.
struct RunReport {
    nlohmann::json report;
    int exit_code = 0;               // 0 pass, 1 reject
    std::vector<std::string> files;  // paths written, report.json last
};

/// Runs the pipeline mapped to config.scenario and writes report.json,
/// curves.csv and cf.csv (plus g.csv for cauchy_probe) into config.output_dir.
RunReport run_scenario(const ExperimentConfig& config);

struct IngestedSamples {
    std::vector<double> x;
    std::vector<double> y;
    double mean_x = 0.0;  // subtracted before returning
    double mean_y = 0.0;
};

/// One real per line; blank lines are skipped and U+2212 is read as a minus
/// sign. Throws IngestionError with the offending line number.
std::vector<double> read_sample_file(const std::string& path, std::size_t min_count = 100);

/// Both files parsed and centered.
IngestedSamples ingest_samples(const std::string& path_x, const std::string& path_y);

/// Catalog rendered for `klrlab catalog`.
nlohmann::json catalog_json();

/// Config values keyed by schema name, as echoed in reports.
nlohmann::json params_json(const ExperimentConfig& config);

/// Structured diagnostic for an exception escaping run_scenario.
nlohmann::json diagnostic_json(const std::exception& error);

}  // namespace klrlab
