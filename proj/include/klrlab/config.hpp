#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "klrlab/distribution.hpp"
#include "klrlab/rng.hpp"

namespace klrlab {

/// Scenario definition read from a config file.
///
/// File format: `key = value` lines, `#` comments, and `[spec1]` / `[spec2]`
/// sections holding one distribution record each:
///
///     scenario = theorem2_component
///     n = 3
///     seed_root = 7
///     [spec1]
///     kind = laplace
///     mean = 0
///     scale = 1
///     gauss_component_variance = 1
///
/// Mixture records use `weights = 0.5, 0.5` and
/// `components = gaussian(mean=-1, variance=1); laplace(mean=1, scale=0.5)`.
/// Keys outside the scenario's schema are errors.
struct ExperimentConfig {
    std::string scenario;
    std::optional<DistributionSpec> spec1;
    std::optional<DistributionSpec> spec2;
    double a = 1.0;
    double b = 1.0;
    std::size_t n = 3;
    std::size_t N = 20000;
    std::size_t k = 0;
    std::size_t B = 200;
    double epsilon = 2.0;
    std::size_t grid_points = 201;
    Seed seed{1, 0};
    std::string output_dir = "klrlab_out";

    std::vector<double> alphas;
    std::optional<double> c;
    std::size_t tuples = 1000;
    double tolerance = 0.0;
    double trim = 0.9;
    std::size_t conditioning_points = 101;
    std::string source = "exact";
    std::string x_path;
    std::string y_path;
};

struct ParamInfo {
    std::string key;
    std::string type;  // int | real | text | spec | list
    std::string description;
};

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::string expected_verdict;  // outcome the characterization predicts for the defaults
    std::vector<ParamInfo> params;
};

const std::vector<ScenarioInfo>& scenario_catalog();

const ScenarioInfo& scenario_info(std::string_view name);

/// Config for `name` with its documented defaults filled in.
ExperimentConfig default_config(std::string_view name);

ExperimentConfig parse_config(std::string_view text);

ExperimentConfig load_config(const std::string& path);

/// Inverse of parse_config for every key in the scenario's schema.
std::string render_config(const ExperimentConfig& config);

/// Inline record syntax `kind(key=value, ...)`, also used inside mixtures.
DistributionSpec parse_spec_expression(std::string_view text);

std::string render_spec_expression(const DistributionSpec& spec);

}  // namespace klrlab
