#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "klrlab/distribution.hpp"
#include "klrlab/knn.hpp"
#include "klrlab/rng.hpp"

namespace klrlab {

/// N replicates of (X_1..X_n, Y_1..Y_n), stored row-major as N x n matrices.
struct PairedSample {
    std::size_t n = 0;
    std::size_t replicates = 0;
    std::vector<double> x;
    std::vector<double> y;
    Seed seed{};

    std::span<const double> x_row(std::size_t r) const { return {x.data() + r * n, n}; }
    std::span<const double> y_row(std::size_t r) const { return {y.data() + r * n, n}; }
};

/// X entries are draws of spec1 on stream seed.derive(1), Y of spec2 on
/// seed.derive(2); entry (r, j) uses draw index r * n + j.
PairedSample draw_paired_sample(const DistributionSpec& spec1, const DistributionSpec& spec2, std::size_t n,
                                std::size_t replicates, const Seed& seed);

/// Cuts two external sample vectors into consecutive n-tuples (trailing values
/// that do not fill a tuple are dropped).
PairedSample paired_from_vectors(std::span<const double> x, std::span<const double> y, std::size_t n);

/// Z_j = x_j - mean(x) + y_j - mean(y).
std::vector<double> residual_features(std::span<const double> x_tuple, std::span<const double> y_tuple);

/// Coordinates of a zero-sum vector in the Helmert basis of {sum z = 0};
/// the Euclidean norm is preserved. Throws NotOnHyperplane if |sum z| > 1e-8.
std::vector<double> project_zero_sum(std::span<const double> z);

struct ResidualFeatures {
    std::size_t n = 0;
    std::vector<double> z;  // N x n
    std::vector<double> w;  // N x (n - 1)

    FeatureMatrix features() const { return {w, n - 1}; }
};

ResidualFeatures residual_features(const PairedSample& sample);

double target_statistic(std::span<const double> x_tuple, std::span<const double> y_tuple, double a, double b);

std::vector<double> targets(const PairedSample& sample, double a, double b);

/// Var(fitted) / Var(targets), both with 1/N normalisation. Throws
/// DegenerateTargets when the targets are constant.
double constancy_statistic(std::span<const double> fitted, std::span<const double> targets);

struct NullBand {
    double q90 = 0.0;
    double q95 = 0.0;
    double q99 = 0.0;
    bool degenerate = false;
};

/// Quantiles of the constancy statistic over B random target permutations.
/// Permutation b is a Fisher-Yates shuffle driven by draw index b of `seed`.
NullBand permutation_null(const NeighborTable& neighbors, std::span<const double> targets, std::size_t B,
                          const Seed& seed);

NullBand permutation_null(const FeatureMatrix& features, std::span<const double> targets, std::size_t k,
                          std::size_t B, const Seed& seed);

enum class Verdict { Pass, Reject };

std::string to_string(Verdict v);

struct ConstancyReport {
    double statistic = 0.0;
    NullBand null{};
    Verdict verdict = Verdict::Pass;
    std::size_t replicates = 0;
    std::size_t n = 0;
    double a = 0.0;
    double b = 0.0;
    std::size_t k = 0;
    std::size_t permutations = 0;
    double bandwidth = 0.0;
    Seed seed{};
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const ConstancyReport& report);

struct KlrParams {
    double a = 1.0;
    double b = 1.0;
    std::size_t n = 3;
    std::size_t replicates = 20000;
    std::size_t k = 0;  // 0 selects ceil(sqrt(N))
    std::size_t permutations = 200;
};

std::size_t default_k(std::size_t replicates);

/// Tests E{a Xbar + b Ybar | Z} = const: kNN regression of the target on the
/// Helmert coordinates of the residual vector, calibrated by permutation.
ConstancyReport klr_test(const DistributionSpec& spec1, const DistributionSpec& spec2, const KlrParams& params,
                         const Seed& seed);

ConstancyReport klr_test(const PairedSample& sample, const KlrParams& params, const Seed& seed);

/// Unbiased sample variance (divisor n - 1).
double sample_variance(std::span<const double> tuple);

struct LukacsParams {
    std::size_t n = 4;
    std::size_t replicates = 20000;
    std::size_t permutations = 200;
};

/// Tests E{s^2 | Xbar} = const with a Silverman-bandwidth Gaussian kernel
/// smoother and the same permutation calibration as klr_test.
ConstancyReport lukacs_check(const DistributionSpec& spec, const LukacsParams& params, const Seed& seed);

/// Same check on the X matrix of an existing sample.
ConstancyReport lukacs_check(const PairedSample& sample, std::size_t permutations, const Seed& seed);

struct VarianceRegressionReport {
    std::vector<double> grid;
    std::vector<double> curve_x;
    std::vector<double> curve_y;
    /// Pointwise standard error of curve_x - curve_y.
    std::vector<double> standard_error;
    double c_hat = 0.0;
    double max_deviation = 0.0;
    double max_standardized_deviation = 0.0;
    double bandwidth = 0.0;
    double band_width_se = 3.0;
    bool passed = false;
    std::size_t n = 0;
    std::size_t replicates = 0;
    Seed seed{};
    std::vector<std::string> warnings;
};

nlohmann::json to_json(const VarianceRegressionReport& report);

struct VarianceRegressionParams {
    std::size_t n = 4;
    std::size_t replicates = 40000;
    std::size_t grid_points = 101;
    double trim = 0.90;
};

/// Kernel-regresses s_X^2 and s_Y^2 on Xbar + Ybar over the central `trim`
/// mass of the conditioning values and compares the gap with c = var X - var Y
/// (exact, from the specs). Passes when every grid deviation lies within
/// 3 standard errors of the difference curve.
VarianceRegressionReport variance_regression_check(const DistributionSpec& spec1, const DistributionSpec& spec2,
                                                   const VarianceRegressionParams& params, const Seed& seed);

/// File-ingested variant: c is estimated from the sample moments.
VarianceRegressionReport variance_regression_check(const PairedSample& sample, double c_hat,
                                                   const VarianceRegressionParams& params);

}  // namespace klrlab
