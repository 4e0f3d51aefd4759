#include "klrlab/klr_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "klrlab/error.hpp"
#include "klrlab/kernel_smoother.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

namespace {

constexpr std::uint64_t kStreamX = 1;
constexpr std::uint64_t kStreamY = 2;
constexpr std::uint64_t kStreamPermutation = 3;

double mean_of(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
    const double mu = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(v.size());
}

void permute(std::vector<double>& values, DrawStream& stream) {
    for (std::size_t i = values.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(stream.below(i));
        std::swap(values[i - 1], values[j]);
    }
}

/// Shared permutation loop: `fit` maps a target vector to fitted values.
template <class Fit>
NullBand permutation_band(std::span<const double> targets, std::size_t B, const Seed& seed, const Fit& fit) {
    if (B < 100) throw InvalidArgument("permutation count B must be >= 100");
    NullBand band;
    if (!(variance_of(targets) > 0.0)) {
        band.degenerate = true;
        return band;
    }
    const Philox4x32 engine(seed);
    std::vector<double> stats(B);
    parallel_for(0, B, [&](std::size_t b) {
        std::vector<double> shuffled(targets.begin(), targets.end());
        DrawStream stream(engine, b);
        permute(shuffled, stream);
        stats[b] = constancy_statistic(fit(shuffled), shuffled);
    });
    band.q90 = quantile(stats, 0.90);
    band.q95 = quantile(stats, 0.95);
    band.q99 = quantile(stats, 0.99);
    return band;
}

nlohmann::json seed_json(const Seed& seed) {
    return nlohmann::json{{"root", seed.root}, {"stream", seed.stream}};
}

}  // namespace

PairedSample draw_paired_sample(const DistributionSpec& spec1, const DistributionSpec& spec2, std::size_t n,
                                std::size_t replicates, const Seed& seed) {
    if (n < 2) throw InvalidArgument("tuple size n must be >= 2");
    if (replicates < 2) throw InvalidArgument("replicate count N must be >= 2");
    PairedSample out;
    out.n = n;
    out.replicates = replicates;
    out.seed = seed;
    out.x = sample(spec1, n * replicates, seed.derive(kStreamX));
    out.y = sample(spec2, n * replicates, seed.derive(kStreamY));
    return out;
}

PairedSample paired_from_vectors(std::span<const double> x, std::span<const double> y, std::size_t n) {
    if (n < 2) throw InvalidArgument("tuple size n must be >= 2");
    const std::size_t rows = std::min(x.size(), y.size()) / n;
    if (rows < 2) throw InvalidArgument("not enough values for two tuples");
    PairedSample out;
    out.n = n;
    out.replicates = rows;
    out.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(rows * n));
    out.y.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(rows * n));
    return out;
}

std::vector<double> residual_features(std::span<const double> x_tuple, std::span<const double> y_tuple) {
    if (x_tuple.size() != y_tuple.size() || x_tuple.size() < 2) {
        throw InvalidArgument("residual features need two tuples of equal size n >= 2");
    }
    const double mx = mean_of(x_tuple);
    const double my = mean_of(y_tuple);
    std::vector<double> z(x_tuple.size());
    for (std::size_t j = 0; j < z.size(); ++j) z[j] = (x_tuple[j] - mx) + (y_tuple[j] - my);
    return z;
}

std::vector<double> project_zero_sum(std::span<const double> z) {
    if (z.size() < 2) throw InvalidArgument("projection needs n >= 2");
    double total = 0.0;
    for (double v : z) total += v;
    if (std::abs(total) > 1e-8) throw NotOnHyperplane(total);
    // Helmert row j (1-based): (1, ..., 1, -j, 0, ..., 0) / sqrt(j (j + 1)).
    std::vector<double> w(z.size() - 1);
    double prefix = 0.0;
    for (std::size_t j = 1; j < z.size(); ++j) {
        prefix += z[j - 1];
        const auto jd = static_cast<double>(j);
        w[j - 1] = (prefix - jd * z[j]) / std::sqrt(jd * (jd + 1.0));
    }
    return w;
}

ResidualFeatures residual_features(const PairedSample& sample) {
    const std::size_t n = sample.n;
    ResidualFeatures out;
    out.n = n;
    out.z.resize(sample.replicates * n);
    out.w.resize(sample.replicates * (n - 1));
    parallel_for(0, sample.replicates, [&](std::size_t r) {
        const auto z = residual_features(sample.x_row(r), sample.y_row(r));
        const auto w = project_zero_sum(z);
        std::copy(z.begin(), z.end(), out.z.begin() + static_cast<std::ptrdiff_t>(r * n));
        std::copy(w.begin(), w.end(), out.w.begin() + static_cast<std::ptrdiff_t>(r * (n - 1)));
    });
    return out;
}

double target_statistic(std::span<const double> x_tuple, std::span<const double> y_tuple, double a, double b) {
    return a * mean_of(x_tuple) + b * mean_of(y_tuple);
}

std::vector<double> targets(const PairedSample& sample, double a, double b) {
    std::vector<double> out(sample.replicates);
    for (std::size_t r = 0; r < sample.replicates; ++r) {
        out[r] = target_statistic(sample.x_row(r), sample.y_row(r), a, b);
    }
    return out;
}

double constancy_statistic(std::span<const double> fitted, std::span<const double> targets) {
    if (fitted.size() != targets.size() || fitted.empty()) {
        throw InvalidArgument("fitted and target vectors differ in length");
    }
    const double vt = variance_of(targets);
    if (!(vt > 0.0)) throw DegenerateTargets();
    return variance_of(fitted) / vt;
}

NullBand permutation_null(const NeighborTable& neighbors, std::span<const double> targets, std::size_t B,
                          const Seed& seed) {
    return permutation_band(targets, B, seed,
                            [&](std::span<const double> y) { return average_over_neighbors(neighbors, y); });
}

NullBand permutation_null(const FeatureMatrix& features, std::span<const double> targets, std::size_t k,
                          std::size_t B, const Seed& seed) {
    if (features.rows() != targets.size()) throw InvalidArgument("features and targets differ in length");
    return permutation_null(self_neighbors(features, k), targets, B, seed);
}

std::string to_string(Verdict v) { return v == Verdict::Pass ? "pass" : "reject"; }

std::size_t default_k(std::size_t replicates) {
    auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(replicates))));
    while (k * k < replicates) ++k;
    while (k > 1 && (k - 1) * (k - 1) >= replicates) --k;
    return std::min(k, replicates);
}

ConstancyReport klr_test(const PairedSample& sample, const KlrParams& params, const Seed& seed) {
    ConstancyReport report;
    report.replicates = sample.replicates;
    report.n = sample.n;
    report.a = params.a;
    report.b = params.b;
    report.k = params.k == 0 ? default_k(sample.replicates) : params.k;
    report.permutations = params.permutations;
    report.seed = seed;
    if (sample.n < 3) {
        report.warnings.emplace_back("n < 3: the relation is characteristic only for n >= 3");
    }

    const ResidualFeatures features = residual_features(sample);
    const std::vector<double> t = targets(sample, params.a, params.b);
    const NeighborTable neighbors = self_neighbors(features.features(), report.k);
    report.statistic = constancy_statistic(average_over_neighbors(neighbors, t), t);
    report.null = permutation_null(neighbors, t, params.permutations, seed.derive(kStreamPermutation));
    report.verdict = report.statistic > report.null.q95 ? Verdict::Reject : Verdict::Pass;
    return report;
}

ConstancyReport klr_test(const DistributionSpec& spec1, const DistributionSpec& spec2, const KlrParams& params,
                         const Seed& seed) {
    const PairedSample sample =
        draw_paired_sample(centered(spec1), centered(spec2), params.n, params.replicates, seed);
    return klr_test(sample, params, seed);
}

double sample_variance(std::span<const double> tuple) {
    if (tuple.size() < 2) throw InvalidArgument("sample variance needs n >= 2");
    const double mu = mean_of(tuple);
    double acc = 0.0;
    for (double v : tuple) acc += (v - mu) * (v - mu);
    return acc / static_cast<double>(tuple.size() - 1);
}

ConstancyReport lukacs_check(const PairedSample& sample, std::size_t permutations, const Seed& seed) {
    ConstancyReport report;
    report.replicates = sample.replicates;
    report.n = sample.n;
    report.a = 1.0;
    report.b = 0.0;
    report.permutations = permutations;
    report.seed = seed;

    std::vector<double> xbar(sample.replicates);
    std::vector<double> s2(sample.replicates);
    for (std::size_t r = 0; r < sample.replicates; ++r) {
        xbar[r] = mean_of(sample.x_row(r));
        s2[r] = sample_variance(sample.x_row(r));
    }
    if (!(variance_of(s2) > 0.0)) throw DegenerateTargets();

    const BinnedSmoother smoother(xbar, silverman_bandwidth(xbar));
    report.bandwidth = smoother.bandwidth();
    report.statistic = constancy_statistic(smoother.fit(s2), s2);
    report.null = permutation_band(s2, permutations, seed.derive(kStreamPermutation),
                                   [&](std::span<const double> y) { return smoother.fit(y); });
    report.verdict = report.statistic > report.null.q95 ? Verdict::Reject : Verdict::Pass;
    return report;
}

ConstancyReport lukacs_check(const DistributionSpec& spec, const LukacsParams& params, const Seed& seed) {
    if (params.n < 2) throw InvalidArgument("tuple size n must be >= 2");
    PairedSample sample;
    sample.n = params.n;
    sample.replicates = params.replicates;
    sample.seed = seed;
    sample.x = klrlab::sample(spec, params.n * params.replicates, seed.derive(kStreamX));
    return lukacs_check(sample, params.permutations, seed);
}

VarianceRegressionReport variance_regression_check(const PairedSample& sample, double c_hat,
                                                   const VarianceRegressionParams& params) {
    if (sample.n < 2) throw InvalidArgument("tuple size n must be >= 2");
    if (!(params.trim > 0.0 && params.trim <= 1.0)) throw InvalidArgument("trim must lie in (0, 1]");
    if (params.grid_points < 2) throw InvalidArgument("need at least 2 conditioning grid points");

    const std::size_t rows = sample.replicates;
    std::vector<double> u(rows), sx(rows), sy(rows), diff(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        u[r] = mean_of(sample.x_row(r)) + mean_of(sample.y_row(r));
        sx[r] = sample_variance(sample.x_row(r));
        sy[r] = sample_variance(sample.y_row(r));
        diff[r] = sx[r] - sy[r];
    }

    VarianceRegressionReport report;
    report.n = sample.n;
    report.replicates = rows;
    report.seed = sample.seed;
    report.c_hat = c_hat;
    report.bandwidth = silverman_bandwidth(u);

    const double tail = 0.5 * (1.0 - params.trim);
    const double lo = quantile(u, tail);
    const double hi = quantile(u, 1.0 - tail);
    report.grid.resize(params.grid_points);
    for (std::size_t g = 0; g < params.grid_points; ++g) {
        report.grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(params.grid_points - 1);
    }
    const KernelCurve cx = nadaraya_watson(u, sx, report.bandwidth, report.grid);
    const KernelCurve cy = nadaraya_watson(u, sy, report.bandwidth, report.grid);
    const KernelCurve cd = nadaraya_watson(u, diff, report.bandwidth, report.grid);
    report.curve_x = cx.value;
    report.curve_y = cy.value;
    report.standard_error = cd.standard_error;

    for (std::size_t g = 0; g < params.grid_points; ++g) {
        const double dev = std::abs(cx.value[g] - cy.value[g] - c_hat);
        report.max_deviation = std::max(report.max_deviation, dev);
        if (cd.standard_error[g] > 0.0) {
            report.max_standardized_deviation =
                std::max(report.max_standardized_deviation, dev / cd.standard_error[g]);
        } else if (dev > 0.0) {
            report.max_standardized_deviation = std::numeric_limits<double>::infinity();
        }
    }
    report.passed = report.max_standardized_deviation <= report.band_width_se;
    return report;
}

VarianceRegressionReport variance_regression_check(const DistributionSpec& spec1, const DistributionSpec& spec2,
                                                   const VarianceRegressionParams& params, const Seed& seed) {
    const DistributionSpec x = centered(spec1);
    const DistributionSpec y = centered(spec2);
    const PairedSample sample = draw_paired_sample(x, y, params.n, params.replicates, seed);
    return variance_regression_check(sample, variance(x) - variance(y), params);
}

nlohmann::json to_json(const ConstancyReport& report) {
    nlohmann::json j{
        {"statistic", report.statistic},
        {"null_q90", report.null.q90},
        {"null_q95", report.null.q95},
        {"null_q99", report.null.q99},
        {"null_degenerate", report.null.degenerate},
        {"verdict", to_string(report.verdict)},
        {"params",
         {{"N", report.replicates},
          {"n", report.n},
          {"a", report.a},
          {"b", report.b},
          {"k", report.k},
          {"B", report.permutations},
          {"bandwidth", report.bandwidth}}},
        {"seed", seed_json(report.seed)},
        {"warnings", report.warnings},
    };
    return j;
}

nlohmann::json to_json(const VarianceRegressionReport& report) {
    return nlohmann::json{
        {"c_hat", report.c_hat},
        {"max_deviation", report.max_deviation},
        {"max_standardized_deviation", report.max_standardized_deviation},
        {"se_band", report.band_width_se},
        {"bandwidth", report.bandwidth},
        {"passed", report.passed},
        {"params", {{"N", report.replicates}, {"n", report.n}, {"grid_points", report.grid.size()}}},
        {"seed", seed_json(report.seed)},
        {"warnings", report.warnings},
    };
}

}  // namespace klrlab
