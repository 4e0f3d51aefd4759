#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "klrlab/distribution.hpp"
#include "klrlab/error.hpp"
#include "klrlab/klr_regression.hpp"
#include "klrlab/parallel.hpp"

using namespace klrlab;

namespace {

const DistributionSpec kGauss = DistributionSpec::gaussian(0.0, 1.0);
const DistributionSpec kLaplace = DistributionSpec::laplace(0.0, 1.0);

double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

KlrParams params(double a, double b, std::size_t n, std::size_t N) {
    KlrParams p;
    p.a = a;
    p.b = b;
    p.n = n;
    p.replicates = N;
    return p;
}

}  // namespace

TEST_CASE("residual features") {
    using V = std::vector<double>;
    CHECK(residual_features(V{1, 2, 3}, V{0, 0, 0}) == V{-1, 0, 1});
    CHECK(residual_features(V{2.5, 2.5, 2.5}, V{2.5, 2.5, 2.5}) == V{0, 0, 0});
    CHECK(residual_features(V{1, 0, -1}, V{2, -1, -1}) == V{3, -1, -2});
    CHECK_THROWS_AS(residual_features(V{1}, V{1}), InvalidArgument);
    CHECK_THROWS_AS(residual_features(V{1, 2}, V{1, 2, 3}), InvalidArgument);
}

TEST_CASE("zero-sum projection") {
    using V = std::vector<double>;
    CHECK(project_zero_sum(V{0, 0, 0, 0}) == V{0, 0, 0});
    const auto w = project_zero_sum(V{1.5, -1.5});
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(1.5 * std::sqrt(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS(project_zero_sum(V{1.0, 1.0}), NotOnHyperplane);

    // Oracle: direct norm computation on random zero-sum vectors.
    const auto raw = sample(kLaplace, 7 * 500, Seed{2, 0});
    for (std::size_t r = 0; r < 500; ++r) {
        std::vector<double> z(raw.begin() + r * 7, raw.begin() + r * 7 + 7);
        const double m = std::accumulate(z.begin(), z.end(), 0.0) / 7.0;
        for (double& v : z) v -= m;
        CHECK(norm(project_zero_sum(z)) == doctest::Approx(norm(z)).epsilon(1e-12));
    }
}

TEST_CASE("residual features of a paired sample lie on the hyperplane") {
    const PairedSample s = draw_paired_sample(DistributionSpec::exponential(1.0, true), kLaplace, 4, 3000, Seed{3, 0});
    const ResidualFeatures f = residual_features(s);
    for (std::size_t r = 0; r < s.replicates; ++r) {
        const std::span<const double> z(f.z.data() + r * 4, 4);
        const std::span<const double> w(f.w.data() + r * 3, 3);
        CHECK(std::abs(std::accumulate(z.begin(), z.end(), 0.0)) <= 1e-10);
        CHECK(std::abs(norm(w) - norm(z)) <= 1e-10);
    }
    CHECK(f.features().dims == 3);
    CHECK(f.features().rows() == 3000);
}

TEST_CASE("paired sampling layout") {
    const PairedSample s = draw_paired_sample(kGauss, kLaplace, 3, 10, Seed{4, 1});
    CHECK(s.x == sample(kGauss, 30, Seed{4, 1}.derive(1)));
    CHECK(s.y == sample(kLaplace, 30, Seed{4, 1}.derive(2)));
    CHECK(s.x_row(2)[1] == s.x[7]);
    const std::vector<double> x(11, 1.0), y(12, 2.0);
    const PairedSample p = paired_from_vectors(x, y, 3);
    CHECK(p.replicates == 3);
    CHECK(p.x.size() == 9);
}

TEST_CASE("target statistic") {
    using V = std::vector<double>;
    CHECK(target_statistic(V{1, 2, 3}, V{9, 9, 9}, 1.0, 0.0) == 2.0);
    CHECK(target_statistic(V{1, 2, 3}, V{0, 1, 2}, 1.0, -1.0) == 1.0);
    CHECK(target_statistic(V{0, 1, 2}, V{-2, -1, 0}, 2.0, 3.0) == -1.0);
}

TEST_CASE("constancy statistic") {
    const std::vector<double> t{1.0, 2.0, 4.0, 8.0};
    CHECK(constancy_statistic(std::vector<double>(4, 3.0), t) == 0.0);
    CHECK(constancy_statistic(t, t) == 1.0);
    CHECK_THROWS_AS(constancy_statistic(t, std::vector<double>(4, 1.0)), DegenerateTargets);

    // Pure-noise targets: the kNN average of k independent values keeps about
    // 1/k of the variance.
    const auto w = sample(kGauss, 10000, Seed{5, 0});
    const auto y = sample(kGauss, 10000, Seed{6, 0});
    const FeatureMatrix f{w, 1};
    const double stat = constancy_statistic(knn_conditional_mean(f, y, 100), y);
    CHECK(stat > 0.2 / 100.0);
    CHECK(stat < 5.0 / 100.0);
}

TEST_CASE("permutation null") {
    const auto w = sample(kGauss, 4000, Seed{7, 0});
    const auto y = sample(kLaplace, 2000, Seed{8, 0});
    const FeatureMatrix f{w, 2};
    const NullBand band = permutation_null(f, y, 45, 200, Seed{9, 0});
    CHECK_FALSE(band.degenerate);
    CHECK(band.q90 <= band.q95);
    CHECK(band.q95 <= band.q99);
    CHECK(band.q90 > 0.0);
    const NullBand again = permutation_null(f, y, 45, 200, Seed{9, 0});
    CHECK(again.q95 == band.q95);
    CHECK(permutation_null(f, y, 45, 200, Seed{10, 0}).q95 != band.q95);

    const NullBand flat = permutation_null(f, std::vector<double>(2000, 1.0), 45, 200, Seed{9, 0});
    CHECK(flat.degenerate);
    CHECK(flat.q90 == 0.0);
    CHECK(flat.q95 == 0.0);
    CHECK(flat.q99 == 0.0);

    CHECK_THROWS_AS(permutation_null(f, y, 45, 99, Seed{9, 0}), InvalidArgument);
}

TEST_CASE("permutation band covers independent targets") {
    int inside = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        const auto w = sample(kGauss, 2000 * 2, Seed{s, 11});
        const auto y = sample(kGauss, 2000, Seed{s, 12});
        const FeatureMatrix f{w, 2};
        const NeighborTable t = self_neighbors(f, 45);
        const double stat = constancy_statistic(average_over_neighbors(t, y), y);
        inside += stat <= permutation_null(t, y, 200, Seed{s, 13}).q95;
    }
    // 20 draws at 95% coverage: P(inside <= 16) < 2%.
    CHECK(inside >= 17);
}

TEST_CASE("sample variance") {
    using V = std::vector<double>;
    CHECK(sample_variance(V{1, 2, 3}) == 1.0);
    CHECK(sample_variance(V{4, 4, 4, 4}) == 0.0);
    CHECK(sample_variance(V{0, 2}) == 2.0);
    CHECK_THROWS_AS(sample_variance(V{1}), InvalidArgument);
}

TEST_CASE("default k") {
    CHECK(default_k(20000) == 142);
    CHECK(default_k(10000) == 100);
    CHECK(default_k(2) == 2);
}

TEST_CASE("klr report structure") {
    const ConstancyReport r = klr_test(kGauss, kGauss, params(1, 1, 3, 3000), Seed{1, 0});
    CHECK(r.statistic >= 0.0);
    CHECK(r.k == default_k(3000));
    CHECK(r.permutations == 200);
    CHECK((r.verdict == Verdict::Reject) == (r.statistic > r.null.q95));
    CHECK(r.warnings.empty());
    const auto j = to_json(r);
    for (const char* key : {"statistic", "null_q90", "null_q95", "null_q99", "verdict", "params", "seed"}) {
        CHECK(j.contains(key));
    }
    CHECK(klr_test(kGauss, kGauss, params(1, 1, 2, 500), Seed{1, 0}).warnings.size() == 1);
    CHECK_THROWS_AS(klr_test(kGauss, kGauss, params(0, 0, 3, 500), Seed{1, 0}), DegenerateTargets);
}

TEST_CASE("klr statistic is invariant under scaling of (a, b)") {
    const auto spec = DistributionSpec::exponential(1.0, true);
    for (std::uint64_t s = 1; s <= 3; ++s) {
        const ConstancyReport r1 = klr_test(spec, spec, params(1.0, 1.0, 3, 4000), Seed{s, 0});
        const ConstancyReport r2 = klr_test(spec, spec, params(2.5, 2.5, 3, 4000), Seed{s, 0});
        CHECK(r1.verdict == r2.verdict);
        CHECK(r1.statistic == doctest::Approx(r2.statistic).epsilon(1e-12));
        CHECK(r1.null.q95 == doctest::Approx(r2.null.q95).epsilon(1e-12));
    }
}

TEST_CASE("klr test is schedule independent") {
    set_thread_count(1);
    const ConstancyReport a = klr_test(kLaplace, kGauss, params(1, 0.5, 3, 5000), Seed{3, 3});
    set_thread_count(8);
    const ConstancyReport b = klr_test(kLaplace, kGauss, params(1, 0.5, 3, 5000), Seed{3, 3});
    set_thread_count(0);
    CHECK(a.statistic == b.statistic);
    CHECK(a.null.q90 == b.null.q90);
    CHECK(a.null.q95 == b.null.q95);
    CHECK(a.null.q99 == b.null.q99);
}

TEST_CASE("swapping the roles of X and Y leaves the statistic distribution unchanged") {
    const auto u = DistributionSpec::uniform(-1.0, 1.0);
    std::vector<double> s1, s2;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        s1.push_back(klr_test(kLaplace, u, params(1.0, 0.5, 3, 5000), Seed{s, 21}).statistic);
        s2.push_back(klr_test(u, kLaplace, params(0.5, 1.0, 3, 5000), Seed{s, 21}).statistic);
    }
    auto mean_var = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, ss / (v.size() - 1)};
    };
    const auto [m1, v1] = mean_var(s1);
    const auto [m2, v2] = mean_var(s2);
    CHECK(std::abs(m1 - m2) <= 3.0 * std::sqrt(v1 / 20.0 + v2 / 20.0));
}

TEST_CASE("identical non-gaussian laws pass the a=1, b=-1 test") {
    const auto u = DistributionSpec::uniform(-1.0, 1.0);
    int passes = 0;
    for (std::uint64_t s = 1; s <= 20; ++s) {
        passes += klr_test(u, u, params(1.0, -1.0, 3, 20000), Seed{s, 0}).verdict == Verdict::Pass;
    }
    CHECK(passes >= 18);
}

TEST_CASE("lukacs check") {
    LukacsParams p;
    p.replicates = 5000;
    const ConstancyReport r = lukacs_check(kGauss, p, Seed{1, 0});
    CHECK(r.bandwidth > 0.0);
    CHECK((r.verdict == Verdict::Reject) == (r.statistic > r.null.q95));

    PairedSample flat;
    flat.n = 4;
    flat.replicates = 100;
    flat.x.assign(400, 1.0);
    flat.y.assign(400, 1.0);
    CHECK_THROWS_AS(lukacs_check(flat, 200, Seed{1, 0}), DegenerateTargets);
}

TEST_CASE("variance regression on equal laws") {
    const VarianceRegressionReport r = variance_regression_check(kLaplace, kLaplace, {}, Seed{1, 0});
    CHECK(r.c_hat == 0.0);
    CHECK(r.grid.size() == 101);
    CHECK(r.passed);
    for (std::size_t i = 0; i < r.grid.size(); ++i) {
        CHECK(std::isfinite(r.curve_x[i]));
        CHECK(std::isfinite(r.curve_y[i]));
        CHECK(r.standard_error[i] > 0.0);
    }
}

TEST_CASE("variance regression on two gaussians") {
    const VarianceRegressionReport r =
        variance_regression_check(DistributionSpec::gaussian(0.0, 2.0), kGauss, {}, Seed{2, 0});
    CHECK(r.c_hat == 1.0);
    CHECK(r.passed);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.grid.size(); ++i) worst = std::max(worst, std::abs(r.curve_x[i] - r.curve_y[i] - 1.0));
    CHECK(r.max_deviation == doctest::Approx(worst).epsilon(1e-12));
    const auto j = to_json(r);
    CHECK(j.at("c_hat") == 1.0);
}

TEST_CASE("variance regression detects a wrong c") {
    const PairedSample s = draw_paired_sample(DistributionSpec::gaussian(0.0, 2.0), kGauss, 4, 40000, Seed{3, 0});
    VarianceRegressionParams p;
    CHECK(variance_regression_check(s, 1.0, p).passed);
    CHECK_FALSE(variance_regression_check(s, 0.5, p).passed);
}
