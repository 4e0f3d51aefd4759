#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>
#include <vector>

#include "klrlab/distribution.hpp"
#include "klrlab/error.hpp"
#include "klrlab/kernel_smoother.hpp"
#include "klrlab/knn.hpp"
#include "klrlab/parallel.hpp"

using namespace klrlab;

namespace {

// Brute-force oracle: sort every row by (squared distance, index).
NeighborTable brute_force(const FeatureMatrix& f, std::size_t k) {
    const std::size_t n = f.rows();
    NeighborTable t{k, std::vector<std::size_t>(n * k)};
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::pair<double, std::size_t>> d(n);
        for (std::size_t s = 0; s < n; ++s) {
            double acc = 0.0;
            for (std::size_t j = 0; j < f.dims; ++j) {
                const double diff = f.row(r)[j] - f.row(s)[j];
                acc += diff * diff;
            }
            d[s] = {acc, s};
        }
        std::sort(d.begin(), d.end());
        for (std::size_t j = 0; j < k; ++j) t.indices[r * k + j] = d[j].second;
    }
    return t;
}

std::vector<double> uniform_features(std::size_t n, std::size_t dims, std::uint64_t seed) {
    return sample(DistributionSpec::uniform(0.0, 1.0), n * dims, Seed{seed, 0});
}

}  // namespace

TEST_CASE("kd-tree neighbours equal the brute-force table") {
    for (std::size_t dims : {1u, 2u, 3u}) {
        const auto data = uniform_features(700, dims, dims);
        const FeatureMatrix f{data, dims};
        for (std::size_t k : {1u, 5u, 27u}) {
            CAPTURE(dims);
            CAPTURE(k);
            CHECK(self_neighbors(f, k).indices == brute_force(f, k).indices);
        }
    }
}

TEST_CASE("ties are broken by row index") {
    // Integer lattice with many duplicate rows and equal distances.
    std::vector<double> data;
    for (int i = 0; i < 300; ++i) {
        data.push_back(static_cast<double>(i % 4));
        data.push_back(static_cast<double>((i / 4) % 3));
    }
    const FeatureMatrix f{data, 2};
    CHECK(self_neighbors(f, 40).indices == brute_force(f, 40).indices);
    const NeighborTable t = self_neighbors(f, 3);
    // Row 12 duplicates rows 0, 24, ...; the lowest indices come first.
    CHECK(t.of(12)[0] == 0);
    CHECK(t.of(12)[1] == 12);
    CHECK(t.of(12)[2] == 24);
}

TEST_CASE("neighbour table does not depend on the worker count") {
    const auto data = uniform_features(5000, 2, 9);
    const FeatureMatrix f{data, 2};
    set_thread_count(1);
    const auto one = self_neighbors(f, 71);
    set_thread_count(8);
    const auto eight = self_neighbors(f, 71);
    set_thread_count(0);
    CHECK(one.indices == eight.indices);
}

TEST_CASE("conditional mean edge cases") {
    const auto data = uniform_features(400, 2, 4);
    const FeatureMatrix f{data, 2};
    const std::vector<double> constant(400, 3.25);
    for (double v : knn_conditional_mean(f, constant, 17)) CHECK(v == doctest::Approx(3.25).epsilon(1e-15));

    const auto y = sample(DistributionSpec::gaussian(0.0, 1.0), 400, Seed{5, 0});
    const double global = std::accumulate(y.begin(), y.end(), 0.0) / 400.0;
    for (double v : knn_conditional_mean(f, y, 400)) CHECK(v == doctest::Approx(global).epsilon(1e-12));

    const auto self = knn_conditional_mean(f, y, 1);
    CHECK(self == y);

    CHECK_THROWS_AS(self_neighbors(f, 0), InvalidArgument);
    CHECK_THROWS_AS(self_neighbors(f, 401), InvalidArgument);
    CHECK_THROWS_AS(knn_conditional_mean(f, std::vector<double>(10, 0.0), 3), InvalidArgument);
}

TEST_CASE("linear targets are recovered on the inner box") {
    constexpr std::size_t kN = 20000;
    const auto data = uniform_features(kN, 2, 17);
    const FeatureMatrix f{data, 2};
    auto truth = [](const double* w) { return 0.8 * w[0] - 0.5 * w[1] + 0.1; };
    std::vector<double> y(kN);
    for (std::size_t r = 0; r < kN; ++r) y[r] = truth(f.row(r));
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(kN))));
    const auto fitted = knn_conditional_mean(f, y, k);

    std::vector<double> c0(kN), c1(kN);
    for (std::size_t r = 0; r < kN; ++r) {
        c0[r] = f.row(r)[0];
        c1[r] = f.row(r)[1];
    }
    const double lo0 = quantile(c0, 0.05), hi0 = quantile(c0, 0.95);
    const double lo1 = quantile(c1, 0.05), hi1 = quantile(c1, 0.95);
    double worst = 0.0;
    for (std::size_t r = 0; r < kN; ++r) {
        const double* w = f.row(r);
        if (w[0] < lo0 || w[0] > hi0 || w[1] < lo1 || w[1] > hi1) continue;
        worst = std::max(worst, std::abs(fitted[r] - truth(w)));
    }
    CHECK(worst <= 0.05);
}

TEST_CASE("quantile type 7") {
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.9) == doctest::Approx(3.7).epsilon(1e-15));
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.0) == 1.0);
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 1.0) == 4.0);
    CHECK(quantile({7.0}, 0.3) == 7.0);
    CHECK_THROWS_AS(quantile({}, 0.5), InvalidArgument);
}

TEST_CASE("silverman bandwidth") {
    const auto x = sample(DistributionSpec::gaussian(0.0, 1.0), 1000, Seed{8, 0});
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / 1000.0;
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / 999.0);
    const double iqr = quantile(x, 0.75) - quantile(x, 0.25);
    const double expected = 0.9 * std::min(sd, iqr / 1.34) * std::pow(1000.0, -0.2);
    CHECK(silverman_bandwidth(x) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(silverman_bandwidth(std::vector<double>(5, 1.0)), InvalidArgument);
}

TEST_CASE("binned smoother tracks the direct estimator") {
    const auto x = sample(DistributionSpec::gaussian(0.0, 1.0), 5000, Seed{10, 0});
    const auto noise = sample(DistributionSpec::gaussian(0.0, 0.25), 5000, Seed{11, 0});
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::sin(x[i]) + noise[i];
    const double h = silverman_bandwidth(x);
    const BinnedSmoother smoother(x, h);
    CHECK(smoother.bandwidth() == h);
    const auto binned = smoother.fit(y);
    const auto direct = nadaraya_watson(x, y, h, x);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(binned[i] - direct.value[i]));
    CHECK(worst < 1e-3);

    const std::vector<double> constant(x.size(), -2.0);
    for (double v : smoother.fit(constant)) CHECK(v == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK_THROWS_AS(smoother.fit(std::vector<double>(3, 0.0)), InvalidArgument);
    CHECK_THROWS_AS(BinnedSmoother(x, 0.0), InvalidArgument);
}

TEST_CASE("direct estimator value and standard error") {
    const std::vector<double> x{-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
    const std::vector<double> y{1.0, 0.0, 2.0, -1.0, 0.5, 3.0};
    const std::vector<double> at{0.2};
    const double h = 0.7;
    double sw = 0.0, swy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = std::exp(-0.5 * std::pow((x[i] - 0.2) / h, 2));
        sw += w;
        swy += w * y[i];
    }
    const double m = swy / sw;
    double sww = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double w = std::exp(-0.5 * std::pow((x[i] - 0.2) / h, 2));
        sww += w * w * (y[i] - m) * (y[i] - m);
    }
    const KernelCurve c = nadaraya_watson(x, y, h, at);
    CHECK(c.value[0] == doctest::Approx(m).epsilon(1e-14));
    CHECK(c.standard_error[0] == doctest::Approx(std::sqrt(sww) / sw).epsilon(1e-14));

    const std::vector<double> flat(x.size(), 1.5);
    const KernelCurve f = nadaraya_watson(x, flat, h, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(f.value[i] == doctest::Approx(1.5).epsilon(1e-14));
        CHECK(f.standard_error[i] < 1e-14);
    }
}
