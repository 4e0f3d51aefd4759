#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "klrlab/cauchy.hpp"
#include "klrlab/cf_engine.hpp"
#include "klrlab/distribution.hpp"
#include "klrlab/error.hpp"

using namespace klrlab;
using cd = std::complex<double>;

namespace {

const DistributionSpec kGauss = DistributionSpec::gaussian(0.0, 1.0);
const DistributionSpec kLaplace = DistributionSpec::laplace(0.0, 1.0);

ZeroSumTuples single(std::vector<double> tau) {
    return ZeroSumTuples{tau.size(), 1.0, std::move(tau)};
}

}  // namespace

TEST_CASE("g from exact gaussian cfs is linear") {
    const CFGrid grid = CFGrid::uniform();
    const double s1 = 0.5, s2 = 0.8, a = 1.0, b = 2.0;
    const GFunction g = g_from_cf(exact_cf(DistributionSpec::gaussian(0.0, s1), grid),
                                  exact_cf(DistributionSpec::gaussian(0.0, s2), grid), a, b);
    CHECK(g.origin == GOrigin::Exact);
    REQUIRE(g.t.size() == grid.size() - 2);
    CHECK(g.t.front() == grid[1]);
    // log f is quadratic, so central differences are exact up to rounding.
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        CHECK(std::abs(g.values[i] - cd(-(a * s1 + b * s2) * g.t[i], 0.0)) <= 1e-9);
    }
}

TEST_CASE("g with zero weights vanishes") {
    const CFGrid grid = CFGrid::uniform();
    const GFunction g = g_from_cf(exact_cf(kLaplace, grid), exact_cf(DistributionSpec::exponential(1.0, true), grid),
                                  0.0, 0.0);
    for (const auto& v : g.values) CHECK(v == cd(0.0, 0.0));
}

TEST_CASE("laplace parts cancel in the component case") {
    const CFGrid grid = CFGrid::uniform(1.5, 151);
    const GFunction g = g_from_cf(exact_cf(convolve_gaussian(kLaplace, 1.0), grid), exact_cf(kLaplace, grid), 1.0, -1.0);
    for (std::size_t i = 0; i < g.t.size(); ++i) CHECK(std::abs(g.values[i] + g.t[i]) <= 1e-9);
    CHECK_THROWS_AS(g_from_cf(exact_cf(convolve_gaussian(kLaplace, 1.0), CFGrid::uniform()),
                              exact_cf(kLaplace, CFGrid::uniform()), 1.0, -1.0),
                    MagnitudeFloorViolation);
    CHECK_THROWS_AS(g_from_cf(exact_cf(kLaplace, grid), exact_cf(kLaplace, CFGrid::uniform()), 1.0, 1.0), GridMismatch);
}

TEST_CASE("g is odd for symmetric centered laws") {
    const CFGrid grid = CFGrid::uniform();
    const GFunction g =
        g_from_cf(exact_cf(kLaplace, grid), exact_cf(DistributionSpec::uniform(-1.0, 1.0), grid), 1.0, 0.7);
    const std::size_t m = g.t.size();
    for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(g.values[i] + g.values[m - 1 - i]) <= 1e-12);
}

TEST_CASE("zero-sum tuples") {
    const ZeroSumTuples t = sample_zero_sum_tuples(4, 2000, 1.9, Seed{1, 0});
    CHECK(t.count() == 2000);
    double widest = 0.0, narrowest = INFINITY;
    for (std::size_t i = 0; i < t.count(); ++i) {
        double sum = 0.0, top = 0.0;
        for (double v : t.tuple(i)) {
            sum += v;
            top = std::max(top, std::abs(v));
            CHECK(std::abs(v) < 1.9);
        }
        CHECK(std::abs(sum) <= 1e-12);
        widest = std::max(widest, top);
        narrowest = std::min(narrowest, top);
    }
    // Coverage: tuples reach both deep inside and out past half the box.
    CHECK(narrowest <= 0.5 * 1.9);
    CHECK(widest >= 0.9 * 1.9);

    const ZeroSumTuples pairs = sample_zero_sum_tuples(2, 100, 1.0, Seed{2, 0});
    for (std::size_t i = 0; i < pairs.count(); ++i) CHECK(pairs.tuple(i)[1] == -pairs.tuple(i)[0]);

    CHECK(sample_zero_sum_tuples(3, 50, 1.0, Seed{3, 0}).values == sample_zero_sum_tuples(3, 50, 1.0, Seed{3, 0}).values);
    CHECK_THROWS_AS(sample_zero_sum_tuples(1, 10, 1.0, Seed{}), InvalidArgument);
}

TEST_CASE("cauchy residual on analytic g") {
    const CFGrid grid = CFGrid::uniform(3.0, 301);
    const GFunction linear = GFunction::from_function(grid, [](double t) { return cd(3.0 * t, 0.0); });
    CHECK(linear.origin == GOrigin::Analytic);
    const ZeroSumTuples tuples = sample_zero_sum_tuples(3, 1000, 2.9, Seed{4, 0});
    CHECK(cauchy_residual(linear, tuples) <= interpolation_error_bound(linear, 3));

    const GFunction cube = GFunction::from_function(grid, [](double t) { return cd(t * t * t, 0.0); });
    CHECK(cauchy_residual(cube, single({1.0, 1.0, -2.0})) == 6.0);
    const GFunction square = GFunction::from_function(grid, [](double t) { return cd(t * t, 0.0); });
    CHECK(cauchy_residual(square, single({1.0, -1.0, 0.0})) == 2.0);

    CHECK_THROWS_AS(cauchy_residual(cube, single({3.5, -3.5})), OutOfGrid);
    CHECK_THROWS_AS(linear(-3.01), OutOfGrid);
}

TEST_CASE("interpolation between nodes") {
    const CFGrid grid = CFGrid::uniform(1.0, 11);
    const GFunction sq = GFunction::from_function(grid, [](double t) { return cd(t * t, -t); });
    // Halfway between 0.2 and 0.4 the chord of t^2 sits h^2/4 above 0.09.
    const cd mid = sq(0.3);
    CHECK(mid.real() == doctest::Approx(0.5 * (0.04 + 0.16)).epsilon(1e-12));
    CHECK(mid.imag() == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(sq(0.4) == sq.values[7]);
    CHECK(sq(1.0) == sq.values.back());
}

TEST_CASE("a linear g stays inside the interpolation bound") {
    const CFGrid grid = CFGrid::uniform();
    for (double slope : {-2.0, 0.5, 7.0}) {
        const GFunction g = GFunction::from_function(grid, [&](double t) { return cd(0.0, slope * t); });
        for (std::size_t n : {2u, 3u, 6u}) {
            const ZeroSumTuples tuples = sample_zero_sum_tuples(n, 500, 1.99, Seed{n, 1});
            CHECK(cauchy_residual(g, tuples) <= interpolation_error_bound(g, n));
        }
    }
}

TEST_CASE("linear fit of an exactly linear g") {
    const GFunction g = GFunction::from_function(CFGrid::uniform(), [](double t) { return cd(3.0 * t, 0.0); });
    const LinearFit fit = linear_fit(g);
    CHECK(fit.slope == doctest::Approx(3.0).epsilon(1e-14));
    CHECK_FALSE(fit.imaginary_dominant);
    CHECK(fit.max_deviation <= 1e-12);

    const GFunction gi = GFunction::from_function(CFGrid::uniform(), [](double t) { return cd(0.0, -1.5 * t); });
    const LinearFit fi = linear_fit(gi);
    CHECK(fi.imaginary_dominant);
    CHECK(fi.slope == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(fi.slope_re == 0.0);
}

TEST_CASE("linear fit of a cubic perturbation") {
    const CFGrid grid = CFGrid::uniform();
    auto f = [](double t) { return t + 0.1 * t * t * t; };
    const GFunction g = GFunction::from_function(grid, [&](double t) { return cd(f(t), 0.0); });
    // Oracle: closed-form least squares through the origin, then the maximum
    // deviation found by scanning every grid point.
    double stt = 0.0, sty = 0.0;
    for (double t : grid.points()) {
        stt += t * t;
        sty += t * f(t);
    }
    const double slope = sty / stt;
    double worst = 0.0;
    for (double t : grid.points()) worst = std::max(worst, std::abs(f(t) - slope * t));
    const LinearFit fit = linear_fit(g);
    CHECK(fit.slope == doctest::Approx(slope).epsilon(1e-13));
    CHECK(fit.max_deviation == doctest::Approx(worst).epsilon(1e-12));
    CHECK(fit.max_deviation >= 0.4);
}

TEST_CASE("fitted slope for exact gaussians is the negative variance sum") {
    const CFGrid grid = CFGrid::uniform(1.5, 151);
    for (auto [s1, s2] : {std::pair{1.0, 1.0}, std::pair{0.5, 2.0}, std::pair{1.5, 0.2}}) {
        const GFunction g = g_from_cf(exact_cf(DistributionSpec::gaussian(0.0, s1), grid),
                                      exact_cf(DistributionSpec::gaussian(0.0, s2), grid), 1.0, 1.0);
        const LinearFit fit = linear_fit(g);
        CHECK(fit.slope == doctest::Approx(-(s1 + s2)).epsilon(1e-9));
        CHECK(fit.slope < 0.0);
    }
}

TEST_CASE("linear fit on empirical gaussian cfs") {
    constexpr std::size_t kN = 100000;
    const CFGrid grid = CFGrid::uniform();
    const GFunction g = g_from_cf(ecf(sample(kGauss, kN, Seed{5, 1}), grid), ecf(sample(kGauss, kN, Seed{5, 2}), grid),
                                  1.0, 1.0);
    CHECK(g.origin == GOrigin::Empirical);
    // Oracle: first-order propagation of ECF noise into (log f)' using the
    // exact f(t) = exp(-t^2/2), f'(t) = -t f(t) and E X^2 = 1:
    // sd(ecf') <= sqrt(E X^2 / N), sd(ecf) <= 1 / sqrt(N).
    double bound = 0.0;
    for (double t : g.t) {
        const double f = std::exp(-0.5 * t * t);
        const double df = std::abs(t) * f;
        bound = std::max(bound, 2.0 * (1.0 / f + df / (f * f)) / std::sqrt(static_cast<double>(kN)));
    }
    const LinearFit fit = linear_fit(g);
    CHECK(fit.max_deviation < 5.0 * bound);
    CHECK(fit.slope == doctest::Approx(-2.0).epsilon(0.05));
}

TEST_CASE("serialization") {
    const GFunction g = GFunction::from_function(CFGrid::uniform(1.0, 5), [](double t) { return cd(t, 2.0 * t); });
    std::ostringstream os;
    write_g_csv(os, g);
    const std::string text = os.str();
    CHECK(text.rfind("t,re_g,im_g\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    const ZeroSumTuples t = sample_zero_sum_tuples(3, 10, 0.9, Seed{1, 1});
    const auto j = residual_json(0.25, t);
    CHECK(j.at("max_residual") == 0.25);
    CHECK(j.at("tuple_count") == 10);
    CHECK(j.at("epsilon") == 0.9);
}
