#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"

#include "klrlab/cf_engine.hpp"
#include "klrlab/rng.hpp"

namespace klrlab {

enum class GOrigin { Exact, Empirical, Analytic };

/// g sampled on a uniform, symmetric set of points; evaluated elsewhere by
/// linear interpolation.
struct GFunction {
    std::vector<double> t;
    std::vector<std::complex<double>> values;
    GOrigin origin = GOrigin::Exact;

    double spacing() const { return t[1] - t[0]; }
    double half_width() const { return t.back(); }

    /// Linear interpolation; node values are returned unchanged when tau sits
    /// on a grid point. Throws OutOfGrid outside [t.front(), t.back()].
    std::complex<double> operator()(double tau) const;

    static GFunction from_function(const CFGrid& grid, const std::function<std::complex<double>(double)>& g);
};

/// g = a (log f1)' + b (log f2)' by central first differences of the
/// distinguished logs, on interior grid points.
GFunction g_from_cf(const CFValues& cf1, const CFValues& cf2, double a, double b,
                    double floor = kDefaultMagnitudeFloor);

struct ZeroSumTuples {
    std::size_t n = 0;
    double radius = 0.0;
    std::vector<double> values;  // count x n, row-major

    std::size_t count() const { return n == 0 ? 0 : values.size() / n; }
    std::span<const double> tuple(std::size_t i) const { return {values.data() + i * n, n}; }
};

/// Uniform draws from {tau : sum tau = 0, |tau_i| < radius}: the first n-1
/// coordinates are uniform on (-radius, radius), the last closes the sum, and
/// draws whose last coordinate leaves the box are rejected.
ZeroSumTuples sample_zero_sum_tuples(std::size_t n, std::size_t count, double radius, const Seed& seed);

/// max over tuples of |sum_i g(tau_i)|.
double cauchy_residual(const GFunction& g, const ZeroSumTuples& tuples);

/// Worst-case linear-interpolation error of a sum of n evaluations,
/// n * h^2 / 8 * max|g''| with g'' from second differences, plus rounding slack.
double interpolation_error_bound(const GFunction& g, std::size_t n);

struct LinearFit {
    double slope = 0.0;     // slope of the dominant channel
    double slope_re = 0.0;
    double slope_im = 0.0;
    bool imaginary_dominant = false;
    double max_deviation = 0.0;  // sup |g(t) - slope * t|
};

/// Least-squares fit g(t) = c t through the origin, per channel.
LinearFit linear_fit(const GFunction& g);

void write_g_csv(std::ostream& os, const GFunction& g);

nlohmann::json residual_json(double max_residual, const ZeroSumTuples& tuples);

}  // namespace klrlab
