#include "klrlab/cauchy.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "klrlab/error.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

namespace {

constexpr double kNodeSnap = 1e-9;

}  // namespace

std::complex<double> GFunction::operator()(double tau) const {
    const double lo = t.front();
    const double hi = t.back();
    if (!(tau >= lo && tau <= hi)) throw OutOfGrid(tau, lo, hi);
    const double pos = (tau - lo) / spacing();
    auto i = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(i);
    if (frac < kNodeSnap) return values[std::min(i, values.size() - 1)];
    if (frac > 1.0 - kNodeSnap) return values[std::min(i + 1, values.size() - 1)];
    if (i + 1 >= values.size()) return values.back();
    return (1.0 - frac) * values[i] + frac * values[i + 1];
}

GFunction GFunction::from_function(const CFGrid& grid, const std::function<std::complex<double>(double)>& g) {
    GFunction out{grid.points(), std::vector<std::complex<double>>(grid.size()), GOrigin::Analytic};
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = g(grid[i]);
    return out;
}

GFunction g_from_cf(const CFValues& cf1, const CFValues& cf2, double a, double b, double floor) {
    if (!(cf1.grid == cf2.grid) || cf1.values.size() != cf2.values.size()) {
        throw GridMismatch("g needs both CFs on one grid");
    }
    const auto log1 = distinguished_log(cf1, floor);
    const auto log2 = distinguished_log(cf2, floor);
    const double two_h = 2.0 * cf1.grid.spacing();
    GFunction g;
    g.origin = (cf1.provenance == Provenance::Exact && cf2.provenance == Provenance::Exact) ? GOrigin::Exact
                                                                                          : GOrigin::Empirical;
    for (std::size_t i = 1; i + 1 < log1.size(); ++i) {
        const std::complex<double> d1 = (log1[i + 1] - log1[i - 1]) / two_h;
        const std::complex<double> d2 = (log2[i + 1] - log2[i - 1]) / two_h;
        g.t.push_back(cf1.grid[i]);
        g.values.push_back(a * d1 + b * d2);
    }
    return g;
}

ZeroSumTuples sample_zero_sum_tuples(std::size_t n, std::size_t count, double radius, const Seed& seed) {
    if (n < 2) throw InvalidArgument("zero-sum tuples need n >= 2");
    if (!(radius > 0.0)) throw InvalidArgument("tuple radius must be > 0");
    ZeroSumTuples out{n, radius, std::vector<double>(n * count)};
    const Philox4x32 engine(seed);
    parallel_for(0, count, [&](std::size_t i) {
        DrawStream stream(engine, i);
        double* row = out.values.data() + i * n;
        while (true) {
            double partial = 0.0;
            for (std::size_t j = 0; j + 1 < n; ++j) {
                row[j] = radius * (2.0 * stream.uniform() - 1.0);
                partial += row[j];
            }
            row[n - 1] = -partial;
            if (std::abs(row[n - 1]) < radius) break;
        }
    });
    return out;
}

double cauchy_residual(const GFunction& g, const ZeroSumTuples& tuples) {
    double worst = 0.0;
    for (std::size_t i = 0; i < tuples.count(); ++i) {
        std::complex<double> acc{0.0, 0.0};
        for (double tau : tuples.tuple(i)) acc += g(tau);
        worst = std::max(worst, std::abs(acc));
    }
    return worst;
}

double interpolation_error_bound(const GFunction& g, std::size_t n) {
    const double h = g.spacing();
    double curvature = 0.0;
    for (std::size_t i = 1; i + 1 < g.values.size(); ++i) {
        curvature = std::max(curvature, std::abs(g.values[i + 1] - 2.0 * g.values[i] + g.values[i - 1]) / (h * h));
    }
    double scale = 0.0;
    for (const auto& v : g.values) scale = std::max(scale, std::abs(v));
    return static_cast<double>(n) * (h * h / 8.0 * curvature + 1e-12 * (1.0 + scale));
}

LinearFit linear_fit(const GFunction& g) {
    double stt = 0.0, str = 0.0, sti = 0.0, er = 0.0, ei = 0.0;
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        stt += g.t[i] * g.t[i];
        str += g.t[i] * g.values[i].real();
        sti += g.t[i] * g.values[i].imag();
        er += g.values[i].real() * g.values[i].real();
        ei += g.values[i].imag() * g.values[i].imag();
    }
    LinearFit fit;
    if (stt > 0.0) {
        fit.slope_re = str / stt;
        fit.slope_im = sti / stt;
    }
    fit.imaginary_dominant = ei > er;
    fit.slope = fit.imaginary_dominant ? fit.slope_im : fit.slope_re;
    const std::complex<double> c = fit.imaginary_dominant ? std::complex<double>(0.0, fit.slope)
                                                          : std::complex<double>(fit.slope, 0.0);
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        fit.max_deviation = std::max(fit.max_deviation, std::abs(g.values[i] - c * g.t[i]));
    }
    return fit;
}

void write_g_csv(std::ostream& os, const GFunction& g) {
    os.precision(17);
    os << "t,re_g,im_g\n";
    for (std::size_t i = 0; i < g.t.size(); ++i) {
        os << g.t[i] << ',' << g.values[i].real() << ',' << g.values[i].imag() << '\n';
    }
}

nlohmann::json residual_json(double max_residual, const ZeroSumTuples& tuples) {
    return nlohmann::json{{"max_residual", max_residual}, {"tuple_count", tuples.count()}, {"epsilon", tuples.radius}};
}

}  // namespace klrlab
