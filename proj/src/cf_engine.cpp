#include "klrlab/cf_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "klrlab/error.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

namespace {

constexpr double kMaxPhaseStep = std::numbers::pi / 2.0;

void require_same_grid(const CFValues& a, const CFValues& b) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
        throw GridMismatch("characteristic functions live on different grids");
    }
}

void check_floor(const CFValues& cf, double floor) {
    for (std::size_t i = 0; i < cf.values.size(); ++i) {
        const double m = std::abs(cf.values[i]);
        if (!(m >= floor)) throw MagnitudeFloorViolation(cf.grid[i], m, floor);
    }
}

}  // namespace

CFGrid CFGrid::uniform(double epsilon, std::size_t points) {
    if (!(std::isfinite(epsilon) && epsilon > 0.0)) throw InvalidArgument("grid epsilon must be > 0");
    if (points < 3 || points % 2 == 0) throw InvalidArgument("grid point count must be odd and >= 3");
    const std::size_t half = points / 2;
    const double h = epsilon / static_cast<double>(half);
    std::vector<double> t(points);
    for (std::size_t i = 0; i < half; ++i) {
        const double value = epsilon * static_cast<double>(half - i) / static_cast<double>(half);
        t[i] = -value;
        t[points - 1 - i] = value;
    }
    t[half] = 0.0;
    return CFGrid(epsilon, h, std::move(t));
}

CFGrid CFGrid::from_points(std::vector<double> points) {
    if (points.size() < 3 || points.size() % 2 == 0) throw NonUniformGrid("grid needs an odd number >= 3 of points");
    const std::size_t half = points.size() / 2;
    const double epsilon = points.back();
    if (!(epsilon > 0.0) || points[half] != 0.0) throw NonUniformGrid("grid must be centred on 0");
    const double h = epsilon / static_cast<double>(half);
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double expected = h * (static_cast<double>(i) - static_cast<double>(half));
        if (std::abs(points[i] - expected) > 1e-9 * h) {
            throw NonUniformGrid("grid point " + std::to_string(i) + " breaks uniform symmetric spacing");
        }
    }
    return CFGrid::uniform(epsilon, points.size());
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Exact: return "exact";
        case Provenance::Empirical: return "empirical";
        case Provenance::Candidate: return "candidate";
    }
    return "unknown";
}

CFValues exact_cf(const DistributionSpec& spec, const CFGrid& grid) {
    CFValues out{grid, std::vector<std::complex<double>>(grid.size()), Provenance::Exact, 0, 0.0};
    for (std::size_t i = 0; i < grid.size(); ++i) out.values[i] = cf_exact(spec, grid[i]);
    return out;
}

CFValues ecf(std::span<const double> sample, const CFGrid& grid) {
    if (sample.size() < 2) throw InvalidArgument("empirical CF needs at least 2 observations");
    for (std::size_t k = 0; k < sample.size(); ++k) {
        if (!std::isfinite(sample[k])) {
            throw InvalidArgument("sample entry " + std::to_string(k) + " is not finite");
        }
    }
    const std::size_t c = grid.center();
    const double inv_n = 1.0 / static_cast<double>(sample.size());
    CFValues out{grid, std::vector<std::complex<double>>(grid.size()), Provenance::Empirical, sample.size(), 0.0};
    out.values[c] = {1.0, 0.0};
    parallel_for(c + 1, grid.size(), [&](std::size_t i) {
        const double t = grid[i];
        double re = 0.0;
        double im = 0.0;
        for (double x : sample) {
            re += std::cos(t * x);
            im += std::sin(t * x);
        }
        out.values[i] = {re * inv_n, im * inv_n};
        out.values[2 * c - i] = std::conj(out.values[i]);
    });
    return out;
}

std::vector<std::complex<double>> distinguished_log(const CFValues& cf, double floor) {
    check_floor(cf, floor);
    const std::size_t c = cf.grid.center();
    std::vector<std::complex<double>> out(cf.values.size());
    out[c] = {std::log(std::abs(cf.values[c])), std::arg(cf.values[c])};

    auto walk = [&](std::size_t from, std::size_t to) {
        const double step = std::arg(cf.values[to] / cf.values[from]);
        if (std::abs(step) > kMaxPhaseStep) throw PhaseUnwrapError(cf.grid[to], step);
        out[to] = {std::log(std::abs(cf.values[to])), out[from].imag() + step};
    };
    for (std::size_t i = c + 1; i < cf.values.size(); ++i) walk(i - 1, i);
    for (std::size_t i = c; i-- > 0;) walk(i + 1, i);
    return out;
}

double estimate_c_moments(std::span<const double> sample_x, std::span<const double> sample_y, bool center) {
    if (sample_x.size() < 2 || sample_y.size() < 2) throw InvalidArgument("samples need at least 2 values");
    auto m2 = [center](std::span<const double> s) {
        double mu = 0.0;
        if (center) {
            for (double v : s) mu += v;
            mu /= static_cast<double>(s.size());
        }
        double acc = 0.0;
        for (double v : s) acc += (v - mu) * (v - mu);
        return acc / static_cast<double>(s.size());
    };
    return m2(sample_y) - m2(sample_x);
}

double estimate_c_exact(const DistributionSpec& x, const DistributionSpec& y) {
    return moment2(centered(y)) - moment2(centered(x));
}

double relation_residual(const CFValues& cf1, const CFValues& cf2, double c) {
    require_same_grid(cf1, cf2);
    double worst = 0.0;
    for (std::size_t i = 0; i < cf1.values.size(); ++i) {
        const double t = cf1.grid[i];
        worst = std::max(worst, std::abs(cf1.values[i] - cf2.values[i] * std::exp(0.5 * c * t * t)));
    }
    return worst;
}

double power_product_residual(std::span<const CFValues> cfs, std::span<const double> alphas, double c,
                              double floor) {
    if (cfs.empty()) throw InvalidArgument("power product needs at least one CF");
    if (cfs.size() != alphas.size()) throw InvalidArgument("one exponent per CF required");
    for (double a : alphas) {
        if (!(a > 0.0)) throw InvalidArgument("power-product exponents must be positive");
    }
    for (std::size_t i = 1; i < cfs.size(); ++i) require_same_grid(cfs[0], cfs[i]);

    const CFGrid& grid = cfs[0].grid;
    std::vector<std::complex<double>> log_sum(grid.size(), {0.0, 0.0});
    for (std::size_t i = 0; i < cfs.size(); ++i) {
        const auto logs = distinguished_log(cfs[i], floor);
        for (std::size_t j = 0; j < grid.size(); ++j) log_sum[j] += alphas[i] * logs[j];
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double t = grid[j];
        worst = std::max(worst, std::abs(std::exp(log_sum[j]) - std::exp(c * t * t)));
    }
    return worst;
}

std::vector<std::complex<double>> log_cf_second_derivative(const CFValues& cf, double floor) {
    const auto logs = distinguished_log(cf, floor);
    const double h2 = cf.grid.spacing() * cf.grid.spacing();
    std::vector<std::complex<double>> out;
    out.reserve(logs.size() - 2);
    for (std::size_t i = 1; i + 1 < logs.size(); ++i) {
        out.push_back((logs[i + 1] - 2.0 * logs[i] + logs[i - 1]) / h2);
    }
    return out;
}

CFValues deconvolve_gaussian(const CFValues& cf, double v, double floor) {
    if (!(std::isfinite(v) && v > 0.0)) throw InvalidArgument("deconvolution variance must be > 0");
    check_floor(cf, floor);
    CFValues out = cf;
    out.provenance = Provenance::Candidate;
    out.deconvolved_variance = cf.deconvolved_variance + v;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        const double t = cf.grid[i];
        out.values[i] *= std::exp(0.5 * v * t * t);
    }
    return out;
}

DeconvolutionReport bochner_psd_check(const CFValues& candidate, const BochnerOptions& options) {
    // Re-validate the grid: differences s_j - s_k must land on stored points.
    const CFGrid grid = CFGrid::from_points(candidate.grid.points());
    const std::size_t half = grid.center();
    const std::size_t k_points = std::min(options.sub_grid_points, half + 1);
    if (k_points < 2) throw NonUniformGrid("grid too coarse for a Bochner sub-grid");
    const std::size_t stride = half / (k_points - 1);

    Eigen::MatrixXcd matrix(k_points, k_points);
    for (std::size_t j = 0; j < k_points; ++j) {
        for (std::size_t k = 0; k < k_points; ++k) {
            const auto offset = (static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(k)) *
                                static_cast<std::ptrdiff_t>(stride);
            matrix(j, k) = candidate.values[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(half) + offset)];
        }
    }
    const Eigen::MatrixXcd hermitian = 0.5 * (matrix + matrix.adjoint());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);

    DeconvolutionReport report;
    report.candidate_variance = candidate.deconvolved_variance;
    report.matrix_size = k_points;
    report.min_eigenvalue = solver.eigenvalues().minCoeff();
    const double noise = candidate.sample_size > 0 ? 4.0 / std::sqrt(static_cast<double>(candidate.sample_size)) : 0.0;
    report.psd_tolerance = 1e-8 * static_cast<double>(k_points) * (1.0 + noise);
    report.magnitude_cap = 1.0 + options.magnitude_slack;
    for (const auto& value : candidate.values) report.max_magnitude = std::max(report.max_magnitude, std::abs(value));
    report.passed = report.min_eigenvalue >= -report.psd_tolerance && report.max_magnitude <= report.magnitude_cap;
    return report;
}

double max_gaussian_component_variance(const CFValues& cf, double tol, const ComponentScanOptions& options) {
    if (!(tol > 0.0)) throw InvalidArgument("component scan tolerance must be > 0");
    double hi = options.v_max;
    if (hi <= 0.0) {
        hi = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < cf.values.size(); ++i) {
            const double t = cf.grid[i];
            if (t == 0.0) continue;
            const double m = std::abs(cf.values[i]);
            if (m <= 0.0) continue;
            hi = std::min(hi, -2.0 * std::log(m) / (t * t));
        }
        if (!std::isfinite(hi) || hi <= 0.0) hi = tol;
    }
    auto passes = [&](double v) {
        return bochner_psd_check(deconvolve_gaussian(cf, v, options.floor), options.bochner).passed;
    };
    if (!passes(tol)) return 0.0;
    if (hi <= tol || passes(hi)) return std::max(hi, tol);
    double lo = tol;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (passes(mid) ? lo : hi) = mid;
    }
    return lo;
}

void write_cf_csv(std::ostream& os, const CFValues& cf) {
    os.precision(17);
    os << "t,re,im,provenance\n";
    const std::string tag = to_string(cf.provenance);
    for (std::size_t i = 0; i < cf.values.size(); ++i) {
        os << cf.grid[i] << ',' << cf.values[i].real() << ',' << cf.values[i].imag() << ',' << tag << '\n';
    }
}

void write_cf_csv(std::ostream& os, std::span<const CFValues> cfs, std::span<const std::string> labels) {
    if (cfs.size() != labels.size()) throw InvalidArgument("one label per CF required");
    os.precision(17);
    os << "label,t,re,im,provenance\n";
    for (std::size_t k = 0; k < cfs.size(); ++k) {
        const std::string tag = to_string(cfs[k].provenance);
        for (std::size_t i = 0; i < cfs[k].values.size(); ++i) {
            os << labels[k] << ',' << cfs[k].grid[i] << ',' << cfs[k].values[i].real() << ','
               << cfs[k].values[i].imag() << ',' << tag << '\n';
        }
    }
}

nlohmann::json to_json(const DeconvolutionReport& report) {
    return nlohmann::json{
        {"candidate_variance", report.candidate_variance},
        {"min_eigenvalue", report.min_eigenvalue},
        {"psd_tolerance", report.psd_tolerance},
        {"max_magnitude", report.max_magnitude},
        {"magnitude_cap", report.magnitude_cap},
        {"matrix_size", report.matrix_size},
        {"passed", report.passed},
    };
}

}  // namespace klrlab
