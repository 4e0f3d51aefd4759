#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "klrlab/distribution.hpp"

namespace klrlab {

inline constexpr double kDefaultMagnitudeFloor = 0.05;
inline constexpr double kDefaultEpsilon = 2.0;
inline constexpr std::size_t kDefaultGridPoints = 201;

/// Symmetric uniform grid on [-epsilon, epsilon] with an odd number of points;
/// the centre point is exactly 0 and t[c + i] == -t[c - i] bitwise.
class CFGrid {
  public:
    static CFGrid uniform(double epsilon = kDefaultEpsilon, std::size_t points = kDefaultGridPoints);

    /// Adopts an explicit point list; throws NonUniformGrid unless it is
    /// symmetric, uniformly spaced and of odd length.
    static CFGrid from_points(std::vector<double> points);

    double epsilon() const noexcept { return epsilon_; }
    double spacing() const noexcept { return spacing_; }
    std::size_t size() const noexcept { return points_.size(); }
    std::size_t center() const noexcept { return points_.size() / 2; }
    double operator[](std::size_t i) const noexcept { return points_[i]; }
    const std::vector<double>& points() const noexcept { return points_; }

    friend bool operator==(const CFGrid& a, const CFGrid& b) noexcept {
        return a.epsilon_ == b.epsilon_ && a.points_.size() == b.points_.size();
    }

  private:
    CFGrid(double epsilon, double spacing, std::vector<double> points)
        : epsilon_(epsilon), spacing_(spacing), points_(std::move(points)) {}

    double epsilon_;
    double spacing_;
    std::vector<double> points_;
};

enum class Provenance { Exact, Empirical, Candidate };

std::string to_string(Provenance p);

/// Characteristic-function values on a grid. Candidates (deconvolution output)
/// carry no CF guarantees; `sample_size` is kept so noise-aware tolerances
/// still apply to candidates built from empirical CFs.
struct CFValues {
    CFGrid grid;
    std::vector<std::complex<double>> values;
    Provenance provenance = Provenance::Exact;
    std::size_t sample_size = 0;
    double deconvolved_variance = 0.0;

    std::complex<double> at_zero() const { return values[grid.center()]; }
};

CFValues exact_cf(const DistributionSpec& spec, const CFGrid& grid);

/// Empirical CF (1/N) sum exp(i t x_k). Values for t < 0 are the conjugates of
/// the t > 0 values so Hermitian symmetry holds exactly.
CFValues ecf(std::span<const double> sample, const CFGrid& grid);

/// Continuous branch of log f with log f(0) = 0, by phase unwrapping outward
/// from the origin. Throws MagnitudeFloorViolation if |f| < floor anywhere and
/// PhaseUnwrapError if an adjacent phase step exceeds pi/2.
std::vector<std::complex<double>> distinguished_log(const CFValues& cf,
                                                   double floor = kDefaultMagnitudeFloor);

/// m2(Y) - m2(X) from samples: the Gaussian-component sign convention, where a
/// negative value means X carries the extra Gaussian variance.
double estimate_c_moments(std::span<const double> sample_x, std::span<const double> sample_y,
                          bool center = true);

/// Exact-moment counterpart of estimate_c_moments: E{Y^2} - E{X^2} after centering.
double estimate_c_exact(const DistributionSpec& x, const DistributionSpec& y);

/// max_t |cf1(t) - cf2(t) exp(c t^2 / 2)|.
double relation_residual(const CFValues& cf1, const CFValues& cf2, double c);

/// max_t |exp(sum_i alpha_i log f_i(t)) - exp(c t^2)| using distinguished logs.
double power_product_residual(std::span<const CFValues> cfs, std::span<const double> alphas, double c,
                              double floor = kDefaultMagnitudeFloor);

/// Central second differences (step = grid spacing) of the distinguished log at
/// interior points 1..M-2. Truncation error is h^2/12 * sup|(log f)''''|.
std::vector<std::complex<double>> log_cf_second_derivative(const CFValues& cf,
                                                          double floor = kDefaultMagnitudeFloor);

/// cf(t) exp(v t^2 / 2): the candidate CF of U if f is the CF of U + N(0, v).
CFValues deconvolve_gaussian(const CFValues& cf, double v, double floor = kDefaultMagnitudeFloor);

struct BochnerOptions {
    std::size_t sub_grid_points = 33;
    double magnitude_slack = 1e-9;
};

struct DeconvolutionReport {
    double candidate_variance = 0.0;
    double min_eigenvalue = 0.0;
    double psd_tolerance = 0.0;
    double max_magnitude = 0.0;
    double magnitude_cap = 1.0;
    std::size_t matrix_size = 0;
    bool passed = false;
};

/// Finite-grid Bochner test. Builds M[j,k] = candidate(s_j - s_k) for an
/// equally spaced sub-grid s of K points inside [-eps/2, eps/2], so every
/// difference is a stored grid point, and checks
///   min eig(M) >= -1e-8 K (1 + 4/sqrt(N))   (the N term for empirical input)
///   max_t |candidate(t)| <= 1 + magnitude_slack.
DeconvolutionReport bochner_psd_check(const CFValues& candidate, const BochnerOptions& options = {});

struct ComponentScanOptions {
    double floor = kDefaultMagnitudeFloor;
    /// Upper end of the bisection bracket; <= 0 derives it from the magnitude
    /// bound |f(t)| <= exp(-v t^2 / 2) that any Gaussian component must obey.
    double v_max = 0.0;
    BochnerOptions bochner{};
};

/// Largest v (to within tol) whose deconvolution passes bochner_psd_check;
/// 0 when v = tol already fails, meaning no component was detected.
double max_gaussian_component_variance(const CFValues& cf, double tol, const ComponentScanOptions& options = {});

void write_cf_csv(std::ostream& os, const CFValues& cf);
void write_cf_csv(std::ostream& os, std::span<const CFValues> cfs, std::span<const std::string> labels);

nlohmann::json to_json(const DeconvolutionReport& report);

}  // namespace klrlab
