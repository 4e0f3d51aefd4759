#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "klrlab/rng.hpp"

namespace klrlab {

class DistributionSpec;

namespace dist {

struct Gaussian {
    double mean = 0.0;
    double variance = 1.0;
};

struct Laplace {
    double mean = 0.0;
    double scale = 1.0;
};

struct Uniform {
    double lo = -1.0;
    double hi = 1.0;
};

/// Exponential(rate), optionally shifted by its exact mean 1/rate. `shift` is
/// an extra location offset so mixtures containing exponentials can be centered.
struct Exponential {
    double rate = 1.0;
    bool centered = false;
    double shift = 0.0;
};

struct Mixture {
    std::vector<double> weights;
    std::vector<DistributionSpec> components;
};

/// base + independent N(0, added_variance). Never nests directly.
struct GaussConvolved {
    std::shared_ptr<const DistributionSpec> base;
    double added_variance = 0.0;
};

}  // namespace dist

/// Closed-form model of a one-dimensional law: exact characteristic function,
/// exact moments and counter-based sampling. Immutable; cheap to copy.
class DistributionSpec {
  public:
    using Variant = std::variant<dist::Gaussian, dist::Laplace, dist::Uniform, dist::Exponential,
                                 dist::Mixture, dist::GaussConvolved>;

    static DistributionSpec gaussian(double mean, double variance);
    static DistributionSpec laplace(double mean, double scale);
    static DistributionSpec uniform(double lo, double hi);
    static DistributionSpec exponential(double rate, bool centered = false);
    static DistributionSpec mixture(std::vector<double> weights, std::vector<DistributionSpec> components);

    const Variant& variant() const noexcept { return value_; }

    /// Lower-case variant tag: gaussian, laplace, uniform, exponential,
    /// mixture, gauss_convolved.
    std::string kind() const;

    /// Human-readable one-line description, e.g. "laplace(mean=0, scale=1)".
    std::string describe() const;

  private:
    explicit DistributionSpec(Variant v) : value_(std::move(v)) {}

    Variant value_;

    friend DistributionSpec convolve_gaussian(const DistributionSpec& spec, double added_variance);
    friend DistributionSpec centered(const DistributionSpec& spec);
    friend DistributionSpec shifted(const DistributionSpec& spec, double delta);
};

/// `count` iid draws; draw i depends only on (seed, i).
std::vector<double> sample(const DistributionSpec& spec, std::size_t count, const Seed& seed);

/// One draw pulling uniforms from an existing stream.
double sample_one(const DistributionSpec& spec, DrawStream& stream);

std::complex<double> cf_exact(const DistributionSpec& spec, double t);

double mean(const DistributionSpec& spec);

/// Exact E{X^2} = variance + mean^2.
double moment2(const DistributionSpec& spec);

double variance(const DistributionSpec& spec);

/// Same law translated by delta.
DistributionSpec shifted(const DistributionSpec& spec, double delta);

/// Same law translated to mean zero.
DistributionSpec centered(const DistributionSpec& spec);

/// Law of X + xi with xi ~ N(0, added_variance) independent of X. Convolving a
/// GaussConvolved adds the variances instead of nesting.
DistributionSpec convolve_gaussian(const DistributionSpec& spec, double added_variance);

}  // namespace klrlab
