#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace klrlab {

/// Silverman's rule of thumb, 0.9 * min(sd, IQR / 1.34) * N^(-1/5).
double silverman_bandwidth(std::span<const double> x);

/// Gaussian-kernel Nadaraya-Watson regression on a fixed design, evaluated
/// through linear binning: observations are spread onto `bins` equally spaced
/// nodes, node estimates are kernel sums over the bins (kernel truncated at
/// 5 bandwidths) and fitted values interpolate linearly between nodes. Binning
/// depends only on x, so refitting permuted targets costs O(N + bins * width).
class BinnedSmoother {
  public:
    BinnedSmoother(std::span<const double> x, double bandwidth, std::size_t bins = 1024);

    /// Fitted values at every design point (same order as x).
    std::vector<double> fit(std::span<const double> y) const;

    double bandwidth() const noexcept { return bandwidth_; }

  private:
    std::vector<double> node_estimates(std::span<const double> y) const;

    std::vector<std::size_t> bin_;
    std::vector<double> frac_;
    std::vector<double> kernel_;
    std::vector<double> mass_;
    double bandwidth_;
    std::size_t bins_;
};

/// Direct Nadaraya-Watson estimate at arbitrary evaluation points.
struct KernelCurve {
    std::vector<double> at;
    std::vector<double> value;
    /// Pointwise standard error sqrt(sum w_i^2 (y_i - m(u))^2) / sum w_i.
    std::vector<double> standard_error;
};

KernelCurve nadaraya_watson(std::span<const double> x, std::span<const double> y, double bandwidth,
                            std::span<const double> at);

/// Quantile with linear interpolation between order statistics (type 7).
double quantile(std::vector<double> values, double p);

}  // namespace klrlab
