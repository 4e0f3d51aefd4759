#include "klrlab/kernel_smoother.hpp"

#include <algorithm>
#include <cmath>

#include "klrlab/error.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidArgument("quantile of an empty set");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

double silverman_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw InvalidArgument("bandwidth needs at least 2 points");
    double mu = 0.0;
    for (double v : x) mu += v;
    mu /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double sd = std::sqrt(ss / static_cast<double>(x.size() - 1));
    std::vector<double> copy(x.begin(), x.end());
    const double iqr = quantile(copy, 0.75) - quantile(copy, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) throw InvalidArgument("conditioning variable is constant");
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

BinnedSmoother::BinnedSmoother(std::span<const double> x, double bandwidth, std::size_t bins)
    : bin_(x.size()), frac_(x.size()), bandwidth_(bandwidth), bins_(bins) {
    if (x.size() < 2) throw InvalidArgument("smoother needs at least 2 points");
    if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be > 0");
    if (bins < 2) throw InvalidArgument("smoother needs at least 2 bins");
    const auto [lo_it, hi_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *lo_it;
    const double width = (*hi_it - lo) / static_cast<double>(bins - 1);
    if (!(width > 0.0)) throw InvalidArgument("conditioning variable is constant");

    mass_.assign(bins, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pos = (x[i] - lo) / width;
        auto b = static_cast<std::size_t>(std::floor(pos));
        if (b >= bins - 1) b = bins - 2;
        bin_[i] = b;
        frac_[i] = pos - static_cast<double>(b);
        mass_[b] += 1.0 - frac_[i];
        mass_[b + 1] += frac_[i];
    }

    const auto reach = static_cast<std::size_t>(std::ceil(5.0 * bandwidth / width));
    const std::size_t span = std::min(reach, bins - 1);
    kernel_.resize(span + 1);
    for (std::size_t l = 0; l <= span; ++l) {
        const double u = static_cast<double>(l) * width / bandwidth;
        kernel_[l] = std::exp(-0.5 * u * u);
    }
}

std::vector<double> BinnedSmoother::node_estimates(std::span<const double> y) const {
    std::vector<double> sums(bins_, 0.0);
    for (std::size_t i = 0; i < y.size(); ++i) {
        sums[bin_[i]] += (1.0 - frac_[i]) * y[i];
        sums[bin_[i] + 1] += frac_[i] * y[i];
    }
    double fallback = 0.0;
    for (double v : y) fallback += v;
    fallback /= static_cast<double>(y.size());

    const auto span = static_cast<std::ptrdiff_t>(kernel_.size() - 1);
    const auto nb = static_cast<std::ptrdiff_t>(bins_);
    std::vector<double> est(bins_);
    for (std::ptrdiff_t g = 0; g < nb; ++g) {
        double num = 0.0;
        double den = 0.0;
        const std::ptrdiff_t from = std::max<std::ptrdiff_t>(0, g - span);
        const std::ptrdiff_t to = std::min<std::ptrdiff_t>(nb - 1, g + span);
        for (std::ptrdiff_t l = from; l <= to; ++l) {
            const double w = kernel_[static_cast<std::size_t>(std::abs(g - l))];
            num += w * sums[static_cast<std::size_t>(l)];
            den += w * mass_[static_cast<std::size_t>(l)];
        }
        est[static_cast<std::size_t>(g)] = den > 0.0 ? num / den : fallback;
    }
    return est;
}

std::vector<double> BinnedSmoother::fit(std::span<const double> y) const {
    if (y.size() != bin_.size()) throw InvalidArgument("targets do not match the smoother design");
    const auto est = node_estimates(y);
    std::vector<double> fitted(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        fitted[i] = (1.0 - frac_[i]) * est[bin_[i]] + frac_[i] * est[bin_[i] + 1];
    }
    return fitted;
}

KernelCurve nadaraya_watson(std::span<const double> x, std::span<const double> y, double bandwidth,
                            std::span<const double> at) {
    if (x.size() != y.size() || x.empty()) throw InvalidArgument("kernel regression needs matching, non-empty data");
    if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be > 0");
    KernelCurve curve{{at.begin(), at.end()}, std::vector<double>(at.size()), std::vector<double>(at.size())};
    parallel_for(0, at.size(), [&](std::size_t g) {
        double sw = 0.0;
        double swy = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - at[g]) / bandwidth;
            const double w = std::exp(-0.5 * u * u);
            sw += w;
            swy += w * y[i];
        }
        const double m = sw > 0.0 ? swy / sw : 0.0;
        double sww = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double u = (x[i] - at[g]) / bandwidth;
            const double w = std::exp(-0.5 * u * u);
            const double r = y[i] - m;
            sww += w * w * r * r;
        }
        curve.value[g] = m;
        curve.standard_error[g] = sw > 0.0 ? std::sqrt(sww) / sw : 0.0;
    });
    return curve;
}

}  // namespace klrlab
