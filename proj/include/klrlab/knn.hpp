#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace klrlab {

/// Row-major N x d feature matrix view.
struct FeatureMatrix {
    std::span<const double> data;
    std::size_t dims = 1;

    std::size_t rows() const noexcept { return dims == 0 ? 0 : data.size() / dims; }
    const double* row(std::size_t r) const noexcept { return data.data() + r * dims; }
};

/// k nearest rows of every row (self included), ordered by (squared
/// Euclidean distance, row index). The ordering is a total order, so the table
/// is identical for any traversal or thread schedule.
struct NeighborTable {
    std::size_t k = 0;
    std::vector<std::size_t> indices;  // N * k, row-major

    std::span<const std::size_t> of(std::size_t r) const noexcept { return {indices.data() + r * k, k}; }
};

/// Exact kd-tree search; queries run in parallel over rows.
NeighborTable self_neighbors(const FeatureMatrix& features, std::size_t k);

/// fitted[r] = mean of targets over the neighbours of r.
std::vector<double> average_over_neighbors(const NeighborTable& table, std::span<const double> targets);

std::vector<double> knn_conditional_mean(const FeatureMatrix& features, std::span<const double> targets,
                                         std::size_t k);

}  // namespace klrlab
