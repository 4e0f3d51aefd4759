#include "klrlab/knn.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include "klrlab/error.hpp"
#include "klrlab/parallel.hpp"

namespace klrlab {

namespace {

constexpr std::size_t kLeafSize = 16;

struct Node {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t split_dim = 0;
    double split_value = 0.0;
    std::ptrdiff_t left = -1;
    std::ptrdiff_t right = -1;
};

using Candidate = std::pair<double, std::size_t>;

class KdTree {
  public:
    explicit KdTree(const FeatureMatrix& features) : features_(features), order_(features.rows()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(2 * features.rows() / kLeafSize + 2);
        build(0, order_.size());
    }

    void query(std::size_t row, std::size_t k, std::vector<Candidate>& heap) const {
        heap.clear();
        search(0, features_.row(row), k, heap);
        std::sort_heap(heap.begin(), heap.end());
    }

  private:
    std::ptrdiff_t build(std::size_t begin, std::size_t end) {
        const auto id = static_cast<std::ptrdiff_t>(nodes_.size());
        nodes_.push_back(Node{begin, end});
        if (end - begin <= kLeafSize) return id;

        const std::size_t d = features_.dims;
        std::size_t best_dim = 0;
        double best_spread = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            double lo = features_.row(order_[begin])[j];
            double hi = lo;
            for (std::size_t i = begin + 1; i < end; ++i) {
                const double v = features_.row(order_[i])[j];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi - lo > best_spread) {
                best_spread = hi - lo;
                best_dim = j;
            }
        }
        if (best_spread <= 0.0) return id;

        const std::size_t mid = begin + (end - begin) / 2;
        auto less = [&](std::size_t a, std::size_t b) {
            const double va = features_.row(a)[best_dim];
            const double vb = features_.row(b)[best_dim];
            return va < vb || (va == vb && a < b);
        };
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end), less);
        nodes_[id].split_dim = best_dim;
        nodes_[id].split_value = features_.row(order_[mid])[best_dim];
        const auto left = build(begin, mid);
        const auto right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    double distance2(const double* a, const double* b) const {
        double acc = 0.0;
        for (std::size_t j = 0; j < features_.dims; ++j) {
            const double diff = a[j] - b[j];
            acc += diff * diff;
        }
        return acc;
    }

    void search(std::ptrdiff_t id, const double* query, std::size_t k, std::vector<Candidate>& heap) const {
        const Node& node = nodes_[id];
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) {
                const std::size_t r = order_[i];
                const Candidate c{distance2(query, features_.row(r)), r};
                if (heap.size() < k) {
                    heap.push_back(c);
                    std::push_heap(heap.begin(), heap.end());
                } else if (c < heap.front()) {
                    std::pop_heap(heap.begin(), heap.end());
                    heap.back() = c;
                    std::push_heap(heap.begin(), heap.end());
                }
            }
            return;
        }
        const double gap = query[node.split_dim] - node.split_value;
        const std::ptrdiff_t near = gap < 0.0 ? node.left : node.right;
        const std::ptrdiff_t far = gap < 0.0 ? node.right : node.left;
        search(near, query, k, heap);
        if (heap.size() < k || gap * gap <= heap.front().first) search(far, query, k, heap);
    }

    const FeatureMatrix& features_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

}  // namespace

NeighborTable self_neighbors(const FeatureMatrix& features, std::size_t k) {
    const std::size_t n = features.rows();
    if (features.dims == 0) throw InvalidArgument("features need at least one dimension");
    if (k < 1 || k > n) throw InvalidArgument("k must satisfy 1 <= k <= N");

    const KdTree tree(features);
    NeighborTable table{k, std::vector<std::size_t>(n * k)};
    const std::size_t workers = std::max<std::size_t>(1, std::min(thread_count(), n));
    const std::size_t chunk = (n + workers - 1) / workers;
    parallel_for(0, workers, [&](std::size_t w) {
        std::vector<Candidate> heap;
        heap.reserve(k);
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        for (std::size_t r = lo; r < hi; ++r) {
            tree.query(r, k, heap);
            for (std::size_t j = 0; j < k; ++j) table.indices[r * k + j] = heap[j].second;
        }
    });
    return table;
}

std::vector<double> average_over_neighbors(const NeighborTable& table, std::span<const double> targets) {
    const std::size_t n = targets.size();
    if (table.indices.size() != n * table.k) throw InvalidArgument("neighbour table does not match targets");
    std::vector<double> fitted(n);
    const double inv_k = 1.0 / static_cast<double>(table.k);
    for (std::size_t r = 0; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t idx : table.of(r)) acc += targets[idx];
        fitted[r] = acc * inv_k;
    }
    return fitted;
}

std::vector<double> knn_conditional_mean(const FeatureMatrix& features, std::span<const double> targets,
                                         std::size_t k) {
    if (features.rows() != targets.size()) throw InvalidArgument("features and targets differ in length");
    return average_over_neighbors(self_neighbors(features, k), targets);
}

}  // namespace klrlab
