#pragma once

// Reduction kernels shared by the estimators. Each kernel has a serial
// reference and an OpenMP version; both return bit-identical results because
// the reductions (max with lowest-index tie-break, min, count) do not depend on
// evaluation order.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "qimaps/core.hpp"

namespace qimaps {

enum class Exec { serial, parallel };

/// Result of a max reduction over scores s(0..n-1). Indices whose score is
/// -inf are treated as skipped.
struct MaxResult {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t index = 0;
    std::size_t used = 0;

    bool any() const noexcept { return used > 0; }

    void offer(double v, std::size_t i) noexcept {
        if (v == -std::numeric_limits<double>::infinity()) return;
        ++used;
        if (v > value || (v == value && i < index) || used == 1) {
            value = v;
            index = i;
        }
    }

    void merge(const MaxResult& o) noexcept {
        if (o.used == 0) return;
        if (used == 0 || o.value > value || (o.value == value && o.index < index)) {
            value = o.value;
            index = o.index;
        }
        used += o.used;
    }
};

template <class Score>
MaxResult max_reduce_serial(std::size_t n, Score&& score) {
    MaxResult r;
    for (std::size_t i = 0; i < n; ++i) r.offer(score(i), i);
    return r;
}

template <class Score>
MaxResult max_reduce_parallel(std::size_t n, Score&& score) {
    MaxResult total;
#pragma omp parallel
    {
        MaxResult local;
#pragma omp for schedule(static) nowait
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            local.offer(score(static_cast<std::size_t>(i)), static_cast<std::size_t>(i));
        }
#pragma omp critical(qimaps_max_reduce)
        total.merge(local);
    }
    return total;
}

template <class Score>
MaxResult max_reduce(Exec exec, std::size_t n, Score&& score) {
    return exec == Exec::serial ? max_reduce_serial(n, score) : max_reduce_parallel(n, score);
}

/// Fills out[i] = f(i) for i < out.size().
template <class T, class F>
void map_indices(Exec exec, std::vector<T>& out, F&& f) {
    const auto n = static_cast<std::int64_t>(out.size());
    if (exec == Exec::serial) {
        for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
        return;
    }
#pragma omp parallel for schedule(dynamic, 64)
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
}

/// Nearest-neighbour distances from each query to a point set.
/// The serial version is a brute-force scan; the parallel version searches a
/// uniform bucket grid ring by ring. Both compute the exact minimum of the same
/// Euclidean distances and agree bit for bit.
std::vector<double> nearest_distances_serial(const std::vector<VectorN>& points, const std::vector<VectorN>& queries);
std::vector<double> nearest_distances_parallel(const std::vector<VectorN>& points, const std::vector<VectorN>& queries);

}  // namespace qimaps
