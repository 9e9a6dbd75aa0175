#include "qimaps/kernels.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>

namespace qimaps {

namespace {

double dist2(const VectorN& a, const VectorN& b) noexcept {
    const VectorN d = a - b;
    return dot(d, d);
}

double nearest2_brute(const std::vector<VectorN>& points, const VectorN& q) noexcept {
    double best = std::numeric_limits<double>::infinity();
    for (const VectorN& p : points) best = std::min(best, dist2(p, q));
    return best;
}

constexpr int kMaxBucketDim = 6;

class BucketGrid {
public:
    explicit BucketGrid(const std::vector<VectorN>& points) : points_(points) {
        dim_ = points.front().dim();
        lo_ = points.front();
        VectorN hi = points.front();
        for (const VectorN& p : points) {
            for (int k = 0; k < dim_; ++k) {
                lo_[k] = std::min(lo_[k], p[k]);
                hi[k] = std::max(hi[k], p[k]);
            }
        }
        double volume = 1.0;
        double extent = 0.0;
        for (int k = 0; k < dim_; ++k) {
            extent = std::max(extent, hi[k] - lo_[k]);
        }
        if (!(extent > 0.0)) extent = 1.0;
        for (int k = 0; k < dim_; ++k) volume *= std::max(hi[k] - lo_[k], extent * 1e-6);
        // About two points per cell.
        cell_ = std::pow(2.0 * volume / static_cast<double>(points.size()), 1.0 / dim_);
        if (!(cell_ > 0.0) || !std::isfinite(cell_)) cell_ = extent;
        for (int k = 0; k < dim_; ++k) {
            max_cell_[static_cast<std::size_t>(k)] = static_cast<int>(std::floor((hi[k] - lo_[k]) / cell_));
        }
        for (std::size_t i = 0; i < points.size(); ++i) {
            buckets_[key(cell_of(points[i]))].push_back(static_cast<std::uint32_t>(i));
        }
    }

    double nearest2(const VectorN& q) const {
        const Cell c = cell_of(q);
        // Rings outside [first, last] contain no cells of the grid.
        int first = 0;
        int last = 0;
        for (int k = 0; k < dim_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            first = std::max({first, -c[kk], c[kk] - max_cell_[kk]});
            last = std::max({last, std::abs(c[kk]), std::abs(max_cell_[kk] - c[kk])});
        }
        double best = std::numeric_limits<double>::infinity();
        for (int ring = first; ring <= last; ++ring) {
            visit_ring(c, ring, [&](const Cell& cell) {
                const auto it = buckets_.find(key(cell));
                if (it == buckets_.end()) return;
                for (std::uint32_t i : it->second) best = std::min(best, dist2(points_[i], q));
            });
            const double reach = ring * cell_;
            if (best <= reach * reach) break;
        }
        return best;
    }

private:
    using Cell = std::array<int, kMaxBucketDim>;

    Cell cell_of(const VectorN& p) const {
        Cell c{};
        for (int k = 0; k < dim_; ++k) {
            c[static_cast<std::size_t>(k)] = static_cast<int>(std::floor((p[k] - lo_[k]) / cell_));
        }
        return c;
    }

    std::uint64_t key(const Cell& c) const noexcept {
        std::uint64_t h = 0xCBF29CE484222325ULL;
        for (int k = 0; k < dim_; ++k) {
            h ^= static_cast<std::uint32_t>(c[static_cast<std::size_t>(k)]);
            h *= 0x100000001B3ULL;
            h ^= h >> 29;
        }
        return h;
    }

    // Calls f on every grid cell at Chebyshev distance exactly `ring` from c.
    template <class F>
    void visit_ring(const Cell& c, int ring, F&& f) const {
        Cell lo{}, hi{}, off{};
        for (int k = 0; k < dim_; ++k) {
            const auto kk = static_cast<std::size_t>(k);
            lo[kk] = std::max(-ring, -c[kk]);
            hi[kk] = std::min(ring, max_cell_[kk] - c[kk]);
            if (lo[kk] > hi[kk]) return;
            off[kk] = lo[kk];
        }
        while (true) {
            int cheb = 0;
            for (int k = 0; k < dim_; ++k) cheb = std::max(cheb, std::abs(off[static_cast<std::size_t>(k)]));
            if (cheb == ring) {
                Cell cell{};
                for (int k = 0; k < dim_; ++k) {
                    const auto kk = static_cast<std::size_t>(k);
                    cell[kk] = c[kk] + off[kk];
                }
                f(cell);
            }
            int k = 0;
            while (k < dim_ && off[static_cast<std::size_t>(k)] == hi[static_cast<std::size_t>(k)]) {
                off[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)];
                ++k;
            }
            if (k == dim_) break;
            ++off[static_cast<std::size_t>(k)];
        }
    }

    const std::vector<VectorN>& points_;
    int dim_ = 0;
    VectorN lo_;
    double cell_ = 1.0;
    Cell max_cell_{};
    std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

void check_inputs(const std::vector<VectorN>& points, const std::vector<VectorN>& queries) {
    if (points.empty()) throw Error(Errc::empty_region, "nearest neighbour search over an empty point set");
    for (const VectorN& q : queries) require_same_dim(q.dim(), points.front().dim(), "nearest neighbour query");
}

}  // namespace

std::vector<double> nearest_distances_serial(const std::vector<VectorN>& points, const std::vector<VectorN>& queries) {
    check_inputs(points, queries);
    std::vector<double> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = std::sqrt(nearest2_brute(points, queries[i]));
    return out;
}

std::vector<double> nearest_distances_parallel(const std::vector<VectorN>& points,
                                               const std::vector<VectorN>& queries) {
    check_inputs(points, queries);
    std::vector<double> out(queries.size());
    if (points.front().dim() > kMaxBucketDim) {
        map_indices(Exec::parallel, out, [&](std::size_t i) { return std::sqrt(nearest2_brute(points, queries[i])); });
        return out;
    }
    const BucketGrid grid(points);
    map_indices(Exec::parallel, out, [&](std::size_t i) { return std::sqrt(grid.nearest2(queries[i])); });
    return out;
}

}  // namespace qimaps
