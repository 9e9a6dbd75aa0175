// Serial reference kernels against their OpenMP versions. The second argument
// of each benchmark selects the path: 0 serial, 1 parallel.

#include <benchmark/benchmark.h>

#include "qimaps/estimators.hpp"
#include "qimaps/kernels.hpp"

using namespace qimaps;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(1) == 0 ? "serial" : "parallel"); }

const MapExpr& twist_map() {
    static const MapExpr m = disk_replication(make_twist_disk_map(AngleProfile::smoothstep(1.0), 0, 1, 2));
    return m;
}

std::vector<VectorN> points(std::size_t count, int dim, std::uint64_t seed) {
    std::vector<VectorN> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Xoshiro256 rng = item_rng(seed, i);
        VectorN v(dim);
        for (int k = 0; k < dim; ++k) v[k] = rng.uniform(-1.0, 1.0);
        out.push_back(v);
    }
    return out;
}

void BM_MaxReduce(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const MapExpr& m = twist_map();
    const std::uint64_t key = stream_key(1, "bench_max_reduce");
    auto score = [&](std::size_t i) {
        Xoshiro256 rng = item_rng(key, i);
        const VectorN x{rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
        return norm(m.eval_unchecked(x) - x);
    };
    for (auto _ : state) {
        benchmark::DoNotOptimize(max_reduce(exec_of(state), n, score));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
    label(state);
}
BENCHMARK(BM_MaxReduce)->ArgsProduct({{100'000, 1'000'000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_NearestDistances(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const std::vector<VectorN> pts = points(20'000, dim, 7);
    const std::vector<VectorN> queries = points(2'000, dim, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(state.range(1) == 0 ? nearest_distances_serial(pts, queries)
                                                     : nearest_distances_parallel(pts, queries));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 2'000);
    label(state);
}
BENCHMARK(BM_NearestDistances)->ArgsProduct({{2, 3}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_BilipLowerBound(benchmark::State& state) {
    SamplerConfig s;
    s.seed = 1;
    s.region = Region::ball(2, 300.0);
    s.n_pairs = static_cast<std::size_t>(state.range(0));
    s.exec = exec_of(state);
    for (auto _ : state) {
        benchmark::DoNotOptimize(bilip_lower_bound(twist_map(), s));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
    label(state);
}
BENCHMARK(BM_BilipLowerBound)->ArgsProduct({{100'000}, {0, 1}})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
