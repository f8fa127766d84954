#include <string>

#include <benchmark/benchmark.h>

#include "nicmap/bipartition.hpp"
#include "nicmap/metrics.hpp"

namespace {

using namespace nicmap;

Workload bundled(int k) {
    return load_workload(std::string(NICMAP_DATA_DIR) + "/synt_workload_" + std::to_string(k) + ".json");
}

void BM_Map(benchmark::State& state) {
    const auto s = static_cast<Strategy>(state.range(0));
    const auto w = bundled(static_cast<int>(state.range(1)));
    const ClusterSpec spec;
    for (auto _ : state) benchmark::DoNotOptimize(map_workload(s, w, spec));
    state.SetLabel(std::string(to_string(s)) + "/" + w.name);
}
BENCHMARK(BM_Map)->ArgsProduct({{0, 1, 2, 3}, {1, 4}})->Unit(benchmark::kMicrosecond);

void BM_Simulate(benchmark::State& state) {
    const auto w = bundled(static_cast<int>(state.range(0)));
    const ClusterSpec spec;
    const auto pl = map_workload(Strategy::New, w, spec);
    std::uint64_t messages = 0;
    for (auto _ : state) {
        auto raw = run(w, pl, spec);
        messages = raw.messages.size();
        benchmark::DoNotOptimize(aggregate(raw));
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * messages));
    state.SetLabel(w.name);
}
BENCHMARK(BM_Simulate)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_Bisect(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    WeightedGraph g(n);
    for (std::size_t u = 0; u < n; ++u)
        for (std::size_t v = u + 1; v < n; ++v)
            if ((u * 31 + v * 17) % 5 < 2) g.add_edge(u, v, 1.0 + static_cast<double>((u + v) % 7));
    for (auto _ : state) benchmark::DoNotOptimize(bipartition(g));
}
BENCHMARK(BM_Bisect)->RangeMultiplier(2)->Range(16, 128)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
