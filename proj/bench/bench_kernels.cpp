// OpenMP kernels against their serial twins on an Enron-shaped corpus.

#include "commgraph/demo.hpp"
#include "commgraph/ingest.hpp"
#include "commgraph/kernels.hpp"
#include "commgraph/levels.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <sstream>

using namespace commgraph;

namespace {

const Corpus& corpus() {
    static const Corpus c = [] {
        std::istringstream in(makeEnronShapedCsv(151, 200'000, 7));
        return ingest(in, InputFormat::Csv, demoMapping()).corpus;
    }();
    return c;
}

const std::vector<MessageIndex>& everything() {
    static const std::vector<MessageIndex> all = [] {
        std::vector<MessageIndex> v(corpus().messageCount());
        std::iota(v.begin(), v.end(), MessageIndex{0});
        return v;
    }();
    return all;
}

DynamicsParams params() {
    DynamicsParams p;
    p.sigma = 2 * 3600;
    p.theta = 1.5;
    return p;
}

template <bool Parallel>
void volume(benchmark::State& state) {
    for (auto _ : state) {
        auto t = Parallel ? kernels::volumeTable(corpus(), everything()) : reference::volumeTable(corpus(), everything());
        benchmark::DoNotOptimize(t);
    }
}

template <bool Parallel>
void histograms(benchmark::State& state) {
    const VolumeTable table = kernels::volumeTable(corpus(), everything());
    const TimeRange range = *corpus().timeExtent();
    for (auto _ : state) {
        auto h = Parallel ? kernels::pairHistograms(corpus(), everything(), table, range, 32)
                          : reference::pairHistograms(corpus(), everything(), table, range, 32);
        benchmark::DoNotOptimize(h);
    }
}

template <bool Parallel>
void episodes(benchmark::State& state) {
    const auto streams = conversationsOf(corpus(), everything());
    const DynamicsParams p = params();
    for (auto _ : state) {
        auto e = Parallel ? kernels::segmentAll(corpus(), streams, p) : reference::segmentAll(corpus(), streams, p);
        benchmark::DoNotOptimize(e);
    }
}

template <bool Parallel>
void timeMask(benchmark::State& state) {
    const TimeRange r = *corpus().timeExtent();
    const Timestamp mid = r.start + (r.end - r.start) / 2;
    const auto pred = [&](MessageIndex i) { return corpus().message(i).timestamp >= mid; };
    for (auto _ : state) {
        auto m = Parallel ? kernels::maskWhere(corpus().messageCount(), pred)
                          : reference::maskWhere(corpus().messageCount(), pred);
        benchmark::DoNotOptimize(m);
    }
}

} // namespace

BENCHMARK(volume<false>)->Name("volume/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(volume<true>)->Name("volume/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(histograms<false>)->Name("histograms/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(histograms<true>)->Name("histograms/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(episodes<false>)->Name("episodes/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(episodes<true>)->Name("episodes/openmp")->Unit(benchmark::kMillisecond);
BENCHMARK(timeMask<false>)->Name("mask/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(timeMask<true>)->Name("mask/openmp")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    // Build the corpus before the first timed loop.
    everything();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
