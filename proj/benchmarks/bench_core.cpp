#include "support.hpp"

#include "personagraph/report.hpp"

#include <benchmark/benchmark.h>

using namespace pgtest;

namespace {

const Dataset& replica() {
    static const Dataset d = replica_dataset();
    return d;
}

DetectorParams params() {
    DetectorParams p;
    p.analysis_date = ts("2025-03-27T00:00:00Z");
    return p;
}

void BM_Upsert(benchmark::State& state) {
    const auto n = state.range(0);
    std::vector<std::string> keys;
    for (std::int64_t i = 0; i < n; ++i) keys.push_back("user-" + std::to_string(i));
    for (auto _ : state) {
        GraphStore g;
        for (const auto& k : keys) g.upsert(NodeLabel::GithubUser, k, {{"login", k}});
        for (const auto& k : keys) g.upsert(NodeLabel::GithubUser, k); // second pass hits existing nodes
        benchmark::DoNotOptimize(g.node_count());
    }
    state.SetItemsProcessed(state.iterations() * n * 2);
}
BENCHMARK(BM_Upsert)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_IngestReplica(benchmark::State& state) {
    for (auto _ : state) {
        auto g = build_store(replica());
        benchmark::DoNotOptimize(g.edge_count());
    }
}
BENCHMARK(BM_IngestReplica)->Unit(benchmark::kMillisecond);

void BM_ContributorStats(benchmark::State& state) {
    const auto g = build_store(replica());
    for (auto _ : state) {
        auto rows = contributor_stats(g, kXz);
        benchmark::DoNotOptimize(rows.data());
    }
}
BENCHMARK(BM_ContributorStats)->Unit(benchmark::kMicrosecond);

void BM_Detectors(benchmark::State& state) {
    const auto g = build_store(replica());
    const auto p = params();
    for (auto _ : state) {
        auto a = detect_self_merge(g, p);
        auto b = detect_share_presence(g, p);
        benchmark::DoNotOptimize(a.data());
        benchmark::DoNotOptimize(b.data());
    }
}
BENCHMARK(BM_Detectors)->Unit(benchmark::kMicrosecond);

void BM_DetectorsRandom(benchmark::State& state) {
    RandomLimits limits;
    limits.max_commits = static_cast<int>(state.range(0));
    limits.max_users = 200;
    limits.max_prs = 300;
    const auto data = random_dataset(99, limits);
    const auto g = build_store(data);
    DetectorParams p;
    p.analysis_date = data.analysis_date;
    for (auto _ : state) {
        auto a = detect_self_merge(g, p);
        auto b = detect_share_presence(g, p);
        benchmark::DoNotOptimize(a.size() + b.size());
    }
}
BENCHMARK(BM_DetectorsRandom)->Arg(500)->Arg(5000)->Unit(benchmark::kMicrosecond);

void BM_RenderReport(benchmark::State& state) {
    const auto g = build_store(replica());
    const auto report = anonymize(build_report(g, params()), {});
    for (auto _ : state) {
        for (auto f : {ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json})
            benchmark::DoNotOptimize(render(report, f).size());
    }
}
BENCHMARK(BM_RenderReport)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
