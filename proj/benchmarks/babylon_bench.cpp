#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "babylon/extractor.hpp"
#include "babylon/ingest.hpp"
#include "babylon/pipeline.hpp"
#include "babylon/vector_store.hpp"

using namespace babylon;

namespace {

// Synthetic stream: `templates` rotating event shapes, digit-bearing values.
std::vector<LogRecord> synthetic_stream(std::size_t lines, std::size_t templates) {
    static const char* shapes[] = {
        "Connected to host-%d:9092",      "GC pause %dms",
        "Opened session u%d successfully", "Failed to connect to 10.0.0.%d",
        "Replica lag is %dms",             "Draining task queue t_%d",
        "Publishing metrics batch %d",     "Evicting cold page 0x%x",
    };
    std::vector<LogRecord> records;
    records.reserve(lines);
    char buffer[128];
    for (std::size_t i = 0; i < lines; ++i) {
        std::snprintf(buffer, sizeof(buffer), shapes[i % templates],
                      static_cast<int>(i % 1000));
        LogRecord record;
        record.line_id = static_cast<int>(i + 1);
        record.source = "bench";
        record.content = buffer;
        record.tokens = tokenize(record.content);
        records.push_back(std::move(record));
    }
    return records;
}

void BM_PipelineStream(benchmark::State& state) {
    auto records = synthetic_stream(static_cast<std::size_t>(state.range(0)), 8);
    for (auto _ : state) {
        HeuristicExtractor extractor;
        Pipeline pipeline(extractor);
        for (const auto& record : records) benchmark::DoNotOptimize(pipeline.process_log(record));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_PipelineStream)->Arg(1000)->Arg(10000);

void BM_TreeSearch(benchmark::State& state) {
    auto records = synthetic_stream(2000, 8);
    HeuristicExtractor extractor;
    Pipeline pipeline(extractor);
    for (const auto& record : records) pipeline.process_log(record);
    const ParserState& parser = pipeline.state();

    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(parser.search(records[i % records.size()].tokens));
        ++i;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TreeSearch);

void BM_FullScanClassify(benchmark::State& state) {
    auto records = synthetic_stream(2000, 8);
    HeuristicExtractor extractor;
    Pipeline pipeline(extractor);
    for (const auto& record : records) pipeline.process_log(record);
    const ParserState& parser = pipeline.state();

    std::size_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(parser.find_loose_matches(records[i % records.size()].tokens));
        ++i;
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FullScanClassify);

void BM_Retrieve(benchmark::State& state) {
    HashedEmbeddingProvider provider(64);
    VectorStore store(64);
    std::mt19937 rng(7);
    for (int i = 0; i < state.range(0); ++i) {
        std::string text = "entry";
        for (int j = 0; j < 5; ++j) text += " tok" + std::to_string(rng() % 128);
        store.add(text, embed(text, provider));
    }
    EmbeddingVector query = embed("probe tok1 tok2 tok3", provider);
    for (auto _ : state) benchmark::DoNotOptimize(store.retrieve(query, 5));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Retrieve)->Arg(1000)->Arg(10000);

} // namespace

BENCHMARK_MAIN();
