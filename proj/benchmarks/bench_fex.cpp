#include <benchmark/benchmark.h>

#include <string>

#include "fex/corpus.hpp"
#include "fex/program_model.hpp"
#include "fex/query.hpp"
#include "fex/slicer.hpp"

namespace {

// `n` files, each with a few functions that read and write shared state.
fex::SourceProject synthetic_project(int n) {
    std::vector<fex::SourceFile> files;
    for (int f = 0; f < n; ++f) {
        const std::string k = std::to_string(f);
        std::string text = "int level_" + k + " = 0;\n";
        text += "int sensor_read_" + k + "(int channel) {\n  int raw = channel * 3;\n  if (raw > 10) {\n"
                "    raw = raw - level_" + k + ";\n  }\n  return raw;\n}\n";
        text += "void display_update_" + k + "(int value) {\n  int shown = 0;\n  for (int i = 0; i < value; i++) {\n"
                "    shown += sensor_read_" + k + "(i);\n  }\n  level_" + k + " = shown;\n}\n";
        text += "int temperature_" + k + "(void) {\n  int t = sensor_read_" + k + "(" + k + ");\n"
                "  display_update_" + k + "(t);\n  return t + level_" + k + ";\n}\n";
        files.push_back({"src/file" + k + ".c", text});
    }
    return fex::make_project(files);
}

void BM_BuildCorpus(benchmark::State& state) {
    const auto p = synthetic_project(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fex::build_corpus(p));
}
BENCHMARK(BM_BuildCorpus)->Arg(10)->Arg(100);

void BM_BuildModel(benchmark::State& state) {
    const auto p = synthetic_project(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fex::build_program_model(p));
}
BENCHMARK(BM_BuildModel)->Arg(10)->Arg(100);

void BM_QueryVsm(benchmark::State& state) {
    const auto c = fex::build_corpus(synthetic_project(static_cast<int>(state.range(0))));
    const auto q = fex::make_query({"temperature", "sensor"}, 0.85);
    for (auto _ : state) benchmark::DoNotOptimize(fex::slice_corpus(c, q));
}
BENCHMARK(BM_QueryVsm)->Arg(10)->Arg(100);

void BM_QueryLsi(benchmark::State& state) {
    const auto base = fex::build_corpus(synthetic_project(static_cast<int>(state.range(0))));
    const auto c = fex::reduce_lsi(base, fex::default_lsi_rank(base));
    const auto q = fex::make_query({"temperature", "sensor"}, 0.85);
    for (auto _ : state) benchmark::DoNotOptimize(fex::slice_corpus(c, q, fex::Model::lsi));
}
BENCHMARK(BM_QueryLsi)->Arg(10)->Arg(50);

void BM_Slice(benchmark::State& state) {
    const auto p = synthetic_project(static_cast<int>(state.range(0)));
    const auto c = fex::build_corpus(p);
    const auto m = fex::build_program_model(p);
    const auto seeds = fex::slice_corpus(c, fex::make_query({"display"}, 0.85)).seeds();
    for (auto _ : state) benchmark::DoNotOptimize(fex::extract_feature(m, seeds, {{"display"}, 0.85, 2}));
}
BENCHMARK(BM_Slice)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
