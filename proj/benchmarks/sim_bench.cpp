#include "dnas/sim/scenario.hpp"

#include <benchmark/benchmark.h>

using namespace dnas;

namespace
{
    const char *const kScenarios[] = {"happy_path.json", "cloned_tag.json", "attack_matrix.json", "e2e.json"};
}

// Full scenario runs: bootstrap, steps, settle, evaluation.
static void BM_RunScenario(benchmark::State &state)
{
    const auto name = kScenarios[state.range(0)];
    const auto scenario = sim::Scenario::load(std::filesystem::path(DNAS_SCENARIO_DIR) / name);
    state.SetLabel(name);
    for (auto _ : state)
    {
        auto out = sim::run_scenario(scenario);
        if (!out.passed)
            state.SkipWithError("scenario expectations failed");
        benchmark::DoNotOptimize(out.state_root);
    }
}
BENCHMARK(BM_RunScenario)->DenseRange(0, 3)->Unit(benchmark::kMillisecond)->Iterations(2);
BENCHMARK_MAIN();
