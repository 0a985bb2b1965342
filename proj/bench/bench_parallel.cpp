#include <benchmark/benchmark.h>

#include "cgr/scenario.hpp"
#include "cgr/sim.hpp"

using namespace cgr;

namespace {

ScenarioSpec spec(int hours) {
  ScenarioSpec s;
  s.horizon_s = hours * 3600;
  return s;
}

const ContactPlan& plan() {
  static const ContactPlan cp = build_contact_plan(spec(6));
  return cp;
}

std::vector<SimConfig> points() {
  SimConfig base;
  base.period = 3600 * 1000;
  const std::vector<std::optional<int>> bufs{1, 5, std::nullopt};
  const std::vector<int> nb{50, 200};
  return buffer_experiment_points(base, bufs, nb);
}

void BM_PlanSerial(benchmark::State& st) {
  const auto s = spec(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_contact_plan_serial(s));
}

void BM_PlanParallel(benchmark::State& st) {
  const auto s = spec(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(build_contact_plan(s));
}

void BM_SweepSerial(benchmark::State& st) {
  const auto pts = points();
  (void)plan();
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep_serial(plan(), pts));
}

void BM_SweepParallel(benchmark::State& st) {
  const auto pts = points();
  (void)plan();
  for (auto _ : st) benchmark::DoNotOptimize(run_sweep(plan(), pts));
}

}  // namespace

BENCHMARK(BM_PlanSerial)->Arg(6)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PlanParallel)->Arg(6)->Arg(24)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
