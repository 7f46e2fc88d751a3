#include <benchmark/benchmark.h>

#include <vector>

#include "calciner/dae.h"
#include "calciner/model.h"
#include "calciner/scenario.h"
#include "calciner/thermo.h"

using namespace calciner;

namespace {

ScenarioSpec spec_with(std::size_t n_v)
{
    ScenarioSpec s = load_scenario("base_case");
    s.geometry.n_v = n_v;
    return s;
}

CalcinerModel model_for(const ScenarioSpec& s)
{
    return CalcinerModel(*s.table, s.geometry, s.boundary, s.calibration, s.options);
}

void BM_Residual(benchmark::State& state)
{
    const ScenarioSpec s = spec_with(static_cast<std::size_t>(state.range(0)));
    const CalcinerModel m = model_for(s);
    const std::vector<double> z = m.initial_state(s.initial);
    std::vector<double> out(m.size());
    for (auto _ : state) {
        m.residual(0.0, z, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(m.segments()));
}
BENCHMARK(BM_Residual)->Arg(5)->Arg(50)->Arg(200);

void BM_Jacobian(benchmark::State& state)
{
    const ScenarioSpec s = spec_with(static_cast<std::size_t>(state.range(0)));
    const CalcinerModel m = model_for(s);
    const std::vector<double> z = m.initial_state(s.initial);
    ImplicitEuler solver(m, s.solver);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solver.residual_jacobian(0.0, z));
    }
}
BENCHMARK(BM_Jacobian)->Arg(5)->Arg(50);

// One implicit Euler step from the state reached after a minute of operation.
void BM_Step(benchmark::State& state)
{
    const ScenarioSpec s = spec_with(static_cast<std::size_t>(state.range(0)));
    const CalcinerModel m = model_for(s);
    ImplicitEuler warmup(m, s.solver);
    const std::vector<double> z0 = warmup.simulate(0.0, m.initial_state(s.initial), 60.0, 60.0).final_state;
    ImplicitEuler solver(m, s.solver);
    for (auto _ : state) {
        std::vector<double> z = z0;
        benchmark::DoNotOptimize(solver.try_step(60.0, z, 0.5));
    }
}
BENCHMARK(BM_Step)->Arg(5)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_TemperatureInversion(benchmark::State& state)
{
    const SpeciesTable table = SpeciesTable::bundled();
    const Thermo th(table);
    SpeciesVector C{};
    C[idx(SpeciesId::CaCO3)] = 3.0;
    C[idx(SpeciesId::CaO)] = 1.0;
    C[idx(SpeciesId::N2)] = 7.0;
    C[idx(SpeciesId::CO2)] = 3.0;
    const double U = th.mixture_internal_energy_density(C, 1150.0, 101325.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(th.invert_mixture_temperature(U, C, 101325.0, 900.0));
    }
}
BENCHMARK(BM_TemperatureInversion);

void BM_DynamicRun(benchmark::State& state)
{
    const ScenarioSpec s = spec_with(5);
    const CalcinerModel m = model_for(s);
    const std::vector<double> z0 = m.initial_state(s.initial);
    for (auto _ : state) {
        ImplicitEuler solver(m, s.solver);
        benchmark::DoNotOptimize(solver.simulate(0.0, z0, 600.0, 60.0).final_state);
    }
}
BENCHMARK(BM_DynamicRun)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
