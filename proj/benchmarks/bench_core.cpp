#include <benchmark/benchmark.h>

#include "mp/evolve.hpp"
#include "mp/io.hpp"

namespace {

mp::SystemState demo_state(int n) {
    mp::RunConfig cfg;
    cfg.n = n;
    cfg.preset = "gaussian-packet";
    cfg.nuclei.R.push_back({4.0, 4.0, 4.0});
    cfg.nuclei.Z.push_back(1.0);
    cfg.softening = 1.0;
    mp::SystemState s = mp::build_initial_state(cfg);
    mp::enforce_gauge(s);
    return s;
}

void BM_FFTRoundTrip(benchmark::State& state) {
    mp::SystemState s = demo_state(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        mp::to_modes(s.phi);
        mp::to_samples(s.phi);
        benchmark::DoNotOptimize(s.phi.v.data());
    }
}
BENCHMARK(BM_FFTRoundTrip)->Arg(16)->Arg(32);

void BM_DiracApply(benchmark::State& state) {
    mp::SystemState s = demo_state(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto d = mp::dirac_apply(s.phi, s.A, 1);
        benchmark::DoNotOptimize(d.v.data());
    }
}
BENCHMARK(BM_DiracApply)->Arg(16)->Arg(32);

void BM_LerayProject(benchmark::State& state) {
    mp::SystemState s = demo_state(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto p = mp::leray_project(s.A);
        benchmark::DoNotOptimize(p.c[0].data());
    }
}
BENCHMARK(BM_LerayProject)->Arg(16)->Arg(32);

void BM_TotalCurrent(benchmark::State& state) {
    mp::SystemState s = demo_state(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto j = mp::total_current(s.phi, s.A);
        benchmark::DoNotOptimize(j.c[0].data());
    }
}
BENCHMARK(BM_TotalCurrent)->Arg(16)->Arg(32);

void BM_PicardStep(benchmark::State& state) {
    mp::SystemState s = demo_state(16);
    const mp::CoulombContext coul =
        mp::CoulombContext::make(s.phi.grid, s.nuclei, s.softening, s.phi.N);
    mp::StepConfig cfg;
    for (auto _ : state) {
        mp::SystemState work = s;
        auto st = mp::picard_step(work, coul, cfg);
        benchmark::DoNotOptimize(st.iters);
    }
}
BENCHMARK(BM_PicardStep);

}  // namespace

BENCHMARK_MAIN();
