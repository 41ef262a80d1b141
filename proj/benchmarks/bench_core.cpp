#include <benchmark/benchmark.h>

#include <vector>

#include "vcsem/sampler.hpp"
#include "vcsem/simulate.hpp"

using namespace vcsem;

namespace {

Simulation scenario(int p, int n) {
    ScenarioConfig cfg;
    cfg.p = p;
    cfg.n = n;
    cfg.seed = 1;
    return simulate(cfg);
}

void BM_BasisEvaluate(benchmark::State& state) {
    const BasisSpec spec(static_cast<int>(state.range(0)), 0.0, 1.0);
    std::vector<double> out(static_cast<std::size_t>(spec.size()));
    double z = 0.0;
    for (auto _ : state) {
        spec.evaluate_into(z, out);
        benchmark::DoNotOptimize(out.data());
        z += 0.000123;
        if (z > 1.0) z = 0.0;
    }
}
BENCHMARK(BM_BasisEvaluate)->Arg(4)->Arg(10)->Arg(20);

void BM_DatasetLogLikelihood(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const Simulation sim = scenario(p, 1000);
    const BasisSpec spec(10, 0.0, 1.0);
    Dataset unit = sim.data.observed;
    const CovariateScaling scaling = CovariateScaling::from_range(sim.data.observed.z_span());
    for (Eigen::Index i = 0; i < unit.n(); ++i) unit.z[i] = scaling.forward(unit.z[i]);
    SplineCoefficients beta(p, 10);
    for (int j = 0; j < p; ++j)
        for (int l = 0; l < p; ++l)
            if (sim.truth.r(j, l))
                for (double& v : beta.edge(j, l)) v = 0.3;
    for (auto _ : state) benchmark::DoNotOptimize(dataset_log_likelihood(unit, beta, spec, sim.truth.s));
    state.SetItemsProcessed(state.iterations() * unit.n());
}
BENCHMARK(BM_DatasetLogLikelihood)->Arg(5)->Arg(10)->Arg(20)->Unit(benchmark::kMicrosecond);

void BM_SamplerSweep(benchmark::State& state) {
    const int p = static_cast<int>(state.range(0));
    const Simulation sim = scenario(p, static_cast<int>(state.range(1)));
    GibbsSampler sampler(sim.data.observed, Hyperparameters{}, SamplerOptions{}, 1);
    for (int i = 0; i < 20; ++i) sampler.sweep(true);
    for (auto _ : state) sampler.sweep(false);
}
BENCHMARK(BM_SamplerSweep)->Args({5, 500})->Args({10, 1000})->Args({10, 125})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
