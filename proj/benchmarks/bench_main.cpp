#include <benchmark/benchmark.h>

#include <cmath>

#include "hyperlab/asymptotics.hpp"
#include "hyperlab/carleman.hpp"
#include "hyperlab/evolution.hpp"
#include "hyperlab/warped_curvature.hpp"

using namespace hyperlab;

namespace {

Eigen::VectorXcd smooth_field(const geometry::RadialGrid& g) {
  Eigen::VectorXcd f(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) f[static_cast<Eigen::Index>(i)] = std::exp(-std::pow(g.nodes[i] - 2.0, 2));
  return f;
}

void BM_CrankNicolsonStep(benchmark::State& state) {
  const auto g = geometry::RadialGrid::cell_centered(3, 8.0, static_cast<int>(state.range(0)));
  evolution::EvolutionParams p;
  p.a = 0.0;
  p.b = 1.0;
  p.dt = 1e-3;
  const evolution::CrankNicolson cn(g, 1, p);
  evolution::FieldState s{smooth_field(g), 0.0, 1};
  for (auto _ : state) {
    s = cn.step(s);
    benchmark::DoNotOptimize(s.values.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CrankNicolsonStep)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_ConjugatedApply(benchmark::State& state) {
  const auto g = geometry::RadialGrid::cell_centered(3, 8.0, static_cast<int>(state.range(0)));
  const auto L = evolution::mode_graph(g, 1);
  carleman::WeightSpec w;
  w.gamma = 0.5;
  w.n = 3;
  const evolution::ConjugatedOperator op(L, evolution::radial_weight_field(g, w, 0.0), 0.0, 1.0);
  const auto f = smooth_field(g);
  for (auto _ : state) benchmark::DoNotOptimize(op.commutator_form(f));
}
BENCHMARK(BM_ConjugatedApply)->RangeMultiplier(4)->Range(256, 16384);

void BM_CarlemanRatio(benchmark::State& state) {
  carleman::WeightSpec s;
  s.kind = carleman::WeightKind::schrodinger_moving;
  s.R = 12.0;
  carleman::TestBump b;
  b.rho_c = 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(carleman::carleman_ratio(s, b, carleman::EvolutionOperator::schrodinger));
}
BENCHMARK(BM_CarlemanRatio)->Unit(benchmark::kMillisecond);

void BM_LaplaceProbe(benchmark::State& state) {
  const double rho = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(asymptotics::laplace_probe(1.0, rho, 0.5));
}
BENCHMARK(BM_LaplaceProbe)->Arg(10)->Arg(100)->Arg(1000);

void BM_CurvatureClosed(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto spec = curvature::anisotropic_example_metric(n);
  const curvature::Angles th(n - 1, 0.9);
  for (auto _ : state) benchmark::DoNotOptimize(curvature::curvature_closed(spec, 2.0, th));
}
BENCHMARK(BM_CurvatureClosed)->DenseRange(2, 4);

}  // namespace
BENCHMARK_MAIN();
