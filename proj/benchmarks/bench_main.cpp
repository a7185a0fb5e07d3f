#include <benchmark/benchmark.h>

#include <string>

#include "optwedge/cost.hpp"
#include "optwedge/models.hpp"
#include "optwedge/optimize.hpp"
#include "optwedge/synth.hpp"

using namespace optwedge;

namespace {

const CognitiveModel& fitted_model() {
  static const CognitiveModel m = load_model(std::string(OPTWEDGE_BENCH_DATA_DIR) + "/fixtures/model_gp.json");
  return m;
}

const CognitiveModel& latent_model() {
  static const CognitiveModel m = LatentField{}.as_model();
  return m;
}

}  // namespace

static void BM_KlClosedForm(benchmark::State& state) {
  const Gauss2Diag q{{5.0, 0.0}, 0.1, 0.1};
  Gauss2Diag p{{6.0, 0.0}, 1.0, 1.0};
  for (auto _ : state) {
    p.mean.x += 1e-12;
    benchmark::DoNotOptimize(kl_qp(q, p));
  }
}
BENCHMARK(BM_KlClosedForm);

static void BM_GpPredict(benchmark::State& state) {
  const auto& m = fitted_model();
  double theta = 0.9;
  for (auto _ : state) {
    theta = theta > 2.0 ? 0.9 : theta + 1e-3;
    benchmark::DoNotOptimize(m.predict(theta, 9.0, 4.0));
  }
}
BENCHMARK(BM_GpPredict);

static void BM_CostFitted(benchmark::State& state) {
  const CostContext ctx{&fitted_model(), 4.0};
  for (auto _ : state) benchmark::DoNotOptimize(cost_f(ctx, {0.9, 9.0, 4.0}));
}
BENCHMARK(BM_CostFitted);

static void BM_Landscape(benchmark::State& state) {
  const CostContext ctx{&fitted_model(), 4.0};
  const ConstraintSet cons;
  const int res = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(grid_landscape(ctx, cons, res).argmin);
  state.SetItemsProcessed(state.iterations() * res * res);
}
BENCHMARK(BM_Landscape)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_OptimizeUow(benchmark::State& state) {
  const bool fitted = state.range(0) != 0;
  const CostContext ctx{fitted ? &fitted_model() : &latent_model(), 6.0};
  const ConstraintSet cons;
  for (auto _ : state) benchmark::DoNotOptimize(optimize_uow(ctx, cons).objective);
  state.SetLabel(fitted ? "fitted-gp" : "latent");
}
BENCHMARK(BM_OptimizeUow)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_OptimizeAll(benchmark::State& state) {
  const CostContext ctx{&fitted_model(), 1.0};
  const std::vector<double> d{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  for (auto _ : state) benchmark::DoNotOptimize(optimize_all(ctx, d, ConstraintSet{}).size());
}
BENCHMARK(BM_OptimizeAll)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
