#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "powerspace/dualsum.hpp"
#include "powerspace/kernelmodel.hpp"
#include "powerspace/kfunctional.hpp"
#include "powerspace/spectrum.hpp"
#include "random_instances.hpp"

namespace ps = powerspace;

namespace {

struct Instance {
  ps::EigenSpectrum mu;
  ps::CoeffSeq x;
};

Instance make_instance(std::size_t n) {
  auto rng = ps::testing::make_rng(n);
  auto mu = ps::testing::random_spectrum(rng, n, 1e-8);
  auto x = ps::testing::random_coeffs(rng, n);
  return {std::move(mu), std::move(x)};
}

void BM_PowerNorm(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)));
  const ps::PowerParams p(0.5, ps::FineIndex(1.5));
  for (auto _ : state) benchmark::DoNotOptimize(ps::power_norm(in.x, in.mu, p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_PowerNorm)->RangeMultiplier(4)->Range(64, 16384)->Complexity();

void BM_DualExtremal(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)));
  const ps::PowerParams p(0.5, ps::FineIndex(1.5));
  for (auto _ : state) benchmark::DoNotOptimize(ps::dual_norm_extremal(in.x, in.mu, p).attained);
}
BENCHMARK(BM_DualExtremal)->RangeMultiplier(4)->Range(64, 16384);

void BM_KFunctional(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)));
  const ps::WeightedCouple couple(in.mu);
  const auto reg = ps::k_regimes(in.x, couple);
  const double t = std::sqrt(reg.t_lower * reg.t_upper);
  for (auto _ : state) benchmark::DoNotOptimize(ps::k_functional(in.x, t, couple));
}
BENCHMARK(BM_KFunctional)->RangeMultiplier(4)->Range(64, 4096);

// one full profile per iteration; dominated by the adaptive panels
void BM_InterpNorm(benchmark::State& state) {
  const auto in = make_instance(static_cast<std::size_t>(state.range(0)));
  const ps::WeightedCouple couple(in.mu);
  const auto grid = ps::QuadratureGrid::default_for(couple.spectrum());
  const ps::PowerParams p(0.5, ps::FineIndex(2.0));
  for (auto _ : state) benchmark::DoNotOptimize(ps::interp_norm(in.x, p, couple, grid));
}
BENCHMARK(BM_InterpNorm)->RangeMultiplier(4)->Range(64, 1024)->Unit(benchmark::kMillisecond);

void BM_NystromBrownianBridge(benchmark::State& state) {
  const auto m = ps::QuadratureMeasure::uniform(static_cast<std::size_t>(state.range(0)));
  const auto gram = ps::build_gram(ps::KernelSpec::brownian_bridge(), m);
  for (auto _ : state) benchmark::DoNotOptimize(ps::nystrom_eig(gram, m).rank);
}
BENCHMARK(BM_NystromBrownianBridge)->RangeMultiplier(2)->Range(64, 512)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
