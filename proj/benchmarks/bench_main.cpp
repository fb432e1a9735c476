#include <benchmark/benchmark.h>

#include "topspec/evt.hpp"
#include "topspec/field.hpp"
#include "topspec/hamiltonian.hpp"
#include "topspec/spectrum.hpp"
#include "topspec/variational.hpp"

using namespace topspec;

namespace {

std::shared_ptr<const LatticeDomain> square(int side) {
  return std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{side - 1, side - 1}));
}

std::shared_ptr<const LatticeDomain> segment(int n) {
  return std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{n - 1}));
}

void solve(benchmark::State& state, std::shared_ptr<const LatticeDomain> D, SolverKind kind) {
  const auto H = assemble(sample(D, TailSpec::exact(1.0), 1));
  EigOptions o;
  o.solver = kind;
  for (auto _ : state) benchmark::DoNotOptimize(top_eigs(H, 5, o).eigenvalues.front());
  state.SetLabel(std::to_string(D->size()) + " sites");
}

void BM_DenseSquare(benchmark::State& s) { solve(s, square(static_cast<int>(s.range(0))), SolverKind::dense); }
void BM_LanczosSquare(benchmark::State& s) { solve(s, square(static_cast<int>(s.range(0))), SolverKind::lanczos); }
void BM_Tridiagonal(benchmark::State& s) { solve(s, segment(static_cast<int>(s.range(0))), SolverKind::automatic); }

void BM_SampleField(benchmark::State& state) {
  const auto D = segment(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(sample(D, TailSpec::exact(1.0), ++seed)[0]);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SolveChiBall(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(chi_balls(1.0, 1, static_cast<int>(state.range(0))).back().chi);
}

void BM_SyntheticPoisson(benchmark::State& state) {
  const auto shape = ContinuumShape::unit_box(1);
  std::vector<PointCloud> clouds;
  for (int c = 0; c < 500; ++c) clouds.push_back(synthetic_cloud(shape, 5, static_cast<std::uint64_t>(c)));
  for (auto _ : state) benchmark::DoNotOptimize(poisson_tests(clouds, shape).all_pass);
}

}  // namespace

BENCHMARK(BM_DenseSquare)->Arg(20)->Arg(30)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LanczosSquare)->Arg(30)->Arg(60)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Tridiagonal)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SampleField)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SolveChiBall)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SyntheticPoisson)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
