#include <benchmark/benchmark.h>

#include <vector>

#include "mgtv/discrete.hpp"
#include "mgtv/flow.hpp"
#include "mgtv/oracle.hpp"
#include "mgtv/prox.hpp"
#include "mgtv/pwfunc.hpp"
#include "support.hpp"

using namespace mgtv;

static void BM_TvRandomTrees(benchmark::State &state) {
  testing::Generator gen(1);
  std::vector<testing::Instance> inst;
  for (int i = 0; i < 64; ++i)
    inst.push_back(gen.instance());
  for (auto _ : state)
    for (const auto &[g, u] : inst)
      benchmark::DoNotOptimize(tv(g, u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(inst.size()));
}
BENCHMARK(BM_TvRandomTrees);

static void BM_ProjectVertexDual(benchmark::State &state) {
  std::vector<double> c(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = 0.37 * static_cast<double>(i % 7) - 1.1;
  for (auto _ : state)
    benchmark::DoNotOptimize(project_vertex_dual(c));
}
BENCHMARK(BM_ProjectVertexDual)->Arg(3)->Arg(16);

// One prox step on the star datum with n cells per unit length.
static void BM_ProxStar(benchmark::State &state, ProxMethod method) {
  const auto sol = star_example<double>(2, 1, 0.5, 1);
  const auto g = MetricGraph::build(sol.graph_spec());
  const auto u0 = sol.initial(g);
  const Mesh mesh = Mesh::build(g, u0, 1.0 / static_cast<double>(state.range(0)));
  const ProxSolver solver(g, mesh);
  const DiscreteState w = sample(mesh, u0);
  ProxOptions opts;
  opts.method = method;
  opts.max_iter = 5000000;
  for (auto _ : state)
    benchmark::DoNotOptimize(solver.solve(w, 1e-2, opts));
  state.counters["cells"] = static_cast<double>(mesh.num_cells());
}
BENCHMARK_CAPTURE(BM_ProxStar, exact, ProxMethod::kExactTree)->Arg(100)->Arg(1000);
BENCHMARK_CAPTURE(BM_ProxStar, primal_dual, ProxMethod::kPrimalDual)->Arg(25)->Arg(100);

static void BM_FlowCase1(benchmark::State &state) {
  const auto sol = neumann_case1<double>(1, 0.3, 1);
  const auto g = MetricGraph::build(sol.graph_spec());
  const auto u0 = sol.initial(g);
  const double h = 1.0 / static_cast<double>(state.range(0));
  const Mesh mesh = Mesh::build(g, u0, h);
  for (auto _ : state)
    benchmark::DoNotOptimize(run_flow(g, mesh, sample(mesh, u0), h, 1.0));
}
BENCHMARK(BM_FlowCase1)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
