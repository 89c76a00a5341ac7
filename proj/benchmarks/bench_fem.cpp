#include <benchmark/benchmark.h>

#include "homog/bounds.hpp"
#include "homog/fem.hpp"

using namespace homog;

namespace {

const MaterialField kPiecewise = MaterialField::piecewise({1.0, 0.1});

void BM_BuildMesh(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_mesh(n, kPiecewise).dof_count());
}

void BM_AssembleSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const bool dual = state.range(1) != 0;
    const TriMesh mesh = build_mesh(n, kPiecewise);
    int iterations = 0;
    for (auto _ : state) {
        const SparseSystem sys = dual ? assemble_dual(mesh, Vec2(1, 0)) : assemble_primal(mesh, Vec2(1, 0));
        const SolveResult r = solve(sys);
        iterations = r.iterations;
        benchmark::DoNotOptimize(r.solution.data());
    }
    state.counters["cg_iterations"] = iterations;
}

void BM_GuaranteedBounds(benchmark::State& state) {
    const TriMesh mesh = build_mesh(128, kPiecewise);
    const PeriodicNet u = PeriodicNet::init({10, 10, 2}, 1);
    const PeriodicNet w = PeriodicNet::init({10, 10, 2}, 2);
    for (auto _ : state) {
        const BoundReport r =
            guaranteed_bounds(project_to_p1(u, mesh), project_to_p1(w, mesh), mesh, Vec2(1, 0), Vec2(1, 0));
        benchmark::DoNotOptimize(r.upper_bound);
    }
}

}  // namespace

BENCHMARK(BM_BuildMesh)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleSolve)->ArgsProduct({{32, 64, 128}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GuaranteedBounds)->Unit(benchmark::kMillisecond);
