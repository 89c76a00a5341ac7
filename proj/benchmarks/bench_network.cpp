#include <benchmark/benchmark.h>

#include "homog/batch_eval.hpp"
#include "homog/losses.hpp"
#include "homog/quadrature.hpp"
#include "homog/test_bases.hpp"

using namespace homog;

namespace {

const NetworkConfig kArch[] = {{4, 4, 1}, {10, 10, 2}, {20, 20, 3}, {50, 50, 5}};

void BM_Forward(benchmark::State& state) {
    const NetworkConfig& arch = kArch[state.range(0)];
    const auto order = static_cast<DerivOrder>(state.range(1));
    const CollocationGrid grid(128);
    const PeriodicNet net = PeriodicNet::init(arch, 1);
    BatchEvaluator eval(grid.points(), order);
    for (auto _ : state) benchmark::DoNotOptimize(eval.forward(net).data());
    state.counters["params"] = static_cast<double>(net.size());
    state.SetItemsProcessed(state.iterations() * static_cast<long>(grid.size()));
}

void BM_StrongEpoch(benchmark::State& state) {
    const NetworkConfig& arch = kArch[state.range(0)];
    const auto form = state.range(1) ? Formulation::dual : Formulation::primal;
    const CollocationGrid grid(128);
    const StrongLoss loss(form, MaterialField::smoothed({1.0, 0.1}, 0.05), Vec2(1, 0), grid);
    const PeriodicNet net = PeriodicNet::init(arch, 1);
    BatchEvaluator eval(grid.points(), loss.order());
    Eigen::MatrixXd seed;
    for (auto _ : state) {
        loss.evaluate(eval.forward(net), &seed);
        benchmark::DoNotOptimize(eval.backward(net, seed).data());
    }
    state.counters["params"] = static_cast<double>(net.size());
}

void BM_WeakEpoch(benchmark::State& state) {
    const NetworkConfig& arch = kArch[state.range(0)];
    const CollocationGrid grid(128);
    const SpectralBasis basis = build_spectral(5, 5);
    auto grads = std::make_shared<const BasisGradients>(basis_gradients(basis, grid));
    const WeakLoss loss(Formulation::primal, MaterialField::piecewise({1.0, 0.1}), Vec2(1, 0), grid, grads,
                        spectral_gram(basis));
    const PeriodicNet net = PeriodicNet::init(arch, 1);
    BatchEvaluator eval(grid.points(), loss.order());
    Eigen::MatrixXd seed;
    for (auto _ : state) {
        loss.evaluate(eval.forward(net), &seed);
        benchmark::DoNotOptimize(eval.backward(net, seed).data());
    }
}

}  // namespace

BENCHMARK(BM_Forward)->ArgsProduct({{0, 1, 2}, {0, 1, 2}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_StrongEpoch)->ArgsProduct({{0, 1, 2}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WeakEpoch)->DenseRange(0, 1)->Unit(benchmark::kMillisecond);
