// Serial reference kernels against their OpenMP versions.

#include "episcale/kernels.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace episcale;

namespace {

const TwoPatchSharedParams kShared{0.99, 0.9, 0.95};
const TwoPatchInfectiousParams kInfectious{0.9, 0.5, 0.95, 0.86};

struct Batch {
    std::vector<MetapopModel> models;
    std::vector<MetapopState> starts;
};

Matrix random_stochastic(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(0.05, 1.0);
    Matrix m(n, n);
    for (auto& x : m.reshaped()) {
        x = u(rng);
    }
    for (int j = 0; j < n; ++j) {
        m.col(j) /= m.col(j).sum();
    }
    return m;
}

const Batch& batch()
{
    static const Batch b = [] {
        Batch out;
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> s(0.5, 0.98), g(0.1, 0.9), beta(0.05, 1), B(1, 20), x(0, 100);
        for (int i = 0; i < 32; ++i) {
            const int n = 2 + i % 7;
            std::vector<EpidemicParams> ps;
            for (int j = 0; j < n; ++j) {
                ps.emplace_back(Survival{s(rng), s(rng), s(rng), s(rng)}, Transitions{g(rng), g(rng), g(rng)},
                                StandardIncidence{beta(rng)}, ConstantRecruitment{B(rng)});
            }
            std::array<Matrix, 4> ms;
            for (auto& m : ms) {
                m = random_stochastic(rng, n);
            }
            out.models.emplace_back(ps, MovementModel(ms, 16));
            Vector v(4 * n);
            for (auto& e : v) {
                e = x(rng);
            }
            out.starts.push_back(MetapopState::from_stacked(v));
        }
        return out;
    }();
    return b;
}

void BM_GridSerial(benchmark::State& state)
{
    const auto res = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_r0_grid_serial(kShared, kInfectious, res));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(res * res));
}

void BM_GridParallel(benchmark::State& state)
{
    const auto res = static_cast<std::size_t>(state.range(0));
    const int workers = static_cast<int>(state.range(1));
    for (auto _ : state) {
        benchmark::DoNotOptimize(sample_r0_grid_parallel(kShared, kInfectious, res, workers));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(res * res));
}

ClassifyOptions batch_options()
{
    ClassifyOptions o;
    o.horizon = 2000;
    return o;
}

void BM_ClassifySerial(benchmark::State& state)
{
    const Batch& b = batch();
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify_batch_serial(b.models, b.starts, batch_options()));
    }
}

void BM_ClassifyParallel(benchmark::State& state)
{
    const Batch& b = batch();
    const int workers = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(classify_batch_parallel(b.models, b.starts, batch_options(), workers));
    }
}

} // namespace

BENCHMARK(BM_GridSerial)->Arg(201)->Arg(1001)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridParallel)->ArgsProduct({{201, 1001}, {1, 2, 4, 8}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ClassifySerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClassifyParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
