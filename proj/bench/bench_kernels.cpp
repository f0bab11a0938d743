// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "haarscat/kernels.hpp"
#include "haarscat/scatter.hpp"

using namespace haarscat;

namespace {

SignalBatch random_batch(std::size_t count, std::size_t dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SignalBatch b(count, dim);
    for (double& v : b.values()) v = u(rng);
    return b;
}

template <auto Kernel>
void cost_l1(benchmark::State& state) {
    const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 256, 1);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(batch, 1));
}

template <auto Kernel>
void cost_mixed(benchmark::State& state) {
    const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 256, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(batch, 4));
}

template <auto Kernel>
void transform_batch(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const auto net = random_network(Mode::structured, 1024, 6, rng);
    const auto batch = random_batch(static_cast<std::size_t>(state.range(0)), 1024, 4);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(net, batch));
}

template <auto Kernel>
void gaussian_gram(benchmark::State& state) {
    const auto a = random_batch(static_cast<std::size_t>(state.range(0)), 200, 5);
    for (auto _ : state) benchmark::DoNotOptimize(Kernel(a, a, 1.0));
}

}  // namespace

BENCHMARK(cost_l1<kernels::serial::cost_l1>)->Name("cost_l1/serial")->Arg(100)->Arg(500);
BENCHMARK(cost_l1<kernels::parallel::cost_l1>)->Name("cost_l1/parallel")->Arg(100)->Arg(500);
BENCHMARK(cost_mixed<kernels::serial::cost_mixed>)->Name("cost_mixed/serial")->Arg(100)->Arg(500);
BENCHMARK(cost_mixed<kernels::parallel::cost_mixed>)->Name("cost_mixed/parallel")->Arg(100)->Arg(500);
BENCHMARK(transform_batch<kernels::serial::transform>)->Name("transform/serial")->Arg(500)->Arg(2000);
BENCHMARK(transform_batch<kernels::parallel::transform>)->Name("transform/parallel")->Arg(500)->Arg(2000);
BENCHMARK(gaussian_gram<kernels::serial::gaussian_gram>)->Name("gaussian_gram/serial")->Arg(500)->Arg(2000);
BENCHMARK(gaussian_gram<kernels::parallel::gaussian_gram>)->Name("gaussian_gram/parallel")->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
