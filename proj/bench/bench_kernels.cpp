#include <benchmark/benchmark.h>

#include <vector>

#include "math/kernels.hpp"
#include "rng.hpp"

// Serial reference vs OpenMP backend on convolution/matmul shapes larger than
// the training configs, so the parallel speedup is visible when threads are
// available.

namespace {

using namespace abdgen::math::kernels;

std::vector<double> random_buf(std::size_t n, std::uint64_t seed) {
    abdgen::Rng rng(seed);
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

void bench_conv_forward(benchmark::State& state, Backend be) {
    ConvGeom g = conv_geom(16, 96, 96, 32, 3, 1, 1);
    auto x = random_buf(g.in_c * g.in_h * g.in_w, 1);
    auto w = random_buf(g.out_c * g.in_c * g.k * g.k, 2);
    std::vector<double> out(g.out_c * g.out_h * g.out_w);
    set_backend(be);
    for (auto _ : state) {
        conv2d_forward(x.data(), w.data(), out.data(), g);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
}

void bench_matmul(benchmark::State& state, Backend be) {
    std::size_t m = 256, k = 256, n = 256;
    auto a = random_buf(m * k, 3);
    auto b = random_buf(k * n, 4);
    std::vector<double> c(m * n);
    set_backend(be);
    for (auto _ : state) {
        matmul(a.data(), b.data(), c.data(), m, k, n, false, false, false);
        benchmark::DoNotOptimize(c.data());
        benchmark::ClobberMemory();
    }
}

void bench_conv_grad_weight(benchmark::State& state, Backend be) {
    ConvGeom g = conv_geom(16, 96, 96, 32, 3, 1, 1);
    auto x = random_buf(g.in_c * g.in_h * g.in_w, 5);
    auto gout = random_buf(g.out_c * g.out_h * g.out_w, 6);
    std::vector<double> gw(g.out_c * g.in_c * g.k * g.k);
    set_backend(be);
    for (auto _ : state) {
        conv2d_grad_weight(gout.data(), x.data(), gw.data(), g);
        benchmark::DoNotOptimize(gw.data());
        benchmark::ClobberMemory();
    }
}

}  // namespace

BENCHMARK_CAPTURE(bench_conv_forward, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_conv_forward, openmp, Backend::openmp);
BENCHMARK_CAPTURE(bench_matmul, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_matmul, openmp, Backend::openmp);
BENCHMARK_CAPTURE(bench_conv_grad_weight, serial, Backend::serial);
BENCHMARK_CAPTURE(bench_conv_grad_weight, openmp, Backend::openmp);

BENCHMARK_MAIN();
