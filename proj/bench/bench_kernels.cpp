// Compares the OpenMP kernels against the serial reference path on the
// matrix shapes the gate MLP actually uses, plus a larger square case.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include <omp.h>

#include "toolgap/kernels.hpp"
#include "toolgap/rng.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_ms(const std::function<void()>& fn, int iters) {
    fn();  // warm-up
    const auto start = Clock::now();
    for (int i = 0; i < iters; ++i) fn();
    const auto end = Clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() / iters;
}

void bench_matmul(int m, int k, int n, int iters) {
    toolgap::Rng rng(42);
    std::vector<double> a(static_cast<std::size_t>(m) * k);
    std::vector<double> b(static_cast<std::size_t>(k) * n);
    std::vector<double> c(static_cast<std::size_t>(m) * n);
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = rng.normal();

    const double serial =
        time_ms([&] { toolgap::matmul_serial(a.data(), b.data(), c.data(), m, k, n); }, iters);
    const double parallel =
        time_ms([&] { toolgap::matmul(a.data(), b.data(), c.data(), m, k, n); }, iters);
    std::printf("matmul %4dx%4dx%4d  serial %8.3f ms  omp %8.3f ms  speedup %.2fx\n", m, k, n,
                serial, parallel, serial / parallel);
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    // Gate training shapes: batch x 120 -> 128 -> 64 -> 1.
    bench_matmul(256, 120, 128, 50);
    bench_matmul(256, 128, 64, 50);
    bench_matmul(2000, 120, 128, 10);
    bench_matmul(512, 512, 512, 3);
    return 0;
}
