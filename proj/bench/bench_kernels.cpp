// Serial reference vs OpenMP kernels. Arg(0) = serial, Arg(1) = parallel.
#include "fspec/kernels.hpp"
#include "fspec/measures.hpp"
#include "fspec/radial_profile.hpp"
#include "fspec/setdim.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace fspec;

namespace {

kernels::Exec exec_of(const benchmark::State& st) {
    return st.range(0) == 0 ? kernels::Exec::Serial : kernels::Exec::Parallel;
}

void BM_TransformMagnitudes(benchmark::State& st) {
    const MeasureSpec spec = MeasureSpec::product(MeasureSpec::cantor(), MeasureSpec::uniform_cube(1));
    Vec pts(2 * 20000);
    for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = 0.37 * static_cast<double>(i % 997);
    Vec out(pts.size() / 2);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::transform_magnitudes(spec, pts, 2, out, exec_of(st)));
}
BENCHMARK(BM_TransformMagnitudes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Compose(benchmark::State& st) {
    const RadialGrid g(10);
    Vec ga(g.size()), gb(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] = 2.0 * g.t()[i] / (1.0 + g.t()[i]);
        gb[i] = std::log1p(g.t()[i]);
    }
    auto fl = [&g](double x) { return g.floor_index(x); };
    for (auto _ : st) benchmark::DoNotOptimize(kernels::compose_ball_integrals(g.t(), ga, gb, fl, exec_of(st)));
}
BENCHMARK(BM_Compose)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Lattice(benchmark::State& st) {
    const long m = 120;
    Vec sums(3 * m * m + 1);
    auto w = [](std::span<const long> v) { return 1.0 / (1.0 + std::abs(v[0]) + std::abs(v[1]) + std::abs(v[2])); };
    for (auto _ : st) {
        std::fill(sums.begin(), sums.end(), 0.0);
        kernels::lattice_accumulate(3, m, w, sums, exec_of(st));
        benchmark::DoNotOptimize(sums.data());
    }
}
BENCHMARK(BM_Lattice)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_KernelMatvec(benchmark::State& st) {
    const PointCloud c = cantor_cloud(11);
    const std::size_t n = c.size();
    auto entry = [&c](std::size_t i, std::size_t j) {
        const double d = std::abs(c[i][0] - c[j][0]);
        return d < 1e-3 ? 1.0 : std::pow(1e-3 / d, 0.6);
    };
    Vec w(n, 1.0 / static_cast<double>(n)), y(n);
    for (auto _ : st) {
        kernels::kernel_matvec(n, entry, w, y, exec_of(st));
        benchmark::DoNotOptimize(y.data());
    }
}
BENCHMARK(BM_KernelMatvec)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
