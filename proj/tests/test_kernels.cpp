#include "doctest.h"
#include "oracles.hpp"

#include "fspec/kernels.hpp"
#include "fspec/measures.hpp"
#include "fspec/radial_profile.hpp"

#include <random>

using namespace fspec;
using kernels::Exec;

namespace {

// Composite Simpson on [a, b] with n (even) intervals.
template <class F>
double simpson(F f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("transform magnitudes: serial and parallel agree bitwise") {
    const MeasureSpec spec = MeasureSpec::product(MeasureSpec::sphere(1), MeasureSpec::cantor());
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    Vec pts(3 * 500);
    for (double& x : pts) x = u(rng);
    Vec a(500), b(500);
    const double ea = kernels::transform_magnitudes(spec, pts, 3, a, Exec::Serial);
    const double eb = kernels::transform_magnitudes(spec, pts, 3, b, Exec::Parallel);
    CHECK(a == b);
    CHECK(ea == eb);
}

TEST_CASE("lattice accumulation: serial and parallel agree bitwise") {
    for (int dim : {1, 2, 3}) {
        const long m = dim == 3 ? 20 : 60;
        const std::size_t len = dim == 1 ? m + 1 : static_cast<std::size_t>(dim * m * m + 1);
        Vec a(len, 0.0), b(len, 0.0);
        auto w = [](std::span<const long> v) {
            double s = 0.3;
            for (long x : v) s += std::sin(0.1 * static_cast<double>(x)) * 1e-3 + std::abs(static_cast<double>(x));
            return 1.0 / s;
        };
        kernels::lattice_accumulate(dim, m, w, a, Exec::Serial);
        kernels::lattice_accumulate(dim, m, w, b, Exec::Parallel);
        CHECK(a == b);
    }
}

TEST_CASE("lattice accumulation counts every nonzero point once") {
    // Weight 1: sums[key] = number of lattice points with that key.
    Vec s2(2 * 5 * 5 + 1, 0.0);
    kernels::lattice_accumulate(2, 5, [](std::span<const long>) { return 1.0; }, s2, Exec::Parallel);
    CHECK(s2[0] == 0.0);
    CHECK(s2[1] == 4.0);   // (+-1,0),(0,+-1)
    CHECK(s2[2] == 4.0);
    CHECK(s2[25] == 12.0); // (+-5,0),(0,+-5),(+-3,+-4),(+-4,+-3)
    Vec s1(8, 0.0);
    kernels::lattice_accumulate(1, 7, [](std::span<const long>) { return 1.0; }, s1, Exec::Serial);
    for (int k = 1; k <= 7; ++k) CHECK(s1[k] == 2.0);
}

TEST_CASE("kernel matvec and column agree with dense products") {
    const std::size_t n = 300;
    auto entry = [](std::size_t i, std::size_t j) { return 1.0 / (1.0 + std::abs(double(i) - double(j))); };
    Vec w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::cos(static_cast<double>(i));
    Vec ys(n), yp(n), col(n), colp(n);
    kernels::kernel_matvec(n, entry, w, ys, Exec::Serial);
    kernels::kernel_matvec(n, entry, w, yp, Exec::Parallel);
    CHECK(ys == yp);
    double ref = 0.0;
    for (std::size_t j = 0; j < n; ++j) ref += entry(17, j) * w[j];
    CHECK(ys[17] == doctest::Approx(ref).epsilon(1e-13));
    kernels::kernel_column(n, entry, 5, col, Exec::Serial);
    kernels::kernel_column(n, entry, 5, colp, Exec::Parallel);
    CHECK(col == colp);
    CHECK(col[9] == entry(9, 5));
}

TEST_CASE("stieltjes composition brackets the central value") {
    const RadialGrid g(4);
    Vec ga(g.size()), gb(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] = 2.0 * std::atan(g.t()[i]);
        gb[i] = 2.0 * g.t()[i] / (1.0 + g.t()[i]);
    }
    auto fl = [&g](double x) { return g.floor_index(x); };
    const auto s = kernels::compose_ball_integrals(g.t(), ga, gb, fl, Exec::Serial);
    const auto p = kernels::compose_ball_integrals(g.t(), ga, gb, fl, Exec::Parallel);
    CHECK(s.central == p.central);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(s.lower[i] <= s.central[i] + 1e-15);
        CHECK(s.central[i] <= s.upper[i] + 1e-15);
    }
}

TEST_CASE("radial grid") {
    const RadialGrid g(6);
    CHECK(g.t().front() == 0.0);
    for (int j = 0; j <= 6; ++j) CHECK(g.t()[g.dyadic_index(j)] == std::ldexp(1.0, j));
    CHECK(g.t().back() == 64.0);
    CHECK(std::is_sorted(g.t().begin(), g.t().end()));
    CHECK(g.floor_index(1.0) == g.dyadic_index(0));
    CHECK(g.floor_index(1000.0) == g.size() - 1);
}

TEST_CASE("interval profile against a Simpson oracle for sinc squared") {
    auto g = RadialGrid::shared(5);
    auto prof = RadialProfile::build(MeasureSpec::uniform_cube(1), *g);
    REQUIRE(prof);
    const ProfileValues v = prof->ball_integrals(2.0);
    for (int j = 0; j <= 5; ++j) {
        const double R = std::ldexp(1.0, j);
        const double ref = 2.0 * simpson([](double x) { return std::pow(oracle::sinc_abs(x), 2); }, 0.0, R, 40000 * (j + 1));
        CHECK(v.G[g->dyadic_index(j)] == doctest::Approx(ref).epsilon(1e-6));
    }
}

TEST_CASE("circle profile against a Bessel oracle") {
    auto g = RadialGrid::shared(4);
    auto prof = RadialProfile::build(MeasureSpec::sphere(1), *g);
    REQUIRE(prof);
    const ProfileValues v = prof->ball_integrals(2.0);
    for (int j : {0, 2, 4}) {
        const double R = std::ldexp(1.0, j);
        const double ref = 2.0 * oracle::kPi *
                           simpson([](double r) { return r * std::pow(oracle::sphere_bessel(1, r), 2); }, 0.0, R, 20000);
        CHECK(v.G[g->dyadic_index(j)] == doctest::Approx(ref).epsilon(1e-4));
    }
}

TEST_CASE("square profile by composition against a polar oracle") {
    auto g = RadialGrid::shared(3);
    auto prof = RadialProfile::build(MeasureSpec::uniform_cube(2), *g);
    REQUIRE(prof);
    const ProfileValues v = prof->ball_integrals(2.0);
    for (int j : {0, 2}) {
        const double R = std::ldexp(1.0, j);
        auto ring = [](double r) {
            return r * simpson([r](double a) {
                       return std::pow(oracle::sinc_abs(r * std::cos(a)) * oracle::sinc_abs(r * std::sin(a)), 2);
                   }, 0.0, 2.0 * oracle::kPi, 800);
        };
        const double ref = simpson(ring, 0.0, R, 1600);
        CHECK(v.G[g->dyadic_index(j)] == doctest::Approx(ref).epsilon(2e-3));
    }
}

TEST_CASE("unstructured specs have no profile") {
    auto g = RadialGrid::shared(3);
    CHECK(RadialProfile::build(MeasureSpec::atomic({{0.0, 0.0}, {0.5, 0.1}}, {1.0, 1.0}), *g) == nullptr);
}

}  // TEST_SUITE
