// Randomised invariants of the transforms.
#include "doctest.h"

#include "fspec/measures.hpp"

#include <random>

using namespace fspec;

namespace {

MeasureSpec random_marginal(std::mt19937_64& rng, bool allow_sphere) {
    std::uniform_int_distribution<int> kind(0, allow_sphere ? 3 : 2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    switch (kind(rng)) {
        case 0: {
            const int n = 1 + static_cast<int>(u(rng) * 5);
            std::vector<Vec> pts;
            Vec w;
            for (int i = 0; i < n; ++i) {
                pts.push_back({u(rng) * 3.0 - 1.0});
                w.push_back(0.1 + u(rng));
            }
            return MeasureSpec::atomic(pts, w);
        }
        case 1: return MeasureSpec::uniform_cube(1 + static_cast<int>(u(rng) * 2));
        case 2: {
            const double r = 0.1 + 0.3 * u(rng);
            return MeasureSpec::self_similar(r, {0.0, 1.0 - r}, {0.4, 0.6});
        }
        default: return MeasureSpec::sphere(1);
    }
}

Vec random_z(std::mt19937_64& rng, int d, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Vec z(d);
    for (double& x : z) x = u(rng);
    return z;
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("conjugate symmetry and boundedness") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const MeasureSpec s = MeasureSpec::product(random_marginal(rng, true), random_marginal(rng, false));
        Vec z = random_z(rng, s.ambient_dim(), 30.0);
        Vec mz = z;
        for (double& x : mz) x = -x;
        const FourierValue a = fourier_eval(s, z), b = fourier_eval(s, mz);
        CHECK(std::abs(a.value - std::conj(b.value)) <= 1e-12 + a.abs_err + b.abs_err);
        CHECK(std::abs(a.value) <= total_mass(s) + a.abs_err + 1e-12);
    }
}

TEST_CASE("factorisation on random products") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const MeasureSpec mu = random_marginal(rng, false), nu = random_marginal(rng, trial % 10 == 0);
        const MeasureSpec p = MeasureSpec::product(mu, nu);
        const Vec x = random_z(rng, mu.ambient_dim(), 50.0), y = random_z(rng, nu.ambient_dim(), 50.0);
        Vec z = x;
        z.insert(z.end(), y.begin(), y.end());
        const FourierValue fa = fourier_eval(mu, x), fb = fourier_eval(nu, y), fp = fourier_eval(p, z);
        CHECK(std::abs(fp.value - fa.value * fb.value) <= fp.abs_err + 1e-12);
    }
}

TEST_CASE("lebesgue squared equals the product of intervals") {
    const MeasureSpec a = MeasureSpec::uniform_cube(2);
    const MeasureSpec b = MeasureSpec::product(MeasureSpec::uniform_cube(1), MeasureSpec::uniform_cube(1));
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const Vec z = random_z(rng, 2, 40.0);
        CHECK(std::abs(fourier_eval(a, z).value - fourier_eval(b, z).value) < 1e-12);
    }
}

TEST_CASE("dirac factor lifts the other transform") {
    const MeasureSpec nu = MeasureSpec::cantor();
    const MeasureSpec p = MeasureSpec::product(MeasureSpec::dirac(1), nu);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 100; ++i) {
        const Vec z = random_z(rng, 2, 40.0);
        CHECK(std::abs(fourier_eval(p, z).value - fourier_eval(nu, Vec{z[1]}).value) < 1e-12);
    }
}

}  // TEST_SUITE
