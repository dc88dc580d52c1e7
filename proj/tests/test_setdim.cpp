#include "doctest.h"
#include "oracles.hpp"

#include "fspec/setdim.hpp"

#include <random>
#include <sstream>

using namespace fspec;

namespace {

Vec dyadic(int from, int to) {
    Vec r;
    for (int k = from; k <= to; ++k) r.push_back(std::ldexp(1.0, -k));
    return r;
}

Vec triadic(int from, int to) {
    Vec r;
    for (int k = from; k <= to; ++k) r.push_back(std::pow(3.0, -k));
    return r;
}

Eigen::MatrixXd capacity_matrix(const PointCloud& c, double r, double s) { return oracle::capacity_matrix(c.points(), r, s); }

Eigen::MatrixXd energy_matrix(const PointCloud& c, double s) { return oracle::energy_matrix(c.points(), s); }

PointCloud embed_plane(const PointCloud& c) {
    std::vector<Vec> p;
    for (const Vec& x : c.points()) p.push_back({x[0], 0.0});
    return PointCloud(p);
}

}  // namespace

TEST_SUITE("setdim") {

TEST_CASE("capacity of one and two points") {
    const PointCloud one(std::vector<Vec>{{0.3, 0.4}});
    const CapacityResult c1 = capacity(one, 0.1, 1.0);
    CHECK(c1.value == 1.0);
    CHECK(c1.minimizer == Vec{1.0});

    // Two points at distance 1 in the plane (s = 1 < d = 2); weight-grid oracle.
    const PointCloud two(std::vector<Vec>{{0.0, 0.0}, {1.0, 0.0}});
    double best = 1e300;
    for (int i = 0; i <= 10000; ++i) {
        const double p = i * 1e-4, q = 1.0 - p;
        best = std::min(best, p * p + q * q + 2.0 * p * q * 0.01);
    }
    const CapacityResult c2 = capacity(two, 0.01, 1.0);
    CHECK(c2.value == doctest::Approx(1.0 / best).epsilon(1e-9));
    CHECK(c2.value == doctest::Approx(2.0 / 1.01).epsilon(1e-12));
    CHECK(c2.minimizer[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("capacity of a hundred-point interval grid against projected gradient") {
    const PointCloud g = uniform_grid_cloud(1, 100);
    const CapacityResult c = capacity(g, 0.1, 0.9);
    const double oracle_value = 1.0 / oracle::projected_gradient(capacity_matrix(g, 0.1, 0.9));
    CHECK(c.value == doctest::Approx(oracle_value).epsilon(0.01));
    CHECK(c.converged);
    CHECK(c.duality_gap <= 1e-8);
    double sum = 0.0;
    for (double w : c.minimizer) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("small clouds match the support-enumeration oracle") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int d = 1 + trial % 2;
        const int n = 2 + trial % 9;
        std::vector<Vec> pts;
        for (int i = 0; i < n; ++i) {
            Vec p(d);
            for (double& x : p) x = u(rng);
            pts.push_back(p);
        }
        const PointCloud c(pts);
        const double r = 0.05 + 0.3 * u(rng), s = 0.2 + 0.7 * u(rng) * d;
        const CapacityResult cap = capacity(c, r, std::min(s, d - 0.05));
        const auto o = oracle::brute_force_simplex(capacity_matrix(c, r, cap.s));
        CHECK(1.0 / cap.value == doctest::Approx(o.value).epsilon(1e-7));
        const EnergyResult e = frostman_energy(c, cap.s);
        const auto oe = oracle::brute_force_simplex(energy_matrix(c, cap.s));
        CHECK(e.min_energy == doctest::Approx(oe.value).epsilon(1e-7));
    }
}

TEST_CASE("capacity invariants") {
    const PointCloud c = cantor_cloud(6);
    double prev = 0.0;
    for (double r : dyadic(1, 9)) {  // r decreasing
        const CapacityResult res = capacity(c, r, 0.5);
        CHECK(res.value >= 1.0);
        CHECK(res.value <= static_cast<double>(c.size()) + 1e-9);
        CHECK(res.duality_gap <= 1e-8);
        CHECK(res.value >= prev - 1e-9);  // smaller r, smaller kernel, larger capacity
        prev = res.value;
    }
}

TEST_CASE("capacity preconditions and coincident points") {
    const PointCloud dup(std::vector<Vec>{{0.0}, {0.0}, {1.0}});
    CHECK_NOTHROW(capacity(dup, 0.1, 0.5));
    CHECK_THROWS_AS(frostman_energy(dup, 0.5), InputError);
    CHECK_THROWS_AS(capacity(dup, 1.5, 0.5), InputError);
    CHECK_THROWS_AS(capacity(dup, 0.1, 1.0), InputError);
}

TEST_CASE("box counting") {
    const PointCloud one(std::vector<Vec>{{0.2}});
    const ProfileDims p = box_counting(one, dyadic(1, 6));
    for (double v : p.values) CHECK(v == 1.0);
    CHECK(p.upper == 0.0);
    CHECK(p.lower == 0.0);

    const ProfileDims g = box_counting(uniform_grid_cloud(1, 100), {0.1, 0.05, 0.02, 0.01, 0.005, 0.002});
    CHECK((g.values[0] == 10.0 || g.values[0] == 11.0));

    const ProfileDims c = box_counting(cantor_cloud(10), triadic(1, 9));
    const double target = std::log(2.0) / std::log(3.0);
    CHECK(std::abs(c.upper - target) <= 0.03);
    CHECK(std::abs(c.lower - target) <= 0.03);
    for (std::size_t k = 0; k < c.values.size(); ++k) CHECK(c.values[k] == std::ldexp(1.0, static_cast<int>(k) + 1));
}

TEST_CASE("capacity profiles") {
    const PointCloud one(std::vector<Vec>{{0.2}});
    const ProfileDims p = box_profile_dims(one, 0.5, dyadic(1, 6));
    CHECK(p.upper == 0.0);
    CHECK(p.lower == 0.0);
    const BoxDimFourier bf = box_dim_fourier(one, default_s_sequence(1), dyadic(1, 6));
    CHECK(bf.upper == 0.0);
    CHECK(bf.lower == 0.0);

    const PointCloud cantor = cantor_cloud(10);
    const double target = std::log(2.0) / std::log(3.0);
    const ProfileDims cp = box_profile_dims(cantor, 0.95, triadic(1, 8));
    CHECK(std::abs(cp.upper - target) <= 0.05);
    CHECK(std::abs(cp.lower - target) <= 0.05);
    const BoxDimFourier cf = box_dim_fourier(cantor, default_s_sequence(1), triadic(1, 8));
    const ProfileDims bc = box_counting(cantor, triadic(1, 8));
    CHECK(cf.upper >= cf.lower);
    CHECK(std::abs(cf.upper - target) <= 0.05);
    CHECK(std::abs(cf.lower - target) <= 0.05);
    CHECK(std::abs(cf.upper - bc.upper) <= 0.03);
    CHECK(std::abs(cf.lower - bc.lower) <= 0.03);
    CHECK(cf.s_values == default_s_sequence(1));
    CHECK(cf.upper_increments.size() == cf.s_values.size() - 1);

    CHECK_THROWS_AS(box_profile_dims(cantor, 0.5, dyadic(1, 4)), InputError);
    CHECK_THROWS_AS(box_dim_fourier(cantor, {0.9, 0.5}, dyadic(1, 6)), InputError);
}

// At s = 0.95 the interval's capacity is r^s/(1-s) - r s/(1-s) up to
// constants, so the log-log slope approaches s only like r^{1-s}; at the
// cloud's resolution it sits near 0.8.
TEST_CASE("interval grid profile reaches one" * doctest::should_fail()) {
    const ProfileDims p = box_profile_dims(uniform_grid_cloud(1, 1024), 0.95, dyadic(4, 9));
    CHECK(std::abs(p.upper - 1.0) <= 0.1);
    CHECK(std::abs(p.lower - 1.0) <= 0.1);
}

TEST_CASE("square grid capacity estimate reaches two" * doctest::should_fail()) {
    const BoxDimFourier bf = box_dim_fourier(uniform_grid_cloud(2, 64), default_s_sequence(2), dyadic(2, 7));
    CHECK(std::abs(bf.upper - 2.0) <= 0.15);
    CHECK(std::abs(bf.lower - 2.0) <= 0.15);
}

TEST_CASE("grid box counting reaches the integer dimensions") {
    const ProfileDims a = box_counting(uniform_grid_cloud(1, 1024), dyadic(4, 9));
    CHECK(std::abs(a.upper - 1.0) <= 0.05);
    const ProfileDims b = box_counting(uniform_grid_cloud(2, 128), dyadic(1, 6));
    CHECK(std::abs(b.upper - 2.0) <= 0.05);
}

TEST_CASE("frostman energy of two points") {
    // Each point carries the self-energy of its half-gap cell, (1/2)^{-s}.
    const PointCloud two(std::vector<Vec>{{0.0}, {1.0}});
    const EnergyResult e = frostman_energy(two, 0.5);
    double best = 1e300, arg = 0.0;
    for (int i = 0; i <= 10000; ++i) {
        const double p = i * 1e-4, q = 1.0 - p;
        const double v = (p * p + q * q) * std::sqrt(2.0) + 2.0 * p * q;
        if (v < best) {
            best = v;
            arg = p;
        }
    }
    CHECK(e.min_energy == doctest::Approx(best).epsilon(1e-9));
    CHECK(arg == doctest::Approx(0.5));
    CHECK(e.minimizer[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(e.minimizer[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("frostman energy on refining interval grids") {
    // s = 1.5 exceeds the ambient dimension of the line, so the grids sit in the plane.
    Vec stable, divergent;
    for (std::size_t n : {256u, 512u, 1024u, 2048u, 4096u}) {
        const PointCloud g = embed_plane(uniform_grid_cloud(1, n));
        SolverOptions opt;
        opt.tol = 1e-6;
        opt.relative = true;
        stable.push_back(frostman_energy(g, 0.5, opt).min_energy);
        divergent.push_back(frostman_energy(g, 1.5, opt).min_energy);
    }
    for (double v : stable) CHECK(v <= 2.0 * stable.front());
    for (std::size_t i = 1; i < divergent.size(); ++i) CHECK(divergent[i] / divergent[i - 1] >= std::pow(2.0, 0.4));
}

TEST_CASE("frostman minimiser respects the grid's reflection symmetry") {
    const PointCloud g = uniform_grid_cloud(1, 64);
    const EnergyResult e = frostman_energy(g, 0.5);
    const std::size_t n = e.minimizer.size();
    for (std::size_t i = 0; i < n; ++i) CHECK(e.minimizer[i] == doctest::Approx(e.minimizer[n - 1 - i]).epsilon(1e-5).scale(1e-3));
    CHECK(e.duality_gap <= 1e-8);
}

TEST_CASE("kernel and Fourier sides of the bridge") {
    const BridgeResult d = kernel_fourier_bridge(MeasureSpec::dirac(1), 1.0 / 16.0, 0.5);
    CHECK(d.kernel_side == doctest::Approx(1.0));
    CHECK(d.fourier_side == doctest::Approx(2.0).epsilon(1e-6));  // R^{-1} |B_R| in d = 1

    for (const auto& [spec, s, limit] : {std::tuple{MeasureSpec::uniform_cube(1), 0.9, 20.0},
                                         std::tuple{MeasureSpec::cantor(), 0.6, 50.0}}) {
        double lo = 1e300, hi = 0.0;
        for (int j = 4; j <= 10; ++j) {
            const BridgeResult b = kernel_fourier_bridge(spec, std::ldexp(1.0, -j), s);
            lo = std::min(lo, b.ratio);
            hi = std::max(hi, b.ratio);
        }
        CHECK(hi / lo <= limit);
    }
}

TEST_CASE("cloud files") {
    std::istringstream ok("0.5,1\n 2 , -3e-1\n\n");
    const PointCloud c = read_cloud_csv(ok, "ok.csv");
    CHECK(c.size() == 2);
    CHECK(c.dim() == 2);
    CHECK(c[1][1] == -0.3);
    CHECK(c.diameter() == doctest::Approx(std::hypot(1.5, 1.3)));
    std::istringstream bad("0.5,1\n2\n");
    try {
        read_cloud_csv(bad, "bad.csv");
        FAIL("no throw");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("bad.csv:2") != std::string::npos);
    }
    std::istringstream nan("0.5\nnan\n");
    CHECK_THROWS_AS(read_cloud_csv(nan, "nan.csv"), InputError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_cloud_csv(empty, "e.csv"), InputError);
}

TEST_CASE("capacity csv") {
    std::ostringstream o;
    write_capacity_csv(o, {capacity(PointCloud(std::vector<Vec>{{0.0}}), 0.5, 0.5)});
    CHECK(o.str() == "r,s,capacity,gap,iterations\n0.5,0.5,1,0,0\n");
}

}  // TEST_SUITE
