#include "doctest.h"

#include "fspec/spectrum.hpp"
#include "fspec/tolerances.hpp"

#include <map>
#include <sstream>

using namespace fspec;

namespace {

const Vec kGrid{0.0, 0.25, 0.5, 0.75, 1.0};

// Curves of the worked example family, computed once per process.
const SpectrumCurve& family_curve(const std::string& name) {
    static std::map<std::string, SpectrumCurve> cache;
    auto it = cache.find(name);
    if (it != cache.end()) return it->second;
    MeasureSpec spec = MeasureSpec::dirac(1);
    if (name == "L1") spec = MeasureSpec::uniform_cube(1);
    if (name == "L2") spec = MeasureSpec::uniform_cube(2);
    if (name == "S1") spec = MeasureSpec::sphere(1);
    if (name == "S1xL1") spec = MeasureSpec::product(MeasureSpec::sphere(1), MeasureSpec::uniform_cube(1));
    if (name == "C") spec = MeasureSpec::cantor();
    return cache.emplace(name, spectrum_curve(spec, kGrid)).first->second;
}

double half_band(const SpectrumCurve& c, std::size_t i) { return 0.5 * (c.upper[i] - c.lower[i]); }

}  // namespace

TEST_SUITE("spectrum") {

TEST_CASE("strichartz exponents of the worked examples") {
    const auto d = strichartz_exponents(shell_stats(MeasureSpec::dirac(1), 1.0, 4096.0, 4096, 1));
    CHECK(std::abs(d.F_lower) <= 0.05);
    CHECK(std::abs(d.F_upper) <= 0.05);
    const auto l = strichartz_exponents(shell_stats(MeasureSpec::uniform_cube(1), 1.0, 4096.0, 4096, 1));
    CHECK(std::abs(l.F_lower - 1.0) <= 0.1);
    CHECK(std::abs(l.F_upper - 1.0) <= 0.1);
    const auto s = strichartz_exponents(shell_stats(MeasureSpec::sphere(1), 1.0, 512.0, 4096, 1));
    CHECK(std::abs(s.F_lower - 1.0) <= 0.1);
    CHECK(std::abs(s.F_upper - 1.0) <= 0.1);
    CHECK(s.F_lower <= s.F_upper);
}

TEST_CASE("strichartz preconditions") {
    CHECK_THROWS_AS(strichartz_exponents(shell_stats(MeasureSpec::dirac(1), 1.0, 64.0, 4096, 1)), InputError);
    CHECK_THROWS_AS(estimate_fourier_dim(shell_stats(MeasureSpec::dirac(1), 1.0, 64.0, 4096, 1)), InputError);
}

TEST_CASE("dimension at a single theta") {
    const ShellStats l = shell_stats(MeasureSpec::uniform_cube(1), 0.5, 4096.0, 4096, 1);
    const DimEstimate a = estimate_dim_theta(MeasureSpec::uniform_cube(1), 0.5, l);
    CHECK(a.flag == SpectrumFlag::Clamped);
    CHECK(std::abs(a.estimate - 2.0) <= 0.15);
    CHECK(a.lower <= a.estimate);
    CHECK(a.estimate <= a.upper);

    const MeasureSpec s2 = MeasureSpec::sphere(2);
    const DimEstimate b = estimate_dim_theta(s2, 1.0, shell_stats(s2, 1.0, 512.0, 4096, 1));
    CHECK(b.flag == SpectrumFlag::ExactRegime);
    CHECK(std::abs(b.estimate - 2.0) <= 0.15);

    for (double th : {0.3, 1.0}) {
        const DimEstimate c = estimate_dim_theta(MeasureSpec::dirac(1), th, shell_stats(MeasureSpec::dirac(1), th, 4096.0, 4096, 1));
        CHECK(std::abs(c.estimate) <= 0.05);
    }
    CHECK_THROWS_AS(estimate_dim_theta(MeasureSpec::dirac(1), 0.0, l), InputError);
}

TEST_CASE("clamped bisection brackets a change of verdict") {
    const MeasureSpec spec = MeasureSpec::uniform_cube(1);
    for (double th : {0.25, 1.0}) {
        const DimEstimate e = estimate_dim_theta(spec, th, shell_stats(spec, th, 4096.0, 4096, 1));
        REQUIRE(e.flag == SpectrumFlag::Clamped);
        REQUIRE(e.energy_lo.has_value());
        REQUIRE(e.energy_hi.has_value());
        CHECK(e.energy_lo->converges());
        CHECK_FALSE(e.energy_hi->converges());
        CHECK(e.bracket_lo <= e.estimate);
        CHECK(e.estimate <= e.bracket_hi);
        CHECK(e.bracket_hi - e.bracket_lo <= tol::kBisectionWidth + 1e-12);
    }
}

TEST_CASE("fourier dimension") {
    const FourierDimEstimate l = estimate_fourier_dim(shell_stats(MeasureSpec::uniform_cube(1), 1.0, 4096.0, 4096, 1));
    CHECK(std::abs(l.estimate - 2.0) <= 0.2);
    const FourierDimEstimate c = estimate_fourier_dim(shell_stats(MeasureSpec::cantor(), 1.0, 4096.0, 4096, 1));
    CHECK(c.estimate >= 0.0);
    CHECK(c.estimate <= 0.1);
    const MeasureSpec l2 = MeasureSpec::product(MeasureSpec::uniform_cube(1), MeasureSpec::uniform_cube(1));
    const FourierDimEstimate p = estimate_fourier_dim(shell_stats(l2, 1.0, 1024.0, 4096, 1));
    CHECK(std::abs(p.estimate - 2.0) <= 0.2);
}

TEST_CASE("curves of the worked examples") {
    const SpectrumCurve& l2 = family_curve("L2");
    for (std::size_t i : {0u, 2u, 4u}) CHECK(std::abs(l2.dims[i] - (2.0 + l2.thetas[i])) <= 0.2);
    const SpectrumCurve& s1 = family_curve("S1");
    for (double v : s1.dims) CHECK(std::abs(v - 1.0) <= 0.15);
    const SpectrumCurve& d = family_curve("D");
    for (double v : d.dims) CHECK(std::abs(v) <= 0.05);
    CHECK(d.flags[0] == SpectrumFlag::SupDecay);
}

TEST_CASE("curve invariants on the example family") {
    for (const char* name : {"L1", "L2", "S1", "S1xL1", "C", "D"}) {
        CAPTURE(name);
        const SpectrumCurve& c = family_curve(name);
        const std::size_t n = c.thetas.size();
        const int d = std::string(name) == "L1" || std::string(name) == "C" || std::string(name) == "D" ? 1
                      : std::string(name) == "S1xL1"                                             ? 3
                                                                                                 : 2;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(c.lower[i] <= c.dims[i]);
            CHECK(c.dims[i] <= c.upper[i]);
            CHECK(c.dims[i] >= 0.0);
            if (c.flags[i] == SpectrumFlag::ExactRegime) CHECK(c.dims[i] <= d * c.thetas[i] + tol::kCeilingSlack);
            // Fourier <= spectrum <= Sobolev, up to bands.
            CHECK(c.dims[0] <= c.dims[i] + half_band(c, 0) + half_band(c, i));
            CHECK(c.dims[i] <= c.dims[n - 1] + half_band(c, i) + half_band(c, n - 1));
            if (i > 0) {
                const double step = d * (c.thetas[i] - c.thetas[i - 1]);
                CHECK(std::abs(c.dims[i] - c.dims[i - 1]) <= step + 2.0 * (half_band(c, i) + half_band(c, i - 1)));
            }
        }
    }
}

TEST_CASE("strichartz exponents respect the d theta ceiling") {
    const MeasureSpec spec = MeasureSpec::product(MeasureSpec::sphere(1), MeasureSpec::uniform_cube(1));
    const ShellSampler sampler(spec, 256.0, 4096, 1);
    for (double th : {0.25, 0.5, 1.0}) {
        const StrichartzExponents e = strichartz_exponents(sampler.stats(th));
        for (double g : e.local) CHECK(g <= 3.0 * th + tol::kCeilingSlack);
        CHECK(e.F_upper <= 3.0 * th + tol::kCeilingSlack);
        CHECK(e.ols <= 3.0 * th + tol::kCeilingSlack);
    }
}

TEST_CASE("curve input validation and csv") {
    CHECK_THROWS_AS(spectrum_curve(MeasureSpec::dirac(1), {0.5, 0.25}), InputError);
    CHECK_THROWS_AS(spectrum_curve(MeasureSpec::dirac(1), {0.5, 1.5}), InputError);
    CHECK_THROWS_AS(spectrum_curve(MeasureSpec::dirac(1), {}), InputError);
    std::ostringstream o;
    write_spectrum_csv(o, family_curve("D"));
    const std::string s = o.str();
    CHECK(s.rfind("theta,dim,lower,upper,flag\n0,", 0) == 0);
    CHECK(s.find("SUP_DECAY") != std::string::npos);
    std::ostringstream o2;
    write_spectrum_csv(o2, family_curve("L1"));
    CHECK(o2.str().find("CLAMPED") != std::string::npos);
    std::ostringstream o3;
    write_spectrum_csv(o3, family_curve("S1"));
    CHECK(o3.str().find("EXACT_REGIME") != std::string::npos);
}

TEST_CASE("curves are deterministic") {
    const SpectrumCurve a = spectrum_curve(MeasureSpec::uniform_cube(2), {0.0, 0.5});
    const SpectrumCurve b = spectrum_curve(MeasureSpec::uniform_cube(2), {0.0, 0.5});
    CHECK(a.dims == b.dims);
    CHECK(a.lower == b.lower);
    CHECK(a.upper == b.upper);
}

}  // TEST_SUITE
