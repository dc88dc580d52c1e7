#include "doctest.h"

#include "fspec/products.hpp"
#include "fspec/tolerances.hpp"

#include <random>
#include <sstream>

using namespace fspec;

namespace {

const Vec kThetas{0.0, 0.5, 1.0};

const BoundRecord& at_theta(const BoundReport& r, double th) {
    for (const auto& x : r.records)
        if (x.theta == th) return x;
    throw std::runtime_error("theta not in report");
}

}  // namespace

TEST_SUITE("products") {

TEST_CASE("bound formulas") {
    CHECK(product_lower_formula(1, 1, 0.5, 2.0, 2.0) == 2.5);
    CHECK(product_upper_min_formula(1, 1, 0.5, 2.0, 2.0) == 2.5);
    // Circle times interval at theta = 1: min{2 + 2, 1 + 1, 1 + 2}.
    CHECK(product_lower_formula(2, 1, 1.0, 1.0, 2.0) == 2.0);
    CHECK(product_upper_max_formula(1.0, 1.0, 1.0, 2.0) == 3.0);
}

TEST_CASE("lower formula never exceeds the two-term upper formula") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        const int k = 1 + static_cast<int>(u(rng) * 3), m = 1 + static_cast<int>(u(rng) * 3);
        const double th = u(rng);
        const double a = u(rng) * (2 * k + 2), b = u(rng) * (2 * m + 2);
        CHECK(product_lower_formula(k, m, th, a, b) <= product_upper_min_formula(k, m, th, a, b));
    }
}

TEST_CASE("product specs") {
    const MeasureSpec p = product_spec(MeasureSpec::sphere(1), MeasureSpec::uniform_cube(1));
    CHECK(p.ambient_dim() == 3);
    CHECK(p.as<Product>() != nullptr);
    const MeasureSpec nu = MeasureSpec::cantor();
    const MeasureSpec lifted = product_spec(MeasureSpec::dirac(2), nu);
    for (double y : {0.1, 3.0, 40.0})
        for (double x : {-5.0, 0.0, 7.5})
            CHECK(std::abs(fourier_eval(lifted, Vec{x, -x, y}).value - fourier_eval(nu, Vec{y}).value) < 1e-12);
}

TEST_CASE("axis sups of a product are the first factor's sups") {
    const MeasureSpec mu = MeasureSpec::uniform_cube(1), nu = MeasureSpec::sphere(1);
    const MeasureSpec p = product_spec(mu, nu);
    const double mass = total_mass(nu);
    for (int j = 1; j <= 8; ++j) {
        double smu = 0.0, sp = 0.0, err = 0.0;
        const double lo = std::ldexp(1.0, j - 1), hi = std::ldexp(1.0, j);
        for (int q = 1; q <= 400; ++q) {
            const double x = lo + (hi - lo) * q / 400.0;
            const FourierValue a = fourier_eval(mu, Vec{x});
            const FourierValue b = fourier_eval(p, Vec{x, 0.0, 0.0});
            smu = std::max(smu, std::abs(a.value) * mass);
            sp = std::max(sp, std::abs(b.value));
            err = std::max(err, b.abs_err + a.abs_err * mass);
        }
        CHECK(std::abs(sp - smu) <= err + 1e-12);
    }
}

TEST_CASE("lebesgue squared sandwich") {
    const BoundReport r = check_product_bounds(MeasureSpec::uniform_cube(1), MeasureSpec::uniform_cube(1), kThetas);
    CHECK(r.violations() == 0);
    const BoundRecord& h = at_theta(r, 0.5);
    CHECK(std::abs(h.lhs.value - 2.5) <= 0.3);
    CHECK(std::abs(h.lower.value - 2.5) <= 0.2);
    CHECK(std::isnan(at_theta(r, 0.0).upper_max.value));
    std::ostringstream o;
    write_bound_report_csv(o, r);
    CHECK(o.str().rfind("theta,lhs,lower_formula,upper_formula_thm21,upper_formula_thm22,verdict\n0,", 0) == 0);
    CHECK(o.str().find("CONSISTENT") != std::string::npos);
}

TEST_CASE("cylinder sandwich") {
    const BoundReport r = check_product_bounds(MeasureSpec::sphere(1), MeasureSpec::uniform_cube(1), kThetas);
    CHECK(r.violations() == 0);
    CHECK(r.k == 2);
    CHECK(r.d == 3);
    const BoundRecord& one = at_theta(r, 1.0);
    CHECK(std::abs(one.lhs.value - 2.0) <= 0.3);
    CHECK(std::abs(one.lower.value - 2.0) <= 0.2);
}

TEST_CASE("dirac sandwich") {
    const BoundReport r = check_product_bounds(MeasureSpec::dirac(1), MeasureSpec::dirac(1), kThetas);
    CHECK(r.violations() == 0);
    for (const auto& x : r.records) {
        CHECK(std::abs(x.lhs.value) <= 0.05);
        CHECK(std::abs(x.mu.value) <= 0.05);
        CHECK(std::abs(x.lower.value) <= 0.05);
        CHECK(x.verdict == Verdict::Consistent);
    }
}

TEST_CASE("power predictions") {
    const MeasureSpec l1 = MeasureSpec::uniform_cube(1);
    const PowerPrediction p3 = power_spec(l1, 3, 1.0, 2.0);
    REQUIRE(p3.prediction.has_value());
    CHECK(*p3.prediction == 4.0);
    CHECK(p3.spec.ambient_dim() == 3);
    const PowerPrediction p2 = power_spec(l1, 2, 0.0, 2.0);
    CHECK(*p2.prediction == 2.0);
    const PowerPrediction p1 = power_spec(MeasureSpec::cantor(), 1, 0.5, 0.55);
    CHECK(*p1.prediction == 0.55);
    // d theta above the estimate: no prediction.
    CHECK_FALSE(power_spec(MeasureSpec::cantor(), 2, 1.0, 0.63).prediction.has_value());
    CHECK_THROWS_AS(power_spec(l1, 0, 0.5, 2.0), InputError);

    for (int n : {2, 3})
        for (double th : {0.5, 1.0}) {
            const PowerPrediction p = power_spec(l1, n, th, 2.0);
            const SpectrumCurve c = spectrum_curve(p.spec, {th});
            CHECK(std::abs(c.dims[0] - *p.prediction) <= 0.3);
        }
}

TEST_CASE("cartesian products of clouds") {
    const PointCloud a = uniform_grid_cloud(1, 3), b = cantor_cloud(2);
    const PointCloud p = cartesian_product(a, b);
    CHECK(p.size() == 12);
    CHECK(p.dim() == 2);
    CHECK(p[0] == Vec{0.0, 0.0});
    CHECK(p.diameter() == doctest::Approx(std::hypot(a.diameter(), b.diameter())));
    const PointCloud s1 = cartesian_product(a, b, 5, 3), s2 = cartesian_product(a, b, 5, 3);
    CHECK(s1.size() == 5);
    CHECK(s1.points() == s2.points());
}

TEST_CASE("candidate families") {
    const PointCloud c = cantor_cloud(5);
    const CandidateFamily f = default_candidates(c);
    CHECK(f.measures.size() == 4);
    CHECK(f.labels.front() == "uniform");
    for (const MeasureSpec& m : f.measures) CHECK(total_mass(m) == doctest::Approx(1.0));
    CHECK(default_candidates(PointCloud(std::vector<Vec>{{0.0}})).measures.size() == 1);
}

TEST_CASE("set products of single points") {
    const PointCloud o(std::vector<Vec>{{0.0}});
    const SetBoundReport r = check_set_product_bounds(o, default_candidates(o), o, default_candidates(o), kThetas);
    CHECK(r.report.violations() == 0);
    for (const auto& x : r.report.records) {
        CHECK(std::abs(x.lhs.value) <= 0.05);
        CHECK(x.verdict == Verdict::Consistent);
        CHECK(x.upper_verdict == Verdict::Informative);
    }
    CHECK(salem_product_check(o, o).verdict == Verdict::Inconclusive);
}

TEST_CASE("set products with the cantor cloud") {
    const PointCloud c = cantor_cloud(10), g = uniform_grid_cloud(1, 1024);
    const SetBoundReport r = check_set_product_bounds(c, default_candidates(c), g, default_candidates(g), {0.0});
    CHECK(r.report.violations() == 0);
    CHECK(r.report.records[0].lhs.value <= 0.1);

    const SalemReport s = salem_product_check(c, c);
    CHECK(s.fourier_dim.value <= 0.1);
    CHECK(std::abs(s.hausdorff_proxy - 2.0 * std::log(2.0) / std::log(3.0)) <= 0.1);
    CHECK(s.verdict == Verdict::NotSalem);
}

TEST_CASE("set products of interval grids") {
    const PointCloud g = uniform_grid_cloud(1, 1024);
    const SetBoundReport r = check_set_product_bounds(g, default_candidates(g), g, default_candidates(g), {1.0});
    CHECK(r.report.violations() == 0);
    CHECK(std::abs(r.report.records[0].lhs.value - 2.0) <= 0.2);
    CHECK(salem_product_check(g, g).verdict == Verdict::Inconclusive);
}

TEST_CASE("verdict spelling") {
    CHECK(to_string(Verdict::Consistent) == "CONSISTENT");
    CHECK(to_string(Verdict::ViolationCandidate) == "VIOLATION_CANDIDATE");
    CHECK(to_string(Verdict::Informative) == "INFORMATIVE");
    CHECK(to_string(Verdict::Inconclusive) == "INCONCLUSIVE");
    CHECK(to_string(Verdict::NotSalem) == "NOT_SALEM");
}

}  // TEST_SUITE
