#include "fspec/products.hpp"

#include "fspec/csv.hpp"
#include "fspec/tolerances.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

namespace fspec {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return "CONSISTENT";
        case Verdict::ViolationCandidate: return "VIOLATION_CANDIDATE";
        case Verdict::Informative: return "INFORMATIVE";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
        case Verdict::NotSalem: return "NOT_SALEM";
    }
    return "?";
}

std::size_t BoundReport::violations() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const BoundRecord& r) {
        return r.verdict == Verdict::ViolationCandidate;
    }));
}

MeasureSpec product_spec(const MeasureSpec& mu, const MeasureSpec& nu) { return MeasureSpec::product(mu, nu); }

double product_lower_formula(int k, int m, double theta, double dmu, double dnu) {
    return std::min({k * theta + dnu, dmu + m * theta, dmu + dnu});
}

double product_upper_min_formula(int k, int m, double theta, double dmu, double dnu) {
    return std::min(k * theta + dnu, dmu + m * theta);
}

double product_upper_max_formula(double fbar_mu, double fbar_nu, double dmu, double dnu) {
    return std::max(fbar_mu + dnu, dmu + fbar_nu);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Spectrum estimates for one measure over several theta values, sharing
// the sampler and the lattice probe.
class Estimator {
public:
    Estimator(const MeasureSpec& spec, const Budgets& b)
        : spec_(spec),
          sampler_(spec, b.r_max > 0.0 ? b.r_max : default_shell_rmax(spec), b.shell_budget, b.seed),
          lattice_(b.lattice) {}

    struct At {
        Banded dim;
        Banded fbar;
    };

    At at(double theta) {
        At a;
        if (theta == 0.0) {
            const FourierDimEstimate f = estimate_fourier_dim(sampler_.stats(1.0));
            a.dim = {f.estimate, f.lower, f.upper};
            a.fbar = {kNaN, kNaN, kNaN};
            return a;
        }
        const ShellStats st = sampler_.stats(theta);
        const StrichartzExponents ex = strichartz_exponents(st);
        DimEstimate e;
        if (ex.F_lower < spec_.ambient_dim() * theta - tol::kRegimeMargin) {
            e = estimate_dim_theta(spec_, theta, st, lattice_);
        } else {
            if (!probe_) {
                const double alpha = lattice_.alpha > 0.0 ? lattice_.alpha : default_alpha(spec_);
                const double r = lattice_.r_max > 0.0 ? lattice_.r_max : default_lattice_rmax(spec_, alpha);
                probe_ = std::make_unique<LatticeProbe>(spec_, alpha, r);
            }
            e = estimate_dim_theta(spec_, theta, st, *probe_);
        }
        a.dim = {e.estimate, e.lower, e.upper};
        a.fbar = {ex.F_upper, std::max(0.0, ex.F_upper - tol::kMinBandHalfWidth), ex.F_upper + tol::kMinBandHalfWidth};
        return a;
    }

private:
    MeasureSpec spec_;
    ShellSampler sampler_;
    LatticeSettings lattice_;
    std::unique_ptr<LatticeProbe> probe_;
};

// Formula bands: every formula is nondecreasing in its inputs.
template <class F>
Banded formula_band(F f, const Banded& a, const Banded& b) {
    return {f(a.value, b.value), f(a.lo, b.lo), f(a.hi, b.hi)};
}

Banded cap_band(Banded b, double d) { return {std::min(b.value, d), std::min(b.lo, d), std::min(b.hi, d)}; }

Banded envelope(const std::vector<Banded>& v) {
    Banded e{-1.0, -1.0, -1.0};
    for (const Banded& b : v) {
        e.value = std::max(e.value, b.value);
        e.lo = std::max(e.lo, b.lo);
        e.hi = std::max(e.hi, b.hi);
    }
    return e;
}

void classify(BoundRecord& r, bool set_level) {
    const bool below = r.lhs.hi < r.lower.lo;
    double cap = r.upper_min.hi;
    if (!std::isnan(r.upper_max.hi)) cap = std::min(cap, r.upper_max.hi);
    const bool above = r.lhs.lo > cap;
    if (set_level) {
        r.verdict = below ? Verdict::ViolationCandidate : Verdict::Consistent;
        r.upper_verdict = Verdict::Informative;
    } else {
        r.verdict = (below || above) ? Verdict::ViolationCandidate : Verdict::Consistent;
        r.upper_verdict = above ? Verdict::ViolationCandidate : Verdict::Consistent;
    }
}

}  // namespace

BoundReport check_product_bounds(const MeasureSpec& mu, const MeasureSpec& nu, const Vec& thetas,
                                 const Budgets& budgets) {
    for (double t : thetas)
        if (!(t >= 0.0 && t <= 1.0)) throw InputError("theta grid must lie in [0, 1]");
    const MeasureSpec prod = product_spec(mu, nu);
    BoundReport rep;
    rep.k = mu.ambient_dim();
    rep.d = prod.ambient_dim();
    const int k = rep.k, m = nu.ambient_dim();
    Estimator em(mu, budgets), en(nu, budgets), ep(prod, budgets);
    for (double th : thetas) {
        BoundRecord r;
        r.theta = th;
        const auto a = em.at(th), b = en.at(th), c = ep.at(th);
        r.mu = a.dim;
        r.nu = b.dim;
        r.fbar_mu = a.fbar;
        r.fbar_nu = b.fbar;
        r.lhs = c.dim;
        r.lower = formula_band([&](double x, double y) { return product_lower_formula(k, m, th, x, y); }, r.mu, r.nu);
        r.upper_min = formula_band([&](double x, double y) { return product_upper_min_formula(k, m, th, x, y); }, r.mu, r.nu);
        if (th > 0.0) {
            r.upper_max = {product_upper_max_formula(a.fbar.value, b.fbar.value, a.dim.value, b.dim.value),
                           product_upper_max_formula(a.fbar.lo, b.fbar.lo, a.dim.lo, b.dim.lo),
                           product_upper_max_formula(a.fbar.hi, b.fbar.hi, a.dim.hi, b.dim.hi)};
        } else {
            r.upper_max = {kNaN, kNaN, kNaN};
        }
        classify(r, false);
        rep.records.push_back(r);
    }
    return rep;
}

PowerPrediction power_spec(const MeasureSpec& mu, int n, double theta, double mu_dim_estimate) {
    if (n < 1) throw InputError("power must be at least 1");
    if (!(theta >= 0.0 && theta <= 1.0)) throw InputError("theta must lie in [0, 1]");
    MeasureSpec p = mu;
    for (int i = 1; i < n; ++i) p = MeasureSpec::product(p, mu);
    PowerPrediction out{p, std::nullopt};
    const double dt = mu.ambient_dim() * theta;
    if (dt <= mu_dim_estimate) out.prediction = (n - 1) * dt + mu_dim_estimate;
    return out;
}

CandidateFamily default_candidates(const PointCloud& cloud, const Vec& s_grid_in) {
    CandidateFamily f;
    const std::size_t n = cloud.size();
    f.measures.push_back(MeasureSpec::atomic(cloud.points(), Vec(n, 1.0 / static_cast<double>(n))));
    f.labels.push_back("uniform");
    if (n < 2) return f;
    Vec s_grid = s_grid_in;
    if (s_grid.empty())
        for (double q : {0.25, 0.5, 0.75}) s_grid.push_back(q * cloud.dim());
    for (double s : s_grid) {
        SolverOptions opt;
        opt.tol = 1e-4;
        opt.relative = true;
        EnergyResult e;
        try {
            e = frostman_energy(cloud, s, opt);
        } catch (const InputError&) {
            continue;  // coincident points: no Frostman candidate
        }
        std::vector<Vec> pts;
        Vec w;
        for (std::size_t i = 0; i < n; ++i)
            if (e.minimizer[i] > 1e-12) {
                pts.push_back(cloud[i]);
                w.push_back(e.minimizer[i]);
            }
        const double sum = std::accumulate(w.begin(), w.end(), 0.0);
        for (double& x : w) x /= sum;
        f.measures.push_back(MeasureSpec::atomic(std::move(pts), std::move(w)));
        f.labels.push_back("frostman_s=" + csv::num(s));
    }
    return f;
}

PointCloud cartesian_product(const PointCloud& x, const PointCloud& y, std::size_t cap, std::uint64_t seed) {
    const std::size_t nx = x.size(), ny = y.size(), total = nx * ny;
    std::vector<std::size_t> idx;
    if (total <= cap) {
        idx.resize(total);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
    } else {
        // Partial Fisher-Yates over the virtual index range, then sorted for a stable order.
        std::mt19937_64 rng(seed);
        std::vector<std::size_t> pool(total);
        std::iota(pool.begin(), pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < cap; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, total - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        idx.assign(pool.begin(), pool.begin() + static_cast<long>(cap));
        std::sort(idx.begin(), idx.end());
    }
    std::vector<Vec> pts;
    pts.reserve(idx.size());
    for (std::size_t q : idx) {
        Vec p = x[q / ny];
        const Vec& b = y[q % ny];
        p.insert(p.end(), b.begin(), b.end());
        pts.push_back(std::move(p));
    }
    return PointCloud(std::move(pts), std::hypot(x.diameter(), y.diameter()));
}

double cloud_resolution_rmax(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 2) return 1024.0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < cloud.dim(); ++k) s += (cloud[i][k] - cloud[j][k]) * (cloud[i][k] - cloud[j][k]);
            best = std::min(best, s);
        }
    const double delta = std::sqrt(best);
    if (!(delta > 0.0)) return 128.0;
    const int j = static_cast<int>(std::floor(std::log2(1.0 / (4.0 * delta))));
    return std::ldexp(1.0, std::clamp(j, 7, 10));
}

namespace {

Budgets cloud_budgets(const Budgets& b, double rmax) {
    Budgets out = b;
    out.r_max = rmax;
    out.lattice.r_max = b.lattice.r_max > 0.0 ? b.lattice.r_max : rmax;
    return out;
}

}  // namespace

SetBoundReport check_set_product_bounds(const PointCloud& x, const CandidateFamily& fx, const PointCloud& y,
                                        const CandidateFamily& fy, const Vec& thetas, const Budgets& budgets) {
    if (fx.measures.empty() || fy.measures.empty()) throw InputError("candidate families must be nonempty");
    for (double t : thetas)
        if (!(t >= 0.0 && t <= 1.0)) throw InputError("theta grid must lie in [0, 1]");
    SetBoundReport out;
    out.r_max = std::min(cloud_resolution_rmax(x), cloud_resolution_rmax(y));
    const Budgets b = cloud_budgets(budgets, out.r_max);
    out.candidates_x = fx.measures.size();
    out.candidates_y = fy.measures.size();
    out.product_cloud_size = std::min<std::size_t>(x.size() * y.size(), std::size_t{1} << 20);
    const int k = x.dim(), m = y.dim(), d = k + m;
    out.report.k = k;
    out.report.d = d;

    std::vector<std::unique_ptr<Estimator>> ex, ey, exy;
    for (const auto& s : fx.measures) ex.push_back(std::make_unique<Estimator>(s, b));
    for (const auto& s : fy.measures) ey.push_back(std::make_unique<Estimator>(s, b));
    for (const auto& a : fx.measures)
        for (const auto& c : fy.measures) exy.push_back(std::make_unique<Estimator>(product_spec(a, c), b));

    for (double th : thetas) {
        BoundRecord r;
        r.theta = th;
        std::vector<Banded> vx, vy, vp, fxb, fyb;
        for (auto& e : ex) {
            auto a = e->at(th);
            vx.push_back(a.dim);
            fxb.push_back(a.fbar);
        }
        for (auto& e : ey) {
            auto a = e->at(th);
            vy.push_back(a.dim);
            fyb.push_back(a.fbar);
        }
        for (auto& e : exy) vp.push_back(e->at(th).dim);
        r.mu = envelope(vx);
        r.nu = envelope(vy);
        r.lhs = cap_band(envelope(vp), d);
        r.lower = cap_band(formula_band([&](double p, double q) { return product_lower_formula(k, m, th, p, q); }, r.mu, r.nu), d);
        r.upper_min = cap_band(formula_band([&](double p, double q) { return product_upper_min_formula(k, m, th, p, q); }, r.mu, r.nu), d);
        if (th > 0.0) {
            r.fbar_mu = envelope(fxb);
            r.fbar_nu = envelope(fyb);
            r.upper_max = {product_upper_max_formula(r.fbar_mu.value, r.fbar_nu.value, r.mu.value, r.nu.value),
                           product_upper_max_formula(r.fbar_mu.lo, r.fbar_nu.lo, r.mu.lo, r.nu.lo),
                           product_upper_max_formula(r.fbar_mu.hi, r.fbar_nu.hi, r.mu.hi, r.nu.hi)};
        } else {
            r.fbar_mu = r.fbar_nu = r.upper_max = {kNaN, kNaN, kNaN};
        }
        classify(r, true);
        out.report.records.push_back(r);
    }
    return out;
}

double hausdorff_proxy(const PointCloud& cloud) {
    const std::size_t n = cloud.size();
    if (n < 4) return 0.0;
    std::vector<Vec> pts = cloud.points();
    std::sort(pts.begin(), pts.end());
    std::vector<Vec> coarse;
    for (std::size_t i = 0; i < n; i += 2) coarse.push_back(pts[i]);
    const double s = 0.95 * cloud.dim();
    SolverOptions opt;
    opt.tol = 1e-5;
    opt.relative = true;
    const double ef = frostman_energy(PointCloud(pts), s, opt).min_energy;
    const double ec = frostman_energy(PointCloud(coarse), s, opt).min_energy;
    const double growth = std::log(ef / ec) / std::log(static_cast<double>(n) / static_cast<double>(coarse.size()));
    // Bounded energies mean s is below the dimension: the cloud is full-dimensional at this resolution.
    if (growth <= 0.05) return cloud.dim();
    return s / (1.0 + growth);
}

SalemReport salem_product_check(const PointCloud& x, const PointCloud& y, const Budgets& budgets) {
    SalemReport rep;
    const int d = x.dim() + y.dim();
    const CandidateFamily fx = default_candidates(x), fy = default_candidates(y);
    const SetBoundReport sr = check_set_product_bounds(x, fx, y, fy, {0.0}, budgets);
    rep.fourier_dim = sr.report.records[0].lhs;
    rep.hausdorff_proxy_x = hausdorff_proxy(x);
    rep.hausdorff_proxy_y = hausdorff_proxy(y);
    rep.hausdorff_proxy = rep.hausdorff_proxy_x + rep.hausdorff_proxy_y;
    const bool interior = rep.hausdorff_proxy > tol::kRegimeMargin && rep.hausdorff_proxy < d - tol::kRegimeMargin;
    if (interior && rep.fourier_dim.hi < rep.hausdorff_proxy - tol::kMinBandHalfWidth)
        rep.verdict = Verdict::NotSalem;
    return rep;
}

double lebesgue_prediction(int d, double theta) { return 2.0 + (d - 1) * theta; }

double cylinder_prediction(int k, int n, double theta) {
    return std::min(2.0 + (k + n) * theta, k + n * theta);
}

std::optional<double> cylinder_kink(int k) {
    // 2 + (k + n) theta = k + n theta  <=>  theta = 1 - 2/k, for every n.
    if (k <= 2) return std::nullopt;
    return 1.0 - 2.0 / k;
}

void write_bound_report_csv(std::ostream& out, const BoundReport& r) {
    out << "theta,lhs,lower_formula,upper_formula_thm21,upper_formula_thm22,verdict\n";
    for (const auto& rec : r.records)
        out << csv::num(rec.theta) << ',' << csv::num(rec.lhs.value) << ',' << csv::num(rec.lower.value) << ','
            << csv::num(rec.upper_min.value) << ',' << csv::num(rec.upper_max.value) << ',' << to_string(rec.verdict)
            << '\n';
}

}  // namespace fspec
