#include "fspec/spectrum.hpp"

#include "fspec/csv.hpp"
#include "fspec/fit.hpp"
#include "fspec/tolerances.hpp"

#include <algorithm>
#include <ostream>
#include <memory>

namespace fspec {

std::string to_string(SpectrumFlag f) {
    switch (f) {
        case SpectrumFlag::ExactRegime: return "EXACT_REGIME";
        case SpectrumFlag::Clamped: return "CLAMPED";
        case SpectrumFlag::SupDecay: return "SUP_DECAY";
    }
    return "?";
}

namespace {

constexpr std::size_t kMinShells = 8;

void check_shells(const ShellStats& st) {
    if (st.radii.size() < kMinShells)
        throw InputError("need at least 8 shells, got " + std::to_string(st.radii.size()));
    if (st.S.size() != st.radii.size() || st.shell_sups.size() != st.radii.size())
        throw InputError("inconsistent shell statistics");
}

DimEstimate exact_estimate(const StrichartzExponents& ex) {
    DimEstimate e;
    e.flag = SpectrumFlag::ExactRegime;
    e.strichartz = ex;
    e.estimate = ex.ols;
    e.lower = std::max(0.0, std::min(ex.F_lower, e.estimate - tol::kMinBandHalfWidth));
    e.upper = std::max(ex.F_upper, e.estimate + tol::kMinBandHalfWidth);
    return e;
}

bool has_sphere(const MeasureSpec& s) {
    if (const auto* p = s.as<Product>()) return has_sphere(*p->left) || has_sphere(*p->right);
    return s.as<SphereSurface>() != nullptr;
}

}  // namespace

StrichartzExponents strichartz_exponents(const ShellStats& st, double window) {
    check_shells(st);
    if (!(window > 0.0 && window <= 1.0)) throw InputError("window fraction must lie in (0, 1]");
    for (double s : st.S)
        if (!std::isfinite(s) || !(s > 0.0)) throw InputError("non-finite or non-positive shell integral");
    const std::size_t n = st.radii.size();
    const double d = st.dim, th = st.theta, cap = d * th;
    auto clip = [&](double v) { return std::clamp(v, 0.0, cap); };

    StrichartzExponents ex;
    ex.window = window_length(n - 1, window);
    Vec x, y;
    for (std::size_t j = n - ex.window; j < n; ++j) {
        const double step = std::log(st.S[j] / st.S[j - 1]) / std::log(st.radii[j] / st.radii[j - 1]);
        ex.local.push_back(clip(th * (d - step)));
        ex.raw.push_back(clip(th * (d * std::log(st.radii[j]) - std::log(st.S[j])) / std::log(st.radii[j])));
    }
    for (std::size_t j = n - ex.window - 1; j < n; ++j) {
        x.push_back(std::log(st.radii[j]));
        y.push_back(std::log(st.S[j]));
    }
    ex.F_lower = *std::min_element(ex.local.begin(), ex.local.end());
    ex.F_upper = *std::max_element(ex.local.begin(), ex.local.end());
    ex.ols = clip(th * (d - ols_slope(x, y)));
    return ex;
}

double default_shell_rmax(const MeasureSpec& spec) {
    if (spec.ambient_dim() == 1) return 4096.0;
    // Sphere transforms cost O(|z|) each; one octave less keeps them cheap.
    return has_sphere(spec) ? 512.0 : 1024.0;
}

double default_lattice_rmax(const MeasureSpec& spec, double alpha) {
    const int d = spec.ambient_dim();
    if (d > 3) throw InputError("lattice enumeration is limited to ambient dimension <= 3");
    static constexpr int kMaxOctave[] = {0, 16, 10, 8};
    static constexpr double kMaxPoints[] = {0.0, 1e6, 1.6e7, 6e7};
    int top = kMaxOctave[d];
    // Sphere factors need one quadrature per distinct |m|^2; keep those tables small.
    if (has_sphere(spec)) top = std::min(top, 8);
    int j = 5;
    while (j < top && lattice_point_count(d, alpha, std::ldexp(1.0, j + 1)) <= kMaxPoints[d]) ++j;
    return std::ldexp(1.0, j);
}

DimEstimate estimate_dim_theta(const MeasureSpec& spec, double theta, const ShellStats& stats,
                               const LatticeSettings& lattice) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    if (stats.dim != spec.ambient_dim()) throw InputError("shell statistics belong to another dimension");
    const StrichartzExponents ex = strichartz_exponents(stats);
    if (ex.F_lower < spec.ambient_dim() * theta - tol::kRegimeMargin) return exact_estimate(ex);
    const double alpha = lattice.alpha > 0.0 ? lattice.alpha : default_alpha(spec);
    const double r = lattice.r_max > 0.0 ? lattice.r_max : default_lattice_rmax(spec, alpha);
    return estimate_dim_theta(spec, theta, stats, LatticeProbe(spec, alpha, r));
}

DimEstimate estimate_dim_theta(const MeasureSpec& spec, double theta, const ShellStats& stats,
                               const LatticeProbe& probe) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    if (stats.dim != spec.ambient_dim()) throw InputError("shell statistics belong to another dimension");
    DimEstimate e;
    e.strichartz = strichartz_exponents(stats);
    const double d = spec.ambient_dim(), dt = d * theta;
    const StrichartzExponents& ex = e.strichartz;
    if (ex.F_lower < dt - tol::kRegimeMargin) return exact_estimate(ex);

    // F_lower has saturated at d theta: locate the convergence boundary of
    // the lattice energy in s.
    e.flag = SpectrumFlag::Clamped;
    double lo = dt, hi = 2.0 * d + 2.0;
    LatticeEnergy elo = probe.energy(lo, theta), ehi = probe.energy(hi, theta);
    if (ehi.converges()) {
        lo = hi;
        elo = ehi;
    } else if (!elo.converges()) {
        hi = lo;
        ehi = elo;
    } else {
        while (hi - lo > tol::kBisectionWidth) {
            const double mid = 0.5 * (lo + hi);
            LatticeEnergy em = probe.energy(mid, theta);
            if (em.converges()) {
                lo = mid;
                elo = std::move(em);
            } else {
                hi = mid;
                ehi = std::move(em);
            }
        }
    }
    e.bracket_lo = lo;
    e.bracket_hi = hi;
    e.energy_lo = std::move(elo);
    e.energy_hi = std::move(ehi);
    e.estimate = 0.5 * (lo + hi);
    e.lower = std::max(0.0, lo - tol::kMinBandHalfWidth);
    e.upper = hi + tol::kMinBandHalfWidth;
    return e;
}

FourierDimEstimate estimate_fourier_dim(const ShellStats& st) {
    check_shells(st);
    for (double s : st.shell_sups)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::logic_error("zero or non-finite shell sup for a nonzero measure");
    const std::size_t n = st.radii.size();
    const std::size_t w = window_length(n - 1, 1.0 / 3.0);
    // Decreasing majorant sup_{|z| > R_{j-1}}: a shell that happens to miss
    // the resonant frequencies of a self-similar measure must not read as decay.
    // The last shell has no lookahead, so it only feeds the majorant below it.
    Vec env = st.shell_sups;
    for (std::size_t j = n - 1; j-- > 0;) env[j] = std::max(env[j], env[j + 1]);
    const std::size_t m = n - 1;
    const std::size_t wm = window_length(m - 1, 1.0 / 3.0);
    FourierDimEstimate f;
    Vec x, y;
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = n - w; j < n; ++j)
        worst = std::max(worst, std::log(st.shell_sups[j]) / std::log(st.radii[j]));
    for (std::size_t j = m - wm; j < m; ++j)
        f.local.push_back(-2.0 * std::log2(env[j] / env[j - 1]) / std::log2(st.radii[j] / st.radii[j - 1]));
    for (std::size_t j = m - wm - 1; j < m; ++j) {
        x.push_back(std::log(st.radii[j]));
        y.push_back(std::log(env[j]));
    }
    f.estimate = std::max(0.0, -2.0 * ols_slope(x, y));
    f.ratio_estimate = std::max(0.0, -2.0 * worst);
    const double lmin = *std::min_element(f.local.begin(), f.local.end());
    const double lmax = *std::max_element(f.local.begin(), f.local.end());
    f.lower = std::max(0.0, std::min(lmin, f.estimate - tol::kMinBandHalfWidth));
    f.upper = std::max({lmax, f.estimate + tol::kMinBandHalfWidth, f.lower});
    return f;
}

SpectrumCurve spectrum_curve(const ShellSampler& sampler, const Vec& thetas,
                             const LatticeSettings& lattice) {
    if (thetas.empty()) throw InputError("theta grid is empty");
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        if (!(thetas[i] >= 0.0 && thetas[i] <= 1.0)) throw InputError("theta grid must lie in [0, 1]");
        if (i > 0 && !(thetas[i] > thetas[i - 1])) throw InputError("theta grid must be strictly increasing");
    }
    const MeasureSpec& spec = sampler.spec();
    std::unique_ptr<LatticeProbe> probe;
    SpectrumCurve c;
    for (double th : thetas) {
        c.thetas.push_back(th);
        if (th == 0.0) {
            const FourierDimEstimate f = estimate_fourier_dim(sampler.stats(1.0));
            c.dims.push_back(f.estimate);
            c.lower.push_back(f.lower);
            c.upper.push_back(f.upper);
            c.flags.push_back(SpectrumFlag::SupDecay);
            continue;
        }
        const ShellStats st = sampler.stats(th);
        const StrichartzExponents ex = strichartz_exponents(st);
        DimEstimate e;
        if (ex.F_lower < spec.ambient_dim() * th - tol::kRegimeMargin) {
            e = estimate_dim_theta(spec, th, st, lattice);
        } else {
            if (!probe) {
                const double alpha = lattice.alpha > 0.0 ? lattice.alpha : default_alpha(spec);
                const double r = lattice.r_max > 0.0 ? lattice.r_max : default_lattice_rmax(spec, alpha);
                probe = std::make_unique<LatticeProbe>(spec, alpha, r);
            }
            e = estimate_dim_theta(spec, th, st, *probe);
        }
        c.dims.push_back(e.estimate);
        c.lower.push_back(e.lower);
        c.upper.push_back(e.upper);
        c.flags.push_back(e.flag);
    }
    return c;
}

SpectrumCurve spectrum_curve(const MeasureSpec& spec, const Vec& thetas, const Budgets& b) {
    const double r = b.r_max > 0.0 ? b.r_max : default_shell_rmax(spec);
    ShellSampler sampler(spec, r, b.shell_budget, b.seed);
    return spectrum_curve(sampler, thetas, b.lattice);
}

void write_spectrum_csv(std::ostream& out, const SpectrumCurve& c) {
    out << "theta,dim,lower,upper,flag\n";
    for (std::size_t i = 0; i < c.thetas.size(); ++i)
        out << csv::num(c.thetas[i]) << ',' << csv::num(c.dims[i]) << ',' << csv::num(c.lower[i]) << ','
            << csv::num(c.upper[i]) << ',' << to_string(c.flags[i]) << '\n';
}

}  // namespace fspec
