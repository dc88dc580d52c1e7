#include "fspec/transform.hpp"

#include "fspec/csv.hpp"
#include "fspec/fit.hpp"
#include "fspec/tolerances.hpp"

#include <algorithm>
#include <ostream>
#include <limits>
#include <random>

namespace fspec {

double ball_volume(int d, double r) {
    return std::pow(kPi, 0.5 * d) / std::tgamma(0.5 * d + 1.0) * std::pow(r, d);
}

namespace {

int dyadic_octaves(double r_max) {
    if (!(r_max >= 4.0) || !std::isfinite(r_max)) throw InputError("R_max must be a finite value >= 4");
    return static_cast<int>(std::floor(std::log2(r_max) + 1e-12));
}

// Unit directions along the axes and the diagonals (first coordinate positive).
std::vector<Vec> probe_directions(int d) {
    std::vector<Vec> dirs;
    for (int i = 0; i < d; ++i) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        dirs.push_back(e);
    }
    if (d >= 2) {
        for (int mask = 0; mask < (1 << (d - 1)); ++mask) {
            Vec v(d, 1.0 / std::sqrt(static_cast<double>(d)));
            for (int i = 1; i < d; ++i)
                if (mask & (1 << (i - 1))) v[i] = -v[i];
            dirs.push_back(v);
        }
    }
    return dirs;
}

constexpr int kProbesPerShell = 64;

}  // namespace

ShellSampler::ShellSampler(const MeasureSpec& spec, double r_max, std::size_t budget,
                           std::uint64_t seed, kernels::Exec exec)
    : spec_(spec), dim_(spec.ambient_dim()), exec_(exec) {
    const int J = dyadic_octaves(r_max);
    if (budget < 1000) throw InputError("budget must be at least 1000 evaluations per shell");
    for (int j = 0; j <= J; ++j) radii_.push_back(std::ldexp(1.0, j));
    sups_.assign(radii_.size(), 0.0);

    grid_ = RadialGrid::shared(J);
    profile_ = RadialProfile::build(spec_, *grid_, exec_);
    if (profile_) {
        const Vec& m = profile_->cell_sup();
        std::size_t lo = 0;
        for (int j = 0; j <= J; ++j) {
            const std::size_t hi = grid_->dyadic_index(j);
            for (std::size_t i = lo; i <= hi; ++i) sups_[j] = std::max(sups_[j], m[i]);
            lo = hi + 1;
        }
    } else {
        sample_shells(budget, seed);
    }
    probe_sups();
    // Axis points (z1, 0) and (0, z2) of a product: |F| = |mu^(z1)| mass(nu) and
    // vice versa, so the factors' own shell sups are attained values here too.
    // Random directions almost never hit the thin resonant slabs around the axes.
    if (const auto* p = spec_.as<Product>(); p && !profile_) {
        const std::size_t fb = std::max<std::size_t>(1000, budget / 4);
        const ShellSampler l(*p->left, radii_.back(), fb, seed ^ 0x9e3779b97f4a7c15ULL, exec_);
        const ShellSampler r(*p->right, radii_.back(), fb, seed ^ 0xc2b2ae3d27d4eb4fULL, exec_);
        const double ml = std::abs(total_mass(*p->left)), mr = std::abs(total_mass(*p->right));
        for (std::size_t j = 0; j < radii_.size(); ++j)
            sups_[j] = std::max({sups_[j], l.sups_[j] * mr, r.sups_[j] * ml});
        max_abs_err_ = std::max({max_abs_err_, l.max_abs_err_ * mr, r.max_abs_err_ * ml});
        mc_evals_ += l.evaluations() + r.evaluations();
    }
}

void ShellSampler::sample_shells(std::size_t budget, std::uint64_t seed) {
    const int d = dim_;
    const std::size_t per = std::max<std::size_t>(1, budget / kStrata);
    mc_mags_.assign(radii_.size(), std::vector<Vec>(kStrata));
    mc_stratum_volume_.assign(radii_.size(), 0.0);
    for (std::size_t j = 0; j < radii_.size(); ++j) {
        const double a = j == 0 ? 0.0 : radii_[j - 1], b = radii_[j];
        const double ad = std::pow(a, d), bd = std::pow(b, d);
        mc_stratum_volume_[j] = (ball_volume(d, b) - ball_volume(d, a)) / kStrata;
        Vec pts(static_cast<std::size_t>(kStrata) * per * d);
        std::size_t w = 0;
        for (int s = 0; s < kStrata; ++s) {
            // Each (seed, shell, stratum) owns its own stream.
            std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                              static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(s)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            std::normal_distribution<double> gauss;
            const double lo = ad + (bd - ad) * s / kStrata, hi = ad + (bd - ad) * (s + 1) / kStrata;
            for (std::size_t q = 0; q < per; ++q) {
                const double r = std::pow(lo + (hi - lo) * unif(rng), 1.0 / d);
                Vec g(d);
                double nn = 0.0;
                do {
                    nn = 0.0;
                    for (int i = 0; i < d; ++i) {
                        g[i] = gauss(rng);
                        nn += g[i] * g[i];
                    }
                } while (nn == 0.0);
                nn = std::sqrt(nn);
                for (int i = 0; i < d; ++i) pts[w++] = r * g[i] / nn;
            }
        }
        Vec mags(static_cast<std::size_t>(kStrata) * per);
        max_abs_err_ = std::max(max_abs_err_, kernels::transform_magnitudes(spec_, pts, d, mags, exec_));
        mc_evals_ += mags.size();
        for (int s = 0; s < kStrata; ++s) {
            mc_mags_[j][s].assign(mags.begin() + static_cast<long>(s * per),
                                  mags.begin() + static_cast<long>((s + 1) * per));
            for (double v : mc_mags_[j][s]) sups_[j] = std::max(sups_[j], v);
        }
    }
}

void ShellSampler::probe_sups() {
    const int d = dim_;
    const auto dirs = probe_directions(d);
    const double diam = std::max(support_diameter(spec_), 0.125);
    Vec pts;
    std::vector<std::size_t> owner;
    for (std::size_t j = 0; j < radii_.size(); ++j) {
        const double a = j == 0 ? 0.0 : radii_[j - 1], b = radii_[j];
        for (std::size_t k = 0; k < dirs.size(); ++k) {
            const std::size_t c = kProbesPerShell / dirs.size() + (k < kProbesPerShell % dirs.size() ? 1 : 0);
            if (c == 0) continue;
            // Offsets (q + 1/2) h never land on integer radii, where cube transforms vanish.
            const double h = std::min((b - a) / static_cast<double>(c), 1.0 / (8.0 * diam));
            for (std::size_t q = 0; q < c; ++q) {
                const double r = a + (static_cast<double>(q) + 0.5) * h;
                for (int i = 0; i < d; ++i) pts.push_back(r * dirs[k][i]);
                owner.push_back(j);
            }
        }
    }
    Vec mags(owner.size());
    max_abs_err_ = std::max(max_abs_err_, kernels::transform_magnitudes(spec_, pts, d, mags, exec_));
    for (std::size_t i = 0; i < owner.size(); ++i) sups_[owner[i]] = std::max(sups_[owner[i]], mags[i]);
    mc_evals_ += owner.size();
}

std::size_t ShellSampler::evaluations() const {
    return mc_evals_ + (profile_ ? profile_->evaluations() : 0);
}

ShellStats ShellSampler::stats(double theta) const {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    const double p = 2.0 / theta;
    const std::size_t n = radii_.size();
    ShellStats st;
    st.theta = theta;
    st.dim = dim_;
    st.radii = radii_;
    st.shell_sups = sups_;
    st.S.assign(n, 0.0);
    st.S_stderr.assign(n, 0.0);
    st.flagged.assign(n, false);
    if (profile_) {
        st.method = "quadrature";
        const ProfileValues pv = profile_->ball_integrals(p);
        double prev_s = 0.0, prev_e = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const std::size_t i = grid_->dyadic_index(static_cast<int>(j));
            // Cumulative maximum guards against round-off in the composed sums.
            st.S[j] = std::max(pv.G[i], prev_s);
            st.S_stderr[j] = pv.err[i];
            const double shell = st.S[j] - prev_s, shell_err = std::max(0.0, pv.err[i] - prev_e);
            st.flagged[j] = shell_err > tol::kShellRelStderr * shell;
            prev_s = st.S[j];
            prev_e = pv.err[i];
        }
        return st;
    }
    st.method = "monte-carlo";
    double acc = 0.0, var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double shell = 0.0, shell_var = 0.0;
        const double V = mc_stratum_volume_[j];
        for (const Vec& m : mc_mags_[j]) {
            const double k = static_cast<double>(m.size());
            double mean = 0.0;
            for (double v : m) mean += std::pow(v, p);
            mean /= k;
            double ss = 0.0;
            for (double v : m) {
                const double dv = std::pow(v, p) - mean;
                ss += dv * dv;
            }
            const double sample_var = m.size() > 1 ? ss / (k - 1.0) : 0.0;
            shell += V * mean;
            shell_var += V * V * sample_var / k;
        }
        acc += shell;
        var += shell_var;
        st.S[j] = acc;
        st.S_stderr[j] = std::sqrt(var);
        st.flagged[j] = std::sqrt(shell_var) > tol::kShellRelStderr * shell;
    }
    return st;
}

ShellStats shell_stats(const MeasureSpec& spec, double theta, double r_max, std::size_t budget,
                       std::uint64_t seed) {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    return ShellSampler(spec, r_max, budget, seed).stats(theta);
}

std::vector<std::pair<double, double>> sup_decay(const ShellStats& stats) {
    std::vector<std::pair<double, double>> out;
    for (std::size_t j = 0; j < stats.radii.size(); ++j) out.emplace_back(stats.radii[j], stats.shell_sups[j]);
    return out;
}

// ---------------------------------------------------------------------------
// Lattice energies

double LatticeEnergy::tail_slope() const {
    const std::size_t n = radii.size();
    const std::size_t w = window_length(n, 1.0 / 3.0);
    Vec x, y;
    for (std::size_t j = n - w; j < n; ++j) {
        x.push_back(std::log(radii[j]));
        y.push_back(std::log(partial_sums[j]));
    }
    return ols_slope(x, y);
}

double LatticeEnergy::increment_slope() const {
    const std::size_t n = radii.size();
    if (n < 3) throw InputError("need at least three lattice radii");
    const std::size_t w = window_length(n - 1, 1.0 / 3.0);
    Vec x, y;
    for (std::size_t j = n - w; j < n; ++j) {
        const double inc = increments[j];
        x.push_back(std::log(radii[j]));
        y.push_back(std::log(std::max(inc, 1e-300)));
    }
    return ols_slope(x, y);
}

double default_alpha(const MeasureSpec& spec) {
    const double diam = support_diameter(spec);
    return diam > 0.0 ? kDefaultAlphaFactor / diam : 0.5;
}

double lattice_point_count(int d, double alpha, double r_max) {
    const double m = std::floor(r_max / alpha);
    if (d == 1) return 2.0 * m + 1.0;
    return ball_volume(d, m + 0.5 * std::sqrt(static_cast<double>(d)));
}

namespace {

void flatten(const std::shared_ptr<const MeasureSpec>& s, int& offset,
             std::vector<std::pair<int, std::shared_ptr<const MeasureSpec>>>& out) {
    if (const auto* p = s->as<Product>()) {
        flatten(p->left, offset, out);
        flatten(p->right, offset, out);
        return;
    }
    if (const auto* c = s->as<UniformCube>()) {
        auto one = std::make_shared<const MeasureSpec>(MeasureSpec::uniform_cube(1));
        for (int i = 0; i < c->d; ++i) out.emplace_back(offset++, one);
        return;
    }
    out.emplace_back(offset, s);
    offset += s->ambient_dim();
}

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

}  // namespace

LatticeProbe::LatticeProbe(const MeasureSpec& spec, double alpha, double r_max, kernels::Exec exec)
    : spec_(spec), dim_(spec.ambient_dim()), alpha_(alpha), r_max_(r_max), exec_(exec) {
    if (dim_ > 3) throw InputError("lattice enumeration is limited to ambient dimension <= 3");
    const double diam = support_diameter(spec);
    if (!(alpha > 0.0) || (diam > 0.0 && !(alpha * diam < 1.0)))
        throw InputError("alpha must lie in (0, 1/diameter); diameter = " + std::to_string(diam));
    if (!(r_max >= 4.0 * alpha) || !std::isfinite(r_max)) throw InputError("R_max too small for the lattice spacing");
    m_max_ = static_cast<long>(std::floor(r_max / alpha));
    const double count = lattice_point_count(dim_, alpha, r_max);
    if (count > tol::kLatticeMaxPoints)
        throw BudgetError("lattice enumeration needs " + std::to_string(static_cast<long long>(count)) +
                              " points, above the limit",
                          count);

    std::vector<std::pair<int, std::shared_ptr<const MeasureSpec>>> leaves;
    int offset = 0;
    flatten(std::make_shared<const MeasureSpec>(spec), offset, leaves);
    const long M = m_max_;
    if (leaves.size() == 1 && dim_ > 1 && !spec.as<SphereSurface>()) {
        direct_ = true;
        return;
    }
    for (auto& [off, leaf] : leaves) {
        Block b{off, leaf->ambient_dim(), leaf, {}, false};
        Vec pts;
        std::vector<long> keys;
        if (leaf->as<SphereSurface>()) {
            // Only |m|^2 values that occur as sums of b.dim squares need a quadrature.
            b.radial = true;
            const long n2 = M * M;
            std::vector<char> hit(static_cast<std::size_t>(n2) + 1, 0);
            hit[0] = 1;
            if (b.dim == 1) {
                for (long a = 1; a <= M; ++a) hit[a * a] = 1;
            } else if (b.dim == 2) {
                for (long a = 0; a <= M; ++a)
                    for (long c = a; a * a + c * c <= n2; ++c) hit[a * a + c * c] = 1;
            } else {
                for (long a = 0; a <= M; ++a)
                    for (long c = a; a * a + c * c <= n2; ++c)
                        for (long e = c; a * a + c * c + e * e <= n2; ++e) hit[a * a + c * c + e * e] = 1;
            }
            for (long n = 0; n <= n2; ++n) {
                if (!hit[n]) continue;
                keys.push_back(n);
                pts.push_back(alpha * std::sqrt(static_cast<double>(n)));
                for (int i = 1; i < b.dim; ++i) pts.push_back(0.0);
            }
        } else {
            long count_pts = 1;
            for (int i = 0; i < b.dim; ++i) count_pts *= (2 * M + 1);
            for (long q = 0; q < count_pts; ++q) {
                long rem = q;
                for (int i = 0; i < b.dim; ++i) {
                    pts.push_back(alpha * static_cast<double>(rem % (2 * M + 1) - M));
                    rem /= (2 * M + 1);
                }
            }
        }
        Vec mags(pts.size() / b.dim);
        kernels::transform_magnitudes(*leaf, pts, b.dim, mags, exec_);
        if (b.radial) {
            b.log_mag.assign(static_cast<std::size_t>(M * M) + 1, -std::numeric_limits<double>::infinity());
            for (std::size_t i = 0; i < keys.size(); ++i) b.log_mag[keys[i]] = safe_log(mags[i]);
        } else {
            b.log_mag.resize(mags.size());
            for (std::size_t i = 0; i < mags.size(); ++i) b.log_mag[i] = safe_log(mags[i]);
        }
        blocks_.push_back(std::move(b));
    }
}

LatticeProbe::Table LatticeProbe::build_table(double theta) const {
    const double p = 2.0 / theta;
    const long M = m_max_;
    const std::size_t nkeys = dim_ == 1 ? static_cast<std::size_t>(M) + 1 : static_cast<std::size_t>(M * M) + 1;
    Vec sums(nkeys, 0.0);
    kernels::LatticeWeight weight;
    if (direct_) {
        weight = [&](std::span<const long> m) {
            double z[3];
            for (int i = 0; i < dim_; ++i) z[i] = alpha_ * static_cast<double>(m[i]);
            return std::pow(std::abs(fourier_eval(spec_, std::span<const double>(z, dim_)).value), p);
        };
    } else {
        weight = [&](std::span<const long> m) {
            double lg = 0.0;
            for (const Block& b : blocks_) {
                if (b.radial) {
                    long n2 = 0;
                    for (int i = 0; i < b.dim; ++i) n2 += m[b.offset + i] * m[b.offset + i];
                    lg += b.log_mag[static_cast<std::size_t>(n2)];
                } else {
                    long idx = 0, stride = 1;
                    for (int i = 0; i < b.dim; ++i) {
                        idx += (m[b.offset + i] + M) * stride;
                        stride *= (2 * M + 1);
                    }
                    lg += b.log_mag[static_cast<std::size_t>(idx)];
                }
            }
            return std::exp(p * lg);
        };
    }
    kernels::lattice_accumulate(dim_, M, weight, sums, exec_);

    Table t;
    double z0[3] = {0.0, 0.0, 0.0};
    t.origin = std::pow(std::abs(fourier_eval(spec_, std::span<const double>(z0, dim_)).value), p);
    for (std::size_t key = 1; key < nkeys; ++key) {
        if (sums[key] == 0.0) continue;
        const double r = dim_ == 1 ? alpha_ * static_cast<double>(key) : alpha_ * std::sqrt(static_cast<double>(key));
        t.radius.push_back(r);
        t.weight.push_back(sums[key]);
    }
    return t;
}

const LatticeProbe::Table& LatticeProbe::table(double theta) const {
    std::lock_guard lock(mu_);
    auto it = tables_.find(theta);
    if (it == tables_.end()) it = tables_.emplace(theta, build_table(theta)).first;
    return it->second;
}

LatticeEnergy LatticeProbe::energy(double s, double theta) const {
    if (!(theta > 0.0 && theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
    if (!(s >= 0.0)) throw InputError("s must be non-negative");
    const Table& t = table(theta);
    LatticeEnergy e;
    e.s = s;
    e.theta = theta;
    e.alpha = alpha_;
    const double q = s / theta - dim_;
    int j = std::max(0, static_cast<int>(std::ceil(std::log2(alpha_))));
    std::size_t k = 0;
    double acc = t.origin;
    for (double R = std::ldexp(1.0, j); R <= r_max_ * (1.0 + 1e-12); R *= 2.0) {
        double inc = 0.0;
        while (k < t.radius.size() && t.radius[k] <= R * (1.0 + 1e-12)) {
            inc += t.weight[k] * std::pow(t.radius[k], q);
            ++k;
        }
        acc += inc;
        e.radii.push_back(R);
        e.partial_sums.push_back(acc);
        e.increments.push_back(e.radii.size() == 1 ? 0.0 : inc);
    }
    return e;
}

LatticeEnergy lattice_energy(const MeasureSpec& spec, double s, double theta, double alpha,
                             double r_max) {
    return LatticeProbe(spec, alpha, r_max).energy(s, theta);
}

void write_shell_stats_csv(std::ostream& out, const ShellStats& st) {
    out << "theta,R,S,S_stderr,shell_sup\n";
    for (std::size_t j = 0; j < st.radii.size(); ++j)
        out << csv::num(st.theta) << ',' << csv::num(st.radii[j]) << ',' << csv::num(st.S[j]) << ','
            << csv::num(st.S_stderr[j]) << ',' << csv::num(st.shell_sups[j]) << '\n';
}

void write_lattice_energy_csv(std::ostream& out, const LatticeEnergy& e) {
    out << "s,theta,alpha,R,partial_sum\n";
    for (std::size_t j = 0; j < e.radii.size(); ++j)
        out << csv::num(e.s) << ',' << csv::num(e.theta) << ',' << csv::num(e.alpha) << ',' << csv::num(e.radii[j])
            << ',' << csv::num(e.partial_sums[j]) << '\n';
}

}  // namespace fspec
