#include "fspec/setdim.hpp"

#include "fspec/csv.hpp"
#include "fspec/fit.hpp"
#include "fspec/tolerances.hpp"
#include "fspec/transform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace fspec {

// ---------------------------------------------------------------------------
// Point clouds

namespace {

double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double max_pairwise(const std::vector<Vec>& p) {
    const long n = static_cast<long>(p.size());
    double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(dynamic, 64)
    for (long i = 0; i < n; ++i)
        for (long j = i + 1; j < n; ++j) best = std::max(best, dist(p[i], p[j]));
    return best;
}

}  // namespace

PointCloud::PointCloud(std::vector<Vec> points) : points_(std::move(points)) {
    validate();
    diameter_ = max_pairwise(points_);
}

PointCloud::PointCloud(std::vector<Vec> points, double diameter)
    : points_(std::move(points)), diameter_(diameter) {
    validate();
    if (!(diameter >= 0.0)) throw InputError("diameter must be non-negative");
}

void PointCloud::validate() {
    if (points_.empty()) throw InputError("point cloud must contain at least one point");
    d_ = static_cast<int>(points_[0].size());
    if (d_ < 1) throw InputError("points must have at least one coordinate");
    for (std::size_t i = 0; i < points_.size(); ++i) {
        if (static_cast<int>(points_[i].size()) != d_)
            throw InputError("point " + std::to_string(i) + " has " + std::to_string(points_[i].size()) +
                             " coordinates, expected " + std::to_string(d_));
        for (double x : points_[i])
            if (!std::isfinite(x)) throw InputError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
}

PointCloud read_cloud_csv(std::istream& in, const std::string& source) {
    std::vector<Vec> pts;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        Vec row;
        std::stringstream ss(line);
        std::string field;
        std::size_t col = 0;
        while (std::getline(ss, field, ',')) {
            ++col;
            const auto b = field.find_first_not_of(" \t"), e = field.find_last_not_of(" \t");
            const std::string f = b == std::string::npos ? "" : field.substr(b, e - b + 1);
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(f, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (f.empty() || used != f.size() || !std::isfinite(v))
                throw InputError(source + ":" + std::to_string(lineno) + ": field " + std::to_string(col) +
                                 " is not a finite decimal number: '" + f + "'");
            row.push_back(v);
        }
        if (!pts.empty() && row.size() != pts[0].size())
            throw InputError(source + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(pts[0].size()) + " columns, found " + std::to_string(row.size()));
        pts.push_back(std::move(row));
    }
    if (pts.empty()) throw InputError(source + ": no points");
    return PointCloud(std::move(pts));
}

PointCloud load_cloud(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open point cloud file " + path);
    return read_cloud_csv(in, path);
}

PointCloud uniform_grid_cloud(int d, std::size_t per_axis) {
    if (d < 1 || per_axis < 1) throw InputError("grid needs d >= 1 and at least one point per axis");
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) total *= per_axis;
    std::vector<Vec> pts;
    pts.reserve(total);
    const double step = per_axis > 1 ? 1.0 / static_cast<double>(per_axis - 1) : 0.0;
    for (std::size_t q = 0; q < total; ++q) {
        Vec x(d);
        std::size_t rem = q;
        for (int i = d - 1; i >= 0; --i) {
            x[i] = static_cast<double>(rem % per_axis) * step;
            rem /= per_axis;
        }
        pts.push_back(std::move(x));
    }
    return PointCloud(std::move(pts), per_axis > 1 ? std::sqrt(static_cast<double>(d)) : 0.0);
}

PointCloud cantor_cloud(int level) {
    if (level < 0 || level > 20) throw InputError("Cantor level must lie in [0, 20]");
    std::vector<Vec> pts;
    const std::size_t n = std::size_t{1} << level;
    for (std::size_t q = 0; q < n; ++q) {
        double x = 0.0, scale = 1.0;
        for (int i = level - 1; i >= 0; --i) {
            scale /= 3.0;
            if (q & (std::size_t{1} << i)) x += 2.0 * scale;
        }
        pts.push_back({x});
    }
    const double diam = level == 0 ? 0.0 : 1.0 - std::pow(3.0, -level);
    return PointCloud(std::move(pts), diam);
}

// ---------------------------------------------------------------------------
// Simplex-constrained quadratic minimisation

namespace {

class KernelAccess {
public:
    KernelAccess(std::size_t n, const kernels::KernelEntry& entry, kernels::Exec exec)
        : n_(n), entry_(entry), exec_(exec), dense_(n <= tol::kDenseKernelMaxPoints) {
        if (dense_) {
            K_.resize(static_cast<long>(n), static_cast<long>(n));
            const long nn = static_cast<long>(n);
            if (exec == kernels::Exec::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
                for (long j = 0; j < nn; ++j)
                    for (long i = 0; i < nn; ++i) K_(i, j) = entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            } else {
                for (long j = 0; j < nn; ++j)
                    for (long i = 0; i < nn; ++i) K_(i, j) = entry(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            }
        } else {
            col_.resize(n);
            diag_.resize(n);
            for (std::size_t i = 0; i < n; ++i) diag_[i] = entry(i, i);
        }
    }

    double diag(std::size_t i) const { return dense_ ? K_(static_cast<long>(i), static_cast<long>(i)) : diag_[i]; }

    // y = (1 - g) y + g K e_j  (g may be negative for away steps).
    void blend_column(std::size_t j, double keep, double g, Vec& y) {
        if (dense_) {
            const double* c = K_.col(static_cast<long>(j)).data();
            for (std::size_t i = 0; i < n_; ++i) y[i] = keep * y[i] + g * c[i];
        } else {
            kernels::kernel_column(n_, entry_, j, col_, exec_);
            for (std::size_t i = 0; i < n_; ++i) y[i] = keep * y[i] + g * col_[i];
        }
    }

    void matvec(const Vec& w, Vec& y) const {
        if (dense_) {
            Eigen::Map<const Eigen::VectorXd> wm(w.data(), static_cast<long>(n_));
            Eigen::Map<Eigen::VectorXd> ym(y.data(), static_cast<long>(n_));
            ym.noalias() = K_ * wm;
        } else {
            kernels::kernel_matvec(n_, entry_, w, y, exec_);
        }
    }

private:
    std::size_t n_;
    const kernels::KernelEntry& entry_;
    kernels::Exec exec_;
    bool dense_;
    Eigen::MatrixXd K_;
    Vec col_, diag_;
};

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Away-step Frank-Wolfe with exact line search. The objective need not be
// convex (the truncated Riesz kernel is indefinite); the gap then
// certifies first-order stationarity.
SimplexSolution away_step_fw(KernelAccess& K, Vec w, const SolverOptions& opt) {
    const std::size_t n = w.size();
    Vec Kw(n);
    K.matvec(w, Kw);
    double f = dot(w, Kw);
    SimplexSolution sol;
    auto threshold = [&](double obj) { return opt.relative ? opt.tol * obj : opt.tol; };
    long it = 0;
    for (; it < opt.max_iterations; ++it) {
        std::size_t i = static_cast<std::size_t>(std::min_element(Kw.begin(), Kw.end()) - Kw.begin());
        double gap = 2.0 * (f - Kw[i]);
        if (gap <= threshold(f)) {
            // Confirm against a fresh product to remove accumulated drift.
            K.matvec(w, Kw);
            f = dot(w, Kw);
            i = static_cast<std::size_t>(std::min_element(Kw.begin(), Kw.end()) - Kw.begin());
            gap = 2.0 * (f - Kw[i]);
            if (gap <= threshold(f)) {
                sol.converged = true;
                break;
            }
        }
        std::size_t j = n;
        for (std::size_t q = 0; q < n; ++q)
            if (w[q] > 0.0 && (j == n || Kw[q] > Kw[j])) j = q;
        const double fw_gain = f - Kw[i], aw_gain = Kw[j] - f;
        if (fw_gain >= aw_gain) {
            const double slope = Kw[i] - f;  // d^T K w
            const double curv = K.diag(i) - 2.0 * Kw[i] + f;
            double g = curv > 0.0 ? std::min(1.0, -slope / curv) : 1.0;
            if (!(g > 0.0)) break;
            for (double& x : w) x *= (1.0 - g);
            w[i] += g;
            K.blend_column(i, 1.0 - g, g, Kw);
        } else {
            const double gmax = w[j] < 1.0 ? w[j] / (1.0 - w[j]) : std::numeric_limits<double>::infinity();
            const double slope = f - Kw[j];
            const double curv = f - 2.0 * Kw[j] + K.diag(j);
            double g = curv > 0.0 ? std::min(gmax, -slope / curv) : gmax;
            if (!(g > 0.0) || !std::isfinite(g)) break;
            const bool drop = g >= gmax;
            for (double& x : w) x *= (1.0 + g);
            w[j] -= g;
            if (drop) w[j] = 0.0;
            K.blend_column(j, 1.0 + g, -g, Kw);
        }
        f = dot(w, Kw);
    }
    K.matvec(w, Kw);
    f = dot(w, Kw);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& x : w) x /= s;
    f /= s * s;
    sol.weights = std::move(w);
    sol.objective = f;
    sol.gap = std::max(0.0, 2.0 * (f - *std::min_element(Kw.begin(), Kw.end()) / s));
    sol.iterations = it;
    sol.converged = sol.converged && sol.gap <= threshold(f) * (1.0 + 1e-6) + 1e-15;
    return sol;
}

}  // namespace

SimplexSolution minimize_on_simplex(std::size_t n, const kernels::KernelEntry& entry,
                                    const SolverOptions& opt) {
    if (n == 0) throw InputError("empty problem");
    KernelAccess K(n, entry, opt.exec);
    SimplexSolution best = away_step_fw(K, Vec(n, 1.0 / static_cast<double>(n)), opt);
    if (opt.multistart) {
        for (std::size_t v = 0; v < n; ++v) {
            Vec w(n, 0.0);
            w[v] = 1.0;
            SimplexSolution s = away_step_fw(K, std::move(w), opt);
            if (s.converged && (!best.converged || s.objective < best.objective - 1e-14)) best = std::move(s);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Capacity and box dimensions

namespace {

// Coordinates in one contiguous block for the kernel closures.
struct Flat {
    explicit Flat(const PointCloud& c) : d(c.dim()), x(c.size() * c.dim()) {
        for (std::size_t i = 0; i < c.size(); ++i)
            for (int k = 0; k < d; ++k) x[i * d + k] = c[i][k];
    }
    double dist2(std::size_t i, std::size_t j) const {
        double s = 0.0;
        for (int k = 0; k < d; ++k) {
            const double t = x[i * d + k] - x[j * d + k];
            s += t * t;
        }
        return s;
    }
    int d;
    Vec x;
};

void check_scales(const Vec& r) {
    if (r.size() < 6) throw InputError("need at least 6 scales");
    for (double v : r)
        if (!(v > 0.0 && v < 1.0)) throw InputError("scales must lie in (0, 1)");
}

ProfileDims slopes_from(Vec scales, Vec values) {
    ProfileDims p;
    p.scales = std::move(scales);
    p.values = std::move(values);
    const std::size_t n = p.scales.size();
    const std::size_t w = window_length(n, 1.0 / 3.0, 3);
    for (std::size_t k = n - w + 1; k < n; ++k)
        p.slopes.push_back((std::log(p.values[k]) - std::log(p.values[k - 1])) /
                           (std::log(p.scales[k - 1]) - std::log(p.scales[k])));
    p.upper = *std::max_element(p.slopes.begin(), p.slopes.end());
    p.lower = *std::min_element(p.slopes.begin(), p.slopes.end());
    return p;
}

Vec sorted_decreasing(Vec r) {
    std::sort(r.begin(), r.end(), std::greater<>());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    return r;
}

}  // namespace

CapacityResult capacity(const PointCloud& cloud, double r, double s, double tol) {
    SolverOptions opt;
    opt.tol = tol;
    opt.multistart = cloud.size() <= 32;
    return capacity(cloud, r, s, opt);
}

CapacityResult capacity(const PointCloud& cloud, double r, double s, const SolverOptions& opt) {
    if (!(r > 0.0 && r < 1.0)) throw InputError("capacity scale r must lie in (0, 1)");
    if (!(s > 0.0 && s < cloud.dim())) throw InputError("capacity exponent s must lie in (0, d)");
    if (!(opt.tol > 0.0)) throw InputError("tolerance must be positive");
    CapacityResult res;
    res.r = r;
    res.s = s;
    if (cloud.size() == 1) {
        res.minimizer = {1.0};
        return res;
    }
    const Flat flat(cloud);
    const double r2 = r * r;
    kernels::KernelEntry entry = [&flat, r2, s](std::size_t i, std::size_t j) {
        if (i == j) return 1.0;
        const double q = flat.dist2(i, j);
        return q <= r2 ? 1.0 : std::pow(r2 / q, 0.5 * s);
    };
    SimplexSolution sol = minimize_on_simplex(cloud.size(), entry, opt);
    res.value = 1.0 / sol.objective;
    res.minimizer = std::move(sol.weights);
    res.duality_gap = sol.gap;
    res.iterations = sol.iterations;
    res.converged = sol.converged;
    return res;
}

ProfileDims box_profile_dims(const PointCloud& cloud, double s, Vec r_list, double rel_tol) {
    check_scales(r_list);
    Vec scales = sorted_decreasing(std::move(r_list));
    check_scales(scales);
    SolverOptions opt;
    opt.tol = rel_tol;
    opt.relative = true;
    Vec vals;
    for (double r : scales) vals.push_back(capacity(cloud, r, s, opt).value);
    return slopes_from(std::move(scales), std::move(vals));
}

Vec default_s_sequence(int d) {
    Vec s;
    for (int m = 1; m <= 5; ++m) s.push_back(d - std::ldexp(1.0, -m));
    return s;
}

BoxDimFourier box_dim_fourier(const PointCloud& cloud, Vec s_sequence, Vec r_list, double rel_tol) {
    if (s_sequence.empty()) throw InputError("empty s sequence");
    for (std::size_t i = 0; i < s_sequence.size(); ++i) {
        if (!(s_sequence[i] > 0.0 && s_sequence[i] < cloud.dim())) throw InputError("s values must lie in (0, d)");
        if (i > 0 && !(s_sequence[i] > s_sequence[i - 1])) throw InputError("s sequence must increase");
    }
    BoxDimFourier b;
    b.s_values = s_sequence;
    for (double s : s_sequence) {
        b.profiles.push_back(box_profile_dims(cloud, s, r_list, rel_tol));
        if (b.profiles.size() > 1)
            b.upper_increments.push_back(b.profiles.back().upper - b.profiles[b.profiles.size() - 2].upper);
    }
    b.upper = b.profiles.back().upper;
    b.lower = b.profiles.back().lower;
    return b;
}

ProfileDims box_counting(const PointCloud& cloud, Vec r_list) {
    check_scales(r_list);
    Vec scales = sorted_decreasing(std::move(r_list));
    check_scales(scales);
    const int d = cloud.dim();
    Vec lo(d, std::numeric_limits<double>::infinity());
    for (const Vec& p : cloud.points())
        for (int k = 0; k < d; ++k) lo[k] = std::min(lo[k], p[k]);
    Vec counts;
    for (double r : scales) {
        std::vector<std::vector<long>> cells;
        cells.reserve(cloud.size());
        for (const Vec& p : cloud.points()) {
            std::vector<long> c(d);
            // The small offset keeps points that sit on a cell boundary in
            // the upper cell despite rounding in (x - lo) / r.
            for (int k = 0; k < d; ++k) c[k] = static_cast<long>(std::floor((p[k] - lo[k]) / r + 1e-9));
            cells.push_back(std::move(c));
        }
        std::sort(cells.begin(), cells.end());
        counts.push_back(static_cast<double>(std::unique(cells.begin(), cells.end()) - cells.begin()));
    }
    return slopes_from(std::move(scales), std::move(counts));
}

// ---------------------------------------------------------------------------
// Energies

EnergyResult frostman_energy(const PointCloud& cloud, double s, double tol) {
    SolverOptions opt;
    opt.tol = tol;
    opt.multistart = cloud.size() <= 32;
    return frostman_energy(cloud, s, opt);
}

EnergyResult frostman_energy(const PointCloud& cloud, double s, const SolverOptions& opt) {
    if (!(s > 0.0 && s < cloud.dim())) throw InputError("energy exponent s must lie in (0, d)");
    EnergyResult res;
    res.s = s;
    const std::size_t n = cloud.size();
    if (n == 1) {
        res.minimizer = {1.0};
        return res;
    }
    const Flat flat(cloud);
    Vec nn2(n, std::numeric_limits<double>::infinity());
    const long ln = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < ln; ++i)
        for (long j = 0; j < ln; ++j)
            if (i != j) nn2[i] = std::min(nn2[i], flat.dist2(i, j));
    for (std::size_t i = 0; i < n; ++i)
        if (!(nn2[i] > 0.0)) throw InputError("frostman_energy needs pairwise distinct points");
    Vec self(n);
    for (std::size_t i = 0; i < n; ++i) self[i] = std::pow(0.25 * nn2[i], -0.5 * s);
    kernels::KernelEntry entry = [&flat, &self, s](std::size_t i, std::size_t j) {
        if (i == j) return self[i];
        return std::pow(flat.dist2(i, j), -0.5 * s);
    };
    SimplexSolution sol = minimize_on_simplex(n, entry, opt);
    res.min_energy = sol.objective;
    res.minimizer = std::move(sol.weights);
    res.duality_gap = sol.gap;
    res.iterations = sol.iterations;
    res.converged = sol.converged;
    return res;
}

BridgeResult kernel_fourier_bridge(const MeasureSpec& spec, double r, double s, std::uint64_t seed,
                                   std::size_t samples) {
    if (!(r > 0.0 && r < 1.0)) throw InputError("bridge scale r must lie in (0, 1)");
    if (!(s > 0.0)) throw InputError("bridge exponent s must be positive");
    const double R = 1.0 / r;
    const double j = std::log2(R);
    if (std::abs(j - std::round(j)) > 1e-9 || R < 4.0) throw InputError("bridge scale must be 2^-j with j >= 2");
    const auto X = sample(spec, samples, seed), Y = sample(spec, samples, seed + 1);
    const long n = static_cast<long>(samples);
    const double r2 = r * r;
    Vec rows(samples, 0.0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (long k = 0; k < n; ++k) {
            const double q = [&] {
                double t = 0.0;
                for (std::size_t c = 0; c < X[i].size(); ++c) t += (X[i][c] - Y[k][c]) * (X[i][c] - Y[k][c]);
                return t;
            }();
            acc += q <= r2 ? 1.0 : std::pow(r2 / q, 0.5 * s);
        }
        rows[i] = acc;
    }
    double sum = 0.0;
    for (double v : rows) sum += v;
    const double mass = total_mass(spec);
    BridgeResult b;
    b.kernel_side = mass * mass * sum / (static_cast<double>(samples) * static_cast<double>(samples));
    const ShellStats st = ShellSampler(spec, R, 4096, seed).stats(1.0);
    b.fourier_side = st.S.back() / std::pow(R, spec.ambient_dim());
    b.ratio = b.kernel_side / b.fourier_side;
    return b;
}

void write_capacity_csv(std::ostream& out, const std::vector<CapacityResult>& rows) {
    out << "r,s,capacity,gap,iterations\n";
    for (const auto& c : rows)
        out << csv::num(c.r) << ',' << csv::num(c.s) << ',' << csv::num(c.value) << ','
            << csv::num(c.duality_gap) << ',' << c.iterations << '\n';
}

}  // namespace fspec
