#include "fspec/radial_profile.hpp"

#include "fspec/measures.hpp"
#include "fspec/quadrature.hpp"
#include "fspec/tolerances.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>

namespace fspec {

RadialGrid::RadialGrid(int octaves, int per_octave, int linear)
    : octaves_(octaves), per_octave_(per_octave), linear_(linear) {
    if (octaves < 0 || per_octave < 1 || linear < 1)
        throw InputError("RadialGrid: bad resolution");
    t_.reserve(static_cast<std::size_t>(linear + octaves * per_octave + 1));
    for (int i = 0; i <= linear; ++i) t_.push_back(static_cast<double>(i) / linear);
    for (int m = 1; m <= octaves * per_octave; ++m) {
        if (m % per_octave == 0)
            t_.push_back(std::ldexp(1.0, m / per_octave));
        else
            t_.push_back(std::exp2(static_cast<double>(m) / per_octave));
    }
}

std::shared_ptr<const RadialGrid> RadialGrid::shared(int octaves) {
    static std::mutex mu;
    static std::map<int, std::shared_ptr<const RadialGrid>> grids;
    std::lock_guard lock(mu);
    auto& g = grids[octaves];
    if (!g) g = std::make_shared<const RadialGrid>(octaves);
    return g;
}

std::size_t RadialGrid::floor_index(double x) const {
    const std::size_t n = t_.size();
    if (!(x > 0.0)) return 0;
    long i;
    if (x < 1.0)
        i = static_cast<long>(x * linear_);
    else
        i = linear_ + static_cast<long>(std::log2(x) * per_octave_);
    i = std::clamp(i, 0L, static_cast<long>(n) - 1);
    while (i + 1 < static_cast<long>(n) && t_[i + 1] <= x) ++i;
    while (i > 0 && t_[i] > x) --i;
    return static_cast<std::size_t>(i);
}

std::size_t RadialGrid::dyadic_index(int j) const {
    if (j < 0 || j > octaves_) throw std::out_of_range("dyadic_index");
    return static_cast<std::size_t>(linear_ + j * per_octave_);
}

std::size_t RadialGrid::cell_of(double x) const {
    if (!(x > 0.0)) return 0;
    std::size_t i = floor_index(x);
    if (t_[i] < x && i + 1 < t_.size()) ++i;
    return i;
}

namespace {

using quad::GaussKronrod15;

class CachedProfile : public RadialProfile {
public:
    using RadialProfile::RadialProfile;

    ProfileValues ball_integrals(double p) const final {
        {
            std::lock_guard lock(mu_);
            auto it = cache_.find(p);
            if (it != cache_.end()) return it->second;
        }
        ProfileValues v = compute(p);
        std::lock_guard lock(mu_);
        return cache_.emplace(p, std::move(v)).first->second;
    }

protected:
    virtual ProfileValues compute(double p) const = 0;

private:
    mutable std::mutex mu_;
    mutable std::map<double, ProfileValues> cache_;
};

// Quadrature over one radial variable: either a one-dimensional measure
// (integrand 2 |mu^(u)|^p on [0, t]) or a sphere surface measure in R^D
// (integrand |S^{D-1}| rho^{D-1} |sigma^(rho)|^p).
class LeafProfile final : public CachedProfile {
public:
    LeafProfile(const RadialGrid& g, int dim, std::function<double(double)> mag, double panel_width,
                kernels::Exec exec)
        : CachedProfile(g, dim), mag_(std::move(mag)), exec_(exec) {
        const Vec& t = g.t();
        const std::size_t n = t.size();
        area_ = dim == 1 ? 2.0 : sphere_area(dim - 1);
        cell_first_.assign(n + 1, 0);
        for (std::size_t i = 1; i < n; ++i) {
            cell_first_[i] = a_.size();
            const double lo = t[i - 1], hi = t[i];
            const auto k = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) / panel_width)));
            for (std::size_t q = 0; q < k; ++q) {
                a_.push_back(lo + (hi - lo) * static_cast<double>(q) / static_cast<double>(k));
                b_.push_back(q + 1 == k ? hi : lo + (hi - lo) * static_cast<double>(q + 1) / static_cast<double>(k));
                shell_.push_back(shell_of(g, hi));
            }
        }
        cell_first_[n] = a_.size();
        cell_first_[0] = 0;

        const std::size_t np = a_.size();
        Vec nodes(np * 15);
        for (std::size_t q = 0; q < np; ++q) {
            auto x = GaussKronrod15::abscissae(a_[q], b_[q]);
            std::copy(x.begin(), x.end(), nodes.begin() + static_cast<long>(q * 15));
        }
        mags_.assign(np * 15, 0.0);
        run(np * 15, [&](std::size_t i) { mags_[i] = mag_(nodes[i]); });
        evals_ += np * 15 + 1;

        sup_.assign(n, 0.0);
        sup_[0] = mag_(0.0);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t q = cell_first_[i]; q < cell_first_[i + 1]; ++q)
                for (int j = 0; j < 15; ++j) sup_[i] = std::max(sup_[i], mags_[q * 15 + j]);
    }

    std::size_t evaluations() const override { return evals_; }

protected:
    ProfileValues compute(double p) const override {
        const std::size_t np = a_.size();
        Vec val(np), err(np);
        auto weight = [&](double u) { return dim_ == 1 ? area_ : area_ * std::pow(u, dim_ - 1); };
        for (std::size_t q = 0; q < np; ++q) {
            auto x = GaussKronrod15::abscissae(a_[q], b_[q]);
            std::array<double, 15> v{};
            for (int j = 0; j < 15; ++j) v[j] = weight(x[j]) * std::pow(mags_[q * 15 + j], p);
            auto e = GaussKronrod15::combine(a_[q], b_[q], v);
            val[q] = e.kronrod;
            err[q] = e.error();
        }

        // Refine panels whose error is large against their dyadic shell.
        const int nshell = grid_->octaves() + 1;
        Vec base(nshell, 0.0);
        std::vector<std::size_t> count(nshell, 0);
        for (std::size_t q = 0; q < np; ++q) {
            base[shell_[q]] += val[q];
            ++count[shell_[q]];
        }
        std::vector<std::size_t> todo;
        Vec tol(np, 0.0);
        for (std::size_t q = 0; q < np; ++q) {
            const int s = shell_[q];
            tol[q] = kPanelRelTol * base[s] / static_cast<double>(count[s]);
            if (err[q] > tol[q] && tol[q] > 0.0) todo.push_back(q);
        }
        if (!todo.empty()) {
            std::atomic<std::size_t> extra{0};
            auto f = [&](double u) {
                extra.fetch_add(1, std::memory_order_relaxed);
                return weight(u) * std::pow(mag_(u), p);
            };
            run(todo.size(), [&](std::size_t k) {
                const std::size_t q = todo[k];
                auto r = quad::adaptive(f, a_[q], b_[q], tol[q], 8);
                val[q] = r.value;
                err[q] = r.abs_err;
            });
            evals_ += extra.load();
        }

        const std::size_t n = grid_->size();
        ProfileValues out{Vec(n, 0.0), Vec(n, 0.0)};
        for (std::size_t i = 1; i < n; ++i) {
            double g = 0.0, e = 0.0;
            for (std::size_t q = cell_first_[i]; q < cell_first_[i + 1]; ++q) {
                g += val[q];
                e += err[q];
            }
            out.G[i] = out.G[i - 1] + g;
            out.err[i] = out.err[i - 1] + e;
        }
        return out;
    }

private:
    static constexpr double kPanelRelTol = 1e-4;

    static int shell_of(const RadialGrid& g, double hi) {
        if (hi <= 1.0) return 0;
        return std::min(g.octaves(), static_cast<int>(std::ceil(std::log2(hi) - 1e-12)));
    }

    template <class Body>
    void run(std::size_t n, Body&& body) const {
        if (exec_ == kernels::Exec::Serial) {
            for (std::size_t i = 0; i < n; ++i) body(i);
            return;
        }
        std::exception_ptr ex;
        std::mutex m;
#pragma omp parallel for schedule(dynamic, 64)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            try {
                body(static_cast<std::size_t>(i));
            } catch (...) {
                std::lock_guard lock(m);
                if (!ex) ex = std::current_exception();
            }
        }
        if (ex) std::rethrow_exception(ex);
    }

    std::function<double(double)> mag_;
    kernels::Exec exec_;
    double area_ = 2.0;
    Vec a_, b_, mags_;
    std::vector<int> shell_;
    std::vector<std::size_t> cell_first_;
    mutable std::size_t evals_ = 0;
};

// Sparse table for range maxima.
class RangeMax {
public:
    explicit RangeMax(const Vec& v) {
        const std::size_t n = v.size();
        levels_.push_back(v);
        for (std::size_t w = 1; 2 * w <= n; w *= 2) {
            const Vec& prev = levels_.back();
            Vec next(n - 2 * w + 1);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(prev[i], prev[i + w]);
            levels_.push_back(std::move(next));
        }
    }
    double query(std::size_t lo, std::size_t hi) const {
        if (lo > hi) return 0.0;
        const std::size_t len = hi - lo + 1;
        std::size_t k = 0;
        while ((std::size_t{2} << k) <= len) ++k;
        return std::max(levels_[k][lo], levels_[k][hi + 1 - (std::size_t{1} << k)]);
    }

private:
    std::vector<Vec> levels_;
};

class ProductProfile final : public CachedProfile {
public:
    ProductProfile(const RadialGrid& g, std::shared_ptr<RadialProfile> a,
                   std::shared_ptr<RadialProfile> b, kernels::Exec exec)
        : CachedProfile(g, a->dim() + b->dim()), a_(std::move(a)), b_(std::move(b)), exec_(exec) {
        const Vec& t = g.t();
        const std::size_t n = t.size();
        const Vec& ma = a_->cell_sup();
        RangeMax mb(b_->cell_sup());
        sup_.assign(n, 0.0);
        sup_[0] = ma[0] * b_->cell_sup()[0];
        for (std::size_t k = 1; k < n; ++k) {
            const double lo2 = t[k - 1] * t[k - 1], hi2 = t[k] * t[k];
            double m = ma[0] * b_->cell_sup()[k];
            for (std::size_t i = 1; i < n && t[i - 1] <= t[k]; ++i) {
                if (ma[i] * mb.query(0, n - 1) <= m) continue;
                const double blo = std::sqrt(std::max(0.0, lo2 - t[i] * t[i]));
                const double bhi = std::sqrt(std::max(0.0, hi2 - t[i - 1] * t[i - 1]));
                m = std::max(m, ma[i] * mb.query(g.cell_of(blo), g.cell_of(bhi)));
            }
            sup_[k] = m;
        }
    }

    std::size_t evaluations() const override { return a_->evaluations() + b_->evaluations(); }

protected:
    ProfileValues compute(double p) const override {
        ProfileValues ga = a_->ball_integrals(p), gb = b_->ball_integrals(p);
        const RadialGrid& g = *grid_;
        auto c = kernels::compose_ball_integrals(
            g.t(), ga.G, gb.G, [&g](double x) { return g.floor_index(x); }, exec_);
        const std::size_t n = g.size();
        ProfileValues out{std::move(c.central), Vec(n, 0.0)};
        for (std::size_t k = 0; k < n; ++k) {
            const double bracket = std::max(c.upper[k] - out.G[k], out.G[k] - c.lower[k]);
            out.err[k] = bracket + ga.err[k] * gb.G[k] + ga.G[k] * gb.err[k] + ga.err[k] * gb.err[k];
        }
        return out;
    }

private:
    std::shared_ptr<RadialProfile> a_, b_;
    kernels::Exec exec_;
};

std::shared_ptr<RadialProfile> build_node(const MeasureSpec& spec, const RadialGrid& g,
                                          kernels::Exec exec) {
    auto leaf1d = [&](const MeasureSpec& s) -> std::shared_ptr<RadialProfile> {
        const double diam = support_diameter(s);
        const double w = 1.0 / (4.0 * std::max(diam, 0.25));
        auto mag = [s](double u) {
            double z[1] = {u};
            return std::abs(fourier_eval(s, z).value);
        };
        return std::make_shared<LeafProfile>(g, 1, mag, w, exec);
    };
    if (const auto* a = spec.as<Atomic>()) {
        if (spec.ambient_dim() != 1) return nullptr;
        (void)a;
        return leaf1d(spec);
    }
    if (spec.as<SelfSimilar1D>()) return leaf1d(spec);
    if (const auto* c = spec.as<UniformCube>()) {
        std::shared_ptr<RadialProfile> one = leaf1d(MeasureSpec::uniform_cube(1));
        std::shared_ptr<RadialProfile> acc = one;
        for (int i = 1; i < c->d; ++i) acc = std::make_shared<ProductProfile>(g, acc, one, exec);
        return acc;
    }
    if (const auto* s = spec.as<SphereSurface>()) {
        // Sphere leaves are the expensive ones; share them across profiles
        // built on the same (process-lifetime) grid.
        static std::mutex cache_mu;
        static std::map<std::pair<int, const RadialGrid*>, std::shared_ptr<RadialProfile>> cache;
        const int k = s->k;
        std::lock_guard lock(cache_mu);
        auto it = cache.find({k, &g});
        if (it == cache.end()) {
            auto mag = [k](double rho) {
                return std::abs(sphere_transform(k, rho, 0.1 * tol::kSphereAbsErr).value);
            };
            it = cache.emplace(std::make_pair(k, &g),
                               std::make_shared<LeafProfile>(g, k + 1, mag, 1.0 / 8.0, exec)).first;
        }
        return it->second;
    }
    if (const auto* p = spec.as<Product>()) {
        auto l = build_node(*p->left, g, exec);
        if (!l) return nullptr;
        auto r = build_node(*p->right, g, exec);
        if (!r) return nullptr;
        return std::make_shared<ProductProfile>(g, l, r, exec);
    }
    return nullptr;
}

}  // namespace

std::unique_ptr<RadialProfile> RadialProfile::build(const MeasureSpec& spec, const RadialGrid& grid,
                                                    kernels::Exec exec) {
    auto node = build_node(spec, grid, exec);
    if (!node) return nullptr;
    // Hand out a unique owner of the shared tree.
    struct Holder final : RadialProfile {
        Holder(std::shared_ptr<RadialProfile> n) : RadialProfile(n->grid(), n->dim()), node(std::move(n)) {
            sup_ = node->cell_sup();
        }
        std::size_t evaluations() const override { return node->evaluations(); }
        ProfileValues ball_integrals(double p) const override { return node->ball_integrals(p); }
        std::shared_ptr<RadialProfile> node;
    };
    return std::make_unique<Holder>(std::move(node));
}

}  // namespace fspec
