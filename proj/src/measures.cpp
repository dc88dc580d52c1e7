#include "fspec/measures.hpp"

#include "fspec/quadrature.hpp"
#include "fspec/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace fspec {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
}

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

MeasureSpec::MeasureSpec(Variant v) : v_(std::move(v)) {
    dim_ = std::visit(Overloaded{
                          [](const Atomic& a) { return static_cast<int>(a.points.front().size()); },
                          [](const UniformCube& c) { return c.d; },
                          [](const SphereSurface& s) { return s.k + 1; },
                          [](const SelfSimilar1D&) { return 1; },
                          [](const Product& p) {
                              return p.left->ambient_dim() + p.right->ambient_dim();
                          },
                      },
                      v_);
}

MeasureSpec MeasureSpec::atomic(std::vector<Vec> points, Vec weights) {
    require(!points.empty(), "Atomic: at least one point required");
    require(points.size() == weights.size(), "Atomic: points and weights differ in length");
    const std::size_t d = points.front().size();
    require(d >= 1, "Atomic: points must have dimension >= 1");
    for (const auto& p : points) {
        require(p.size() == d, "Atomic: points of mixed dimension");
        require(all_finite(p), "Atomic: non-finite coordinate");
    }
    for (double w : weights) require(std::isfinite(w) && w > 0.0, "Atomic: weights must be positive");
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    for (std::size_t i = 1; i < order.size(); ++i)
        require(points[order[i]] != points[order[i - 1]], "Atomic: points must be distinct");
    return MeasureSpec(Atomic{std::move(points), std::move(weights)});
}

MeasureSpec MeasureSpec::dirac(int d) {
    require(d >= 1, "dirac: dimension must be >= 1");
    return atomic({Vec(static_cast<std::size_t>(d), 0.0)}, {1.0});
}

MeasureSpec MeasureSpec::uniform_cube(int d) {
    require(d >= 1, "UniformCube: d must be >= 1");
    return MeasureSpec(UniformCube{d});
}

MeasureSpec MeasureSpec::sphere(int k) {
    require(k >= 1, "SphereSurface: k must be >= 1");
    return MeasureSpec(SphereSurface{k});
}

MeasureSpec MeasureSpec::self_similar(double ratio, Vec translations, Vec probabilities) {
    require(ratio > 0.0 && ratio < 1.0, "SelfSimilar1D: ratio must lie in (0,1)");
    require(!translations.empty(), "SelfSimilar1D: at least one map required");
    require(translations.size() == probabilities.size(),
            "SelfSimilar1D: translations and probabilities differ in length");
    double psum = 0.0;
    for (double p : probabilities) {
        require(std::isfinite(p) && p > 0.0, "SelfSimilar1D: probabilities must be positive");
        psum += p;
    }
    require(std::abs(psum - 1.0) <= 1e-12, "SelfSimilar1D: probabilities must sum to 1");
    for (double t : translations)
        require(std::isfinite(t) && t >= 0.0 && t + ratio <= 1.0 + 1e-12,
                "SelfSimilar1D: first-level interval [t, t + ratio] must lie in [0,1]");
    Vec sorted = translations;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
        require(sorted[i] >= sorted[i - 1] + ratio - 1e-12,
                "SelfSimilar1D: open set condition violated (overlapping first-level intervals)");
    return MeasureSpec(SelfSimilar1D{ratio, std::move(translations), std::move(probabilities)});
}

MeasureSpec MeasureSpec::product(const MeasureSpec& left, const MeasureSpec& right) {
    return MeasureSpec(Product{std::make_shared<const MeasureSpec>(left),
                               std::make_shared<const MeasureSpec>(right)});
}

MeasureSpec MeasureSpec::cantor() { return self_similar(1.0 / 3.0, {0.0, 2.0 / 3.0}, {0.5, 0.5}); }

std::string MeasureSpec::name() const {
    return std::visit(Overloaded{
                          [](const Atomic& a) {
                              if (a.points.size() == 1 && norm(a.points[0]) == 0.0)
                                  return std::string("delta0^") + std::to_string(a.points[0].size());
                              return "Atomic(n=" + std::to_string(a.points.size()) + ",d=" +
                                     std::to_string(a.points[0].size()) + ")";
                          },
                          [](const UniformCube& c) { return "L^" + std::to_string(c.d); },
                          [](const SphereSurface& s) { return "sigma^" + std::to_string(s.k); },
                          [](const SelfSimilar1D& s) {
                              std::ostringstream os;
                              os << "SelfSimilar(r=" << s.ratio << ",m=" << s.translations.size()
                                 << ")";
                              return os.str();
                          },
                          [](const Product& p) {
                              return "(" + p.left->name() + " x " + p.right->name() + ")";
                          },
                      },
                      v_);
}

// --- transforms ---------------------------------------------------------

double sphere_area(int k) {
    const double h = 0.5 * (k + 1);
    return 2.0 * std::pow(kPi, h) / std::tgamma(h);
}

namespace {

// log of the Bernstein-ellipse bound for one composite rule with `panels`
// equal panels on [0, pi/2], minimised over the ellipse parameter.
double log_sphere_bound(int k, double rho, long panels) {
    const double h = 0.25 * kPi / static_cast<double>(panels);
    const double omega = 2.0 * kPi * rho;
    double best = std::numeric_limits<double>::infinity();
    for (double beta = 1.05; beta < 60.0; beta *= 1.12) {
        const double b = 0.5 * h * (beta - 1.0 / beta);
        const double arg = omega * std::sinh(b);
        const double log_cosh = arg + std::log1p(std::exp(-2.0 * arg)) - std::log(2.0);
        const double log_m = log_cosh + (k - 1) * std::log(std::cosh(b));
        const double log_err = std::log(64.0 / 15.0) + log_m - 40.0 * std::log(beta) -
                               std::log(beta * beta - 1.0) + std::log(h);
        best = std::min(best, log_err);
    }
    return best + std::log(static_cast<double>(panels));
}

}  // namespace

FourierValue sphere_transform(int k, double rho, double abs_tol) {
    rho = std::abs(rho);
    const double mass = sphere_area(k);
    if (rho == 0.0) return {Complex(mass, 0.0), 0.0};
    // sigma^(rho) = 2 |S^{k-1}| \int_0^{pi/2} cos(2 pi rho cos phi) sin^{k-1}(phi) dphi
    const double scale = 2.0 * sphere_area(k - 1);
    const double log_target = std::log(abs_tol / scale);
    // About 15 radians of phase per 20-node panel meets 1e-9; grow in small
    // steps from just below that.
    long panels = std::max<long>(1, static_cast<long>(std::ceil(rho / 4.0)));
    const long cap = 64 + static_cast<long>(8.0 * rho);
    double log_bound = log_sphere_bound(k, rho, panels);
    while (log_bound > log_target && panels < cap) {
        panels = std::min(cap, panels + std::max<long>(1, panels / 8));
        log_bound = log_sphere_bound(k, rho, panels);
    }
    const double rounding = 40.0 * static_cast<double>(panels) * kEps * mass;
    const double bound = scale * std::exp(log_bound) + rounding;
    if (bound > abs_tol * 10.0)
        throw QuadratureError("sphere transform: could not certify tolerance", bound);

    const auto& xn = quad::GaussLegendre20::kNodes;
    const auto& wn = quad::GaussLegendre20::kWeights;
    const double h = 0.25 * kPi / static_cast<double>(panels);
    const double omega = 2.0 * kPi * rho;
    double sum = 0.0;
    for (long p = 0; p < panels; ++p) {
        const double c = (2.0 * static_cast<double>(p) + 1.0) * h;
        double panel = 0.0;
        for (int i = 0; i < 20; ++i) {
            const double phi = c + h * xn[i];
            double f = std::cos(omega * std::cos(phi));
            if (k > 1) f *= std::pow(std::sin(phi), k - 1);
            panel += wn[i] * f;
        }
        sum += panel * h;
    }
    return {Complex(scale * sum, 0.0), bound};
}

namespace {

FourierValue eval_atomic(const Atomic& a, std::span<const double> z) {
    Complex acc(0.0, 0.0);
    double err = 0.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) dot += z[j] * a.points[i][j];
        const double phase = -2.0 * kPi * dot;
        acc += a.weights[i] * Complex(std::cos(phase), std::sin(phase));
        err += a.weights[i] * (4.0 + std::abs(phase)) * kEps;
    }
    return {acc, err};
}

FourierValue eval_cube(std::span<const double> z) {
    Complex acc(1.0, 0.0);
    for (double zj : z) {
        if (zj == 0.0) continue;
        const double x = kPi * zj;
        acc *= Complex(std::cos(x), -std::sin(x)) * (std::sin(x) / x);
    }
    return {acc, 8.0 * kEps * static_cast<double>(z.size())};
}

FourierValue eval_self_similar(const SelfSimilar1D& s, double z) {
    if (z == 0.0) return {Complex(1.0, 0.0), 0.0};
    double tmax = 0.0;
    for (double t : s.translations) tmax = std::max(tmax, std::abs(t));
    const double az = std::abs(z);
    const double lead = 2.0 * kPi * az * tmax / (1.0 - s.ratio);
    const double target = std::log1p(tol::kSelfSimilarRelErr * 0.5);
    long n_terms = 0;
    if (lead > target)
        n_terms = static_cast<long>(std::ceil(std::log(target / lead) / std::log(s.ratio)));
    Complex acc(1.0, 0.0);
    double scale = 1.0;
    for (long n = 0; n < n_terms; ++n) {
        Complex factor(0.0, 0.0);
        for (std::size_t j = 0; j < s.translations.size(); ++j) {
            const double phase = -2.0 * kPi * z * scale * s.translations[j];
            factor += s.probabilities[j] * Complex(std::cos(phase), std::sin(phase));
        }
        acc *= factor;
        scale *= s.ratio;
    }
    const double tail = std::expm1(lead * std::pow(s.ratio, static_cast<double>(n_terms)));
    // Products and sums cost a few ulps per factor; each phase carries a
    // relative error of a few ulps, and the phases sum to at most lead.
    const double rounding =
        8.0 * kEps * static_cast<double>((n_terms + 1) * (s.translations.size() + 1)) + 4.0 * kEps * lead;
    return {acc, tail + rounding};
}

}  // namespace

FourierValue fourier_eval(const MeasureSpec& spec, std::span<const double> z) {
    if (static_cast<int>(z.size()) != spec.ambient_dim())
        throw InputError("fourier_eval: frequency has dimension " + std::to_string(z.size()) +
                         ", measure lives in dimension " + std::to_string(spec.ambient_dim()));
    return std::visit(
        Overloaded{
            [&](const Atomic& a) { return eval_atomic(a, z); },
            [&](const UniformCube&) { return eval_cube(z); },
            [&](const SphereSurface& s) {
                double r2 = 0.0;
                for (double x : z) r2 += x * x;
                return sphere_transform(s.k, std::sqrt(r2), 0.1 * tol::kSphereAbsErr);
            },
            [&](const SelfSimilar1D& s) { return eval_self_similar(s, z[0]); },
            [&](const Product& p) {
                const auto l = static_cast<std::size_t>(p.left->ambient_dim());
                const FourierValue a = fourier_eval(*p.left, z.subspan(0, l));
                const FourierValue b = fourier_eval(*p.right, z.subspan(l));
                const double err =
                    std::abs(a.value) * b.abs_err + a.abs_err * (std::abs(b.value) + b.abs_err);
                return FourierValue{a.value * b.value, err};
            },
        },
        spec.variant());
}

double total_mass(const MeasureSpec& spec) {
    return std::visit(Overloaded{
                          [](const Atomic& a) {
                              return std::accumulate(a.weights.begin(), a.weights.end(), 0.0);
                          },
                          [](const UniformCube&) { return 1.0; },
                          [](const SphereSurface& s) { return sphere_area(s.k); },
                          [](const SelfSimilar1D&) { return 1.0; },
                          [](const Product& p) { return total_mass(*p.left) * total_mass(*p.right); },
                      },
                      spec.variant());
}

namespace {

std::pair<double, double> self_similar_hull(const SelfSimilar1D& s) {
    const auto [lo, hi] = std::minmax_element(s.translations.begin(), s.translations.end());
    return {*lo / (1.0 - s.ratio), *hi / (1.0 - s.ratio)};
}

}  // namespace

double support_diameter(const MeasureSpec& spec) {
    return std::visit(Overloaded{
                          [](const Atomic& a) {
                              double best = 0.0;
                              for (std::size_t i = 0; i < a.points.size(); ++i)
                                  for (std::size_t j = i + 1; j < a.points.size(); ++j) {
                                      double s = 0.0;
                                      for (std::size_t c = 0; c < a.points[i].size(); ++c) {
                                          const double d = a.points[i][c] - a.points[j][c];
                                          s += d * d;
                                      }
                                      best = std::max(best, s);
                                  }
                              return std::sqrt(best);
                          },
                          [](const UniformCube& c) { return std::sqrt(static_cast<double>(c.d)); },
                          [](const SphereSurface&) { return 2.0; },
                          [](const SelfSimilar1D& s) {
                              const auto [lo, hi] = self_similar_hull(s);
                              return hi - lo;
                          },
                          [](const Product& p) {
                              return std::hypot(support_diameter(*p.left), support_diameter(*p.right));
                          },
                      },
                      spec.variant());
}

double support_extent(const MeasureSpec& spec) {
    return std::visit(Overloaded{
                          [](const Atomic& a) {
                              double best = 0.0;
                              for (const auto& p : a.points) best = std::max(best, norm(p));
                              return best;
                          },
                          [](const UniformCube& c) { return std::sqrt(static_cast<double>(c.d)); },
                          [](const SphereSurface&) { return 1.0; },
                          [](const SelfSimilar1D& s) {
                              const auto [lo, hi] = self_similar_hull(s);
                              return std::max(std::abs(lo), std::abs(hi));
                          },
                          [](const Product& p) {
                              return std::hypot(support_extent(*p.left), support_extent(*p.right));
                          },
                      },
                      spec.variant());
}

// --- sampling -------------------------------------------------------------

namespace {

void draw(const MeasureSpec& spec, std::mt19937_64& rng, Vec& out) {
    std::visit(Overloaded{
                   [&](const Atomic& a) {
                       std::discrete_distribution<std::size_t> pick(a.weights.begin(),
                                                                    a.weights.end());
                       const auto& p = a.points[pick(rng)];
                       out.insert(out.end(), p.begin(), p.end());
                   },
                   [&](const UniformCube& c) {
                       std::uniform_real_distribution<double> u(0.0, 1.0);
                       for (int i = 0; i < c.d; ++i) out.push_back(u(rng));
                   },
                   [&](const SphereSurface& s) {
                       std::normal_distribution<double> g(0.0, 1.0);
                       Vec x(static_cast<std::size_t>(s.k + 1));
                       double r = 0.0;
                       do {
                           r = 0.0;
                           for (double& c : x) {
                               c = g(rng);
                               r += c * c;
                           }
                       } while (r == 0.0);
                       r = std::sqrt(r);
                       for (double c : x) out.push_back(c / r);
                   },
                   [&](const SelfSimilar1D& s) {
                       std::discrete_distribution<std::size_t> pick(s.probabilities.begin(),
                                                                    s.probabilities.end());
                       double x = 0.0;
                       double scale = 1.0;
                       while (scale >= 1e-12) {
                           x += scale * s.translations[pick(rng)];
                           scale *= s.ratio;
                       }
                       out.push_back(x);
                   },
                   [&](const Product& p) {
                       draw(*p.left, rng, out);
                       draw(*p.right, rng, out);
                   },
               },
               spec.variant());
}

}  // namespace

std::vector<Vec> sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("sample: n must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<Vec> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec x;
        x.reserve(static_cast<std::size_t>(spec.ambient_dim()));
        draw(spec, rng, x);
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace fspec
