#pragma once

#include "fspec/common.hpp"

#include <memory>
#include <span>
#include <string>
#include <variant>

namespace fspec {

class MeasureSpec;

/// Finitely many weighted atoms in R^d.
struct Atomic {
    std::vector<Vec> points;
    Vec weights;
};

/// Lebesgue measure restricted to [0,1]^d.
struct UniformCube {
    int d = 1;
};

/// Surface measure on the unit sphere S^k in R^{k+1} (unnormalised).
struct SphereSurface {
    int k = 1;
};

/// Self-similar measure on [0,1] generated by x -> ratio * x + t_j with
/// probabilities p_j. The first-level intervals [t_j, t_j + ratio] must be
/// disjoint up to endpoints and lie inside [0,1].
struct SelfSimilar1D {
    double ratio = 0.5;
    Vec translations;
    Vec probabilities;
};

struct Product {
    std::shared_ptr<const MeasureSpec> left;
    std::shared_ptr<const MeasureSpec> right;
};

/// Immutable, validated description of a finite Borel measure with an
/// evaluable Fourier transform. Copies share sub-trees.
class MeasureSpec {
public:
    using Variant = std::variant<Atomic, UniformCube, SphereSurface, SelfSimilar1D, Product>;

    static MeasureSpec atomic(std::vector<Vec> points, Vec weights);
    static MeasureSpec dirac(int d = 1);
    static MeasureSpec uniform_cube(int d);
    static MeasureSpec sphere(int k);
    static MeasureSpec self_similar(double ratio, Vec translations, Vec probabilities);
    static MeasureSpec product(const MeasureSpec& left, const MeasureSpec& right);
    /// Middle-third Cantor measure: ratio 1/3, maps at 0 and 2/3, equal weights.
    static MeasureSpec cantor();

    const Variant& variant() const { return v_; }
    int ambient_dim() const { return dim_; }
    std::string name() const;

    template <class T>
    const T* as() const {
        return std::get_if<T>(&v_);
    }

private:
    explicit MeasureSpec(Variant v);
    Variant v_;
    int dim_ = 1;
};

/// Transform value together with a guaranteed bound |value - mu^(z)| <= abs_err.
struct FourierValue {
    Complex value;
    double abs_err = 0.0;
};

/// mu^(z) = \int exp(-2 pi i z.x) dmu(x).
FourierValue fourier_eval(const MeasureSpec& spec, std::span<const double> z);

double total_mass(const MeasureSpec& spec);

/// Diameter of the support (0 for a single atom).
double support_diameter(const MeasureSpec& spec);

/// Largest |x| over the support.
double support_extent(const MeasureSpec& spec);

/// n i.i.d. draws from the normalised measure; deterministic in seed.
std::vector<Vec> sample(const MeasureSpec& spec, std::size_t n, std::uint64_t seed);

/// Radial transform of the sphere surface measure sigma^k at |z| = rho, by
/// composite Gauss-Legendre quadrature with an analytic (Bernstein ellipse)
/// error bound. Throws QuadratureError if the bound cannot be met.
FourierValue sphere_transform(int k, double rho, double abs_tol);

/// Surface area of S^k.
double sphere_area(int k);

/// JSON round trip for measure specification files.
std::string to_json(const MeasureSpec& spec, int indent = 2);
MeasureSpec measure_from_json(const std::string& text);
MeasureSpec load_measure(const std::string& path);

}  // namespace fspec
