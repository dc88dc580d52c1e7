#pragma once

// Cumulative ball integrals G(t) = \int_{|z|<=t} |mu^(z)|^p dz on a shared
// radius grid, for measures built from one-dimensional factors and sphere
// surface measures. Lower-dimensional profiles are computed by adaptive
// quadrature and combined across products by Stieltjes composition, which
// avoids sampling noise in two and three dimensions.

#include "fspec/common.hpp"
#include "fspec/kernels.hpp"

#include <memory>

namespace fspec {

class MeasureSpec;

/// t_0 = 0, uniform steps of 1/linear up to 1, then per_octave geometric
/// steps per doubling up to 2^octaves. Every power of two 2^j is a node.
class RadialGrid {
public:
    explicit RadialGrid(int octaves, int per_octave = 256, int linear = 64);
    /// Default-resolution grid kept alive for the whole process, so that
    /// expensive leaf profiles can be shared between samplers.
    static std::shared_ptr<const RadialGrid> shared(int octaves);

    const Vec& t() const { return t_; }
    std::size_t size() const { return t_.size(); }
    int octaves() const { return octaves_; }
    /// Largest i with t[i] <= x (clamped to the grid).
    std::size_t floor_index(double x) const;
    /// Index of the node 2^j for 0 <= j <= octaves.
    std::size_t dyadic_index(int j) const;
    /// Cell i is (t[i-1], t[i]]; cell 0 is the origin. Smallest cell containing x.
    std::size_t cell_of(double x) const;

private:
    int octaves_, per_octave_, linear_;
    Vec t_;
};

struct ProfileValues {
    Vec G;    // G[i] = integral over |z| <= t[i]
    Vec err;  // bound-style error estimate per node
};

class RadialProfile {
public:
    virtual ~RadialProfile() = default;

    /// nullptr when spec has a factor that is neither one-dimensional nor a sphere.
    static std::unique_ptr<RadialProfile> build(const MeasureSpec& spec, const RadialGrid& grid,
                                                kernels::Exec exec = kernels::Exec::Parallel);

    int dim() const { return dim_; }
    const RadialGrid& grid() const { return *grid_; }
    /// Upper envelope of |mu^| on each cell (cell 0 is |mu^(0)|).
    const Vec& cell_sup() const { return sup_; }
    /// Number of transform evaluations spent so far.
    virtual std::size_t evaluations() const = 0;

    virtual ProfileValues ball_integrals(double p) const = 0;

protected:
    RadialProfile(const RadialGrid& g, int dim) : grid_(&g), dim_(dim) {}
    const RadialGrid* grid_;
    int dim_;
    Vec sup_;
};

}  // namespace fspec
