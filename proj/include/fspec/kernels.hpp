#pragma once

// Data-parallel inner loops. Every kernel has a serial reference and an
// OpenMP version selected by Exec; both produce bit-identical results
// (reductions are merged in a fixed order, independent of thread count).

#include "fspec/common.hpp"

#include <functional>
#include <span>

namespace fspec {
class MeasureSpec;
}

namespace fspec::kernels {

enum class Exec { Serial, Parallel };

/// out[i] = |mu^(z_i)| for the rows z_i of a flat (n x dim) array. Also
/// returns the largest certified abs_err seen.
double transform_magnitudes(const MeasureSpec& spec, std::span<const double> points, int dim,
                            std::span<double> out, Exec exec = Exec::Parallel);

/// Ball integral of a product from the ball integrals of its factors on a
/// shared radius grid t (t[0] = 0):
///   G_C(T) = \int_{|x|<=T} f_A(x) G_B(sqrt(T^2 - |x|^2)) dx
/// as a Riemann-Stieltjes sum over the cells of G_A. lower/upper bracket the
/// sum using monotonicity of G_B; central uses cell midpoints.
struct Composition {
    Vec central;
    Vec lower;
    Vec upper;
};
Composition compose_ball_integrals(std::span<const double> t, std::span<const double> ga,
                                   std::span<const double> gb,
                                   const std::function<std::size_t(double)>& floor_index,
                                   Exec exec = Exec::Parallel);

/// Enumerates the integer vectors m with 0 < |m|^2 <= m2_max in dimension
/// dim (1..3), keeping one representative of each +-m pair, and
/// accumulates 2 * weight(m) into sums[key(m)], where key is |m| in one
/// dimension and |m|^2 otherwise. weight receives the coordinates.
using LatticeWeight = std::function<double(std::span<const long>)>;
void lattice_accumulate(int dim, long m_max, const LatticeWeight& weight, std::span<double> sums,
                        Exec exec = Exec::Parallel);

/// y = K w for the symmetric kernel K_ij = entry(i, j).
using KernelEntry = std::function<double(std::size_t, std::size_t)>;
void kernel_matvec(std::size_t n, const KernelEntry& entry, std::span<const double> w,
                   std::span<double> y, Exec exec = Exec::Parallel);

/// Column j of the kernel.
void kernel_column(std::size_t n, const KernelEntry& entry, std::size_t j, std::span<double> out,
                   Exec exec = Exec::Parallel);

}  // namespace fspec::kernels
