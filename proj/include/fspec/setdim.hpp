#pragma once

#include "fspec/kernels.hpp"
#include "fspec/measures.hpp"

#include <iosfwd>
#include <optional>

namespace fspec {

class PointCloud {
public:
    explicit PointCloud(std::vector<Vec> points);
    /// For clouds whose diameter is known in closed form (Cartesian products).
    PointCloud(std::vector<Vec> points, double diameter);

    const std::vector<Vec>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    int dim() const { return d_; }
    double diameter() const { return diameter_; }
    const Vec& operator[](std::size_t i) const { return points_[i]; }

private:
    void validate();
    std::vector<Vec> points_;
    int d_;
    double diameter_;
};

/// One point per row, d comma-separated decimal columns, no header.
PointCloud read_cloud_csv(std::istream& in, const std::string& source = "<stream>");
PointCloud load_cloud(const std::string& path);

/// Regular test clouds.
PointCloud uniform_grid_cloud(int d, std::size_t per_axis);
/// Left endpoints of the 2^level intervals of the middle-third construction.
PointCloud cantor_cloud(int level);

struct SolverOptions {
    double tol = 1e-8;              // conditional-gradient gap
    bool relative = false;          // gap measured against the objective value
    long max_iterations = 1000000;  // tol::kSolverMaxIterations
    bool multistart = false;        // also start from every vertex (small clouds)
    kernels::Exec exec = kernels::Exec::Parallel;
};

/// min over the simplex of w^T K w for a symmetric kernel.
struct SimplexSolution {
    Vec weights;
    double objective = 0.0;
    double gap = 0.0;
    long iterations = 0;
    bool converged = false;
};

struct CapacityResult {
    double r = 0.0;
    double s = 0.0;
    double value = 1.0;  // C_r^s
    Vec minimizer;
    double duality_gap = 0.0;
    long iterations = 0;
    bool converged = true;
};

/// C_r^s via K_ij = min{1, (r/|x_i - x_j|)^s}, K_ii = 1.
CapacityResult capacity(const PointCloud& cloud, double r, double s, double tol = 1e-8);
CapacityResult capacity(const PointCloud& cloud, double r, double s, const SolverOptions& opt);

struct ProfileDims {
    double upper = 0.0;
    double lower = 0.0;
    Vec scales;      // sorted decreasing
    Vec values;      // capacity or count at each scale
    Vec slopes;      // two-point slopes on the smallest-scale third
};

/// Scaling of C_r^s against 1/r. rel_tol is relative to the objective.
ProfileDims box_profile_dims(const PointCloud& cloud, double s, Vec r_list, double rel_tol = 1e-6);

struct BoxDimFourier {
    double upper = 0.0;
    double lower = 0.0;
    Vec s_values;
    std::vector<ProfileDims> profiles;
    Vec upper_increments;  // trend between consecutive s values
};
/// s_m = d - 2^{-m}, m = 1..5 by default.
Vec default_s_sequence(int d);
BoxDimFourier box_dim_fourier(const PointCloud& cloud, Vec s_sequence, Vec r_list, double rel_tol = 1e-6);

/// Occupied cells of the axis-aligned grid of mesh r (anchored at the
/// coordinate-wise minimum).
ProfileDims box_counting(const PointCloud& cloud, Vec r_list);

/// Discrete s-energy minimisation. Off-diagonal entries |x_i - x_j|^{-s};
/// each point also carries the self-energy (delta_i / 2)^{-s} of its own
/// cell, with delta_i the nearest-neighbour distance, so that refining a
/// cloud approximates the continuous energy.
struct EnergyResult {
    double s = 0.0;
    double min_energy = 0.0;
    Vec minimizer;
    double duality_gap = 0.0;
    long iterations = 0;
    bool converged = true;
};
EnergyResult frostman_energy(const PointCloud& cloud, double s, double tol = 1e-8);
EnergyResult frostman_energy(const PointCloud& cloud, double s, const SolverOptions& opt);

struct BridgeResult {
    double kernel_side = 0.0;
    double fourier_side = 0.0;
    double ratio = 0.0;
};
/// Compares \iint min{1,(r/|x-y|)^s} dmu dmu (double sampling) with
/// R^{-d} \int_{|z|<=R} |mu^|^2 at R = 1/r. r must be 2^{-j}.
BridgeResult kernel_fourier_bridge(const MeasureSpec& spec, double r, double s, std::uint64_t seed = 1,
                                   std::size_t samples = 2048);

/// Generic simplex QP (exposed for the oracle tests and the benchmark).
SimplexSolution minimize_on_simplex(std::size_t n, const kernels::KernelEntry& entry,
                                    const SolverOptions& opt);

/// Capacity report CSV (r, s, capacity, gap, iterations).
void write_capacity_csv(std::ostream& out, const std::vector<CapacityResult>& rows);

}  // namespace fspec
