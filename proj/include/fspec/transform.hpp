#pragma once

#include "fspec/kernels.hpp"
#include "fspec/measures.hpp"
#include "fspec/radial_profile.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace fspec {

/// Dyadic shell statistics of |mu^|^{2/theta}: S(R_j) is the integral over
/// the ball of radius R_j = 2^j, shell_sups[j] the sup over R_{j-1} < |z| <= R_j
/// (over |z| <= 1 for j = 0).
struct ShellStats {
    double theta = 1.0;
    int dim = 1;
    Vec radii;
    Vec S;
    Vec S_stderr;
    Vec shell_sups;
    std::vector<bool> flagged;  // relative standard error above tolerance
    std::string method;         // "quadrature" or "monte-carlo"
};

/// Precomputes every theta-independent piece (transform magnitudes at the
/// quadrature nodes or sample points, probe sups) so that stats() for many
/// theta values costs only the power and the sums.
class ShellSampler {
public:
    ShellSampler(const MeasureSpec& spec, double r_max, std::size_t budget, std::uint64_t seed,
                 kernels::Exec exec = kernels::Exec::Parallel);

    ShellStats stats(double theta) const;

    const MeasureSpec& spec() const { return spec_; }
    const Vec& radii() const { return radii_; }
    const Vec& shell_sups() const { return sups_; }
    bool uses_quadrature() const { return profile_ != nullptr; }
    std::size_t evaluations() const;

private:
    void sample_shells(std::size_t budget, std::uint64_t seed);
    void probe_sups();

    MeasureSpec spec_;
    int dim_;
    kernels::Exec exec_;
    Vec radii_;
    Vec sups_;
    double max_abs_err_ = 0.0;
    std::shared_ptr<const RadialGrid> grid_;
    std::unique_ptr<RadialProfile> profile_;
    // Monte-Carlo path: magnitudes per (shell, stratum), stratum volumes.
    static constexpr int kStrata = 16;
    std::vector<std::vector<Vec>> mc_mags_;
    std::vector<double> mc_stratum_volume_;
    std::size_t mc_evals_ = 0;
};

ShellStats shell_stats(const MeasureSpec& spec, double theta, double r_max, std::size_t budget,
                       std::uint64_t seed);

/// Projection (R_j, shell_sup_j).
std::vector<std::pair<double, double>> sup_decay(const ShellStats& stats);

/// Volume of the Euclidean ball of radius r in R^d.
double ball_volume(int d, double r);

/// Partial sums |mu^(0)|^{2/theta} + sum over alpha Z^d, 0 < |z| <= R_j of
/// |mu^(z)|^{2/theta} |z|^{s/theta - d}.
struct LatticeEnergy {
    double s = 0.0;
    double theta = 1.0;
    double alpha = 0.5;
    Vec radii;
    Vec partial_sums;
    Vec increments;  // increments[j] = partial_sums[j] - partial_sums[j-1], summed directly (increments[0] = 0)

    /// OLS slope of log(partial sum) against log R over the last third.
    double tail_slope() const;
    /// OLS slope of log(increment_j) against log R_j over the last third of
    /// the dyadic increments; for sums whose increments behave like R^q this
    /// recovers q, and the sum converges iff q < 0.
    double increment_slope() const;
    bool converges() const { return increment_slope() < 0.0; }
};

/// Largest admissible lattice spacing factor used by default (times 1/diam).
inline constexpr double kDefaultAlphaFactor = 0.9;
double default_alpha(const MeasureSpec& spec);

/// Number of lattice points in the closed ball of radius R/alpha in Z^d.
double lattice_point_count(int d, double alpha, double r_max);

/// Enumerates lattice transform magnitudes once and reuses them for every
/// (s, theta). The points are binned by |m|^2 (|m| in one dimension), so a
/// new s costs one pass over the distinct radii.
class LatticeProbe {
public:
    LatticeProbe(const MeasureSpec& spec, double alpha, double r_max,
                 kernels::Exec exec = kernels::Exec::Parallel);

    LatticeEnergy energy(double s, double theta) const;
    double alpha() const { return alpha_; }
    double r_max() const { return r_max_; }

    struct Table {
        Vec radius;  // increasing distinct |z|
        Vec weight;  // sum of |mu^(z)|^{2/theta} over that radius
        double origin = 0.0;
    };
    const Table& table(double theta) const;

private:
    Table build_table(double theta) const;

    MeasureSpec spec_;
    int dim_;
    double alpha_, r_max_;
    long m_max_;
    kernels::Exec exec_;
    // Factorisation into blocks with magnitude tables indexed by the
    // block's own lattice coordinates.
    struct Block {
        int offset, dim;
        std::shared_ptr<const MeasureSpec> spec;
        Vec log_mag;  // over [-m_max, m_max]^dim, or by |m|^2 for spheres
        bool radial = false;
    };
    std::vector<Block> blocks_;
    bool direct_ = false;
    mutable std::mutex mu_;
    mutable std::map<double, Table> tables_;
};

LatticeEnergy lattice_energy(const MeasureSpec& spec, double s, double theta, double alpha,
                             double r_max);

// CSV: theta,R,S,S_stderr,shell_sup and s,theta,alpha,R,partial_sum.
void write_shell_stats_csv(std::ostream& out, const ShellStats& stats);
void write_lattice_energy_csv(std::ostream& out, const LatticeEnergy& e);

}  // namespace fspec
