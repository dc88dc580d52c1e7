#pragma once

#include "fspec/transform.hpp"

#include <iosfwd>
#include <optional>

namespace fspec {

enum class SpectrumFlag { ExactRegime, Clamped, SupDecay };
std::string to_string(SpectrumFlag f);

/// Exponents of the ball averages R^{-d} S(R) over the window of the largest
/// radii. local[j] = theta (d - log2(S_j / S_{j-1})) is the exponent of
/// the dyadic step; raw[j] = theta (d log R_j - log S_j) / log R_j is the
/// plain ratio, whose constant-prefactor bias decays only like 1/log R.
struct StrichartzExponents {
    double F_lower = 0.0;  // min of the local exponents on the window
    double F_upper = 0.0;  // max of the local exponents on the window
    double ols = 0.0;      // theta (d - slope of log S vs log R on the window)
    Vec local;
    Vec raw;
    std::size_t window = 0;
};
StrichartzExponents strichartz_exponents(const ShellStats& stats, double window = 1.0 / 3.0);

struct LatticeSettings {
    double alpha = 0.0;  // 0: default_alpha(spec)
    double r_max = 0.0;  // 0: default_lattice_rmax(spec, alpha)
};
double default_lattice_rmax(const MeasureSpec& spec, double alpha);

struct DimEstimate {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    SpectrumFlag flag = SpectrumFlag::ExactRegime;
    StrichartzExponents strichartz;
    // Bisection record (CLAMPED only): the final bracket and the energies at its ends.
    double bracket_lo = std::numeric_limits<double>::quiet_NaN();
    double bracket_hi = std::numeric_limits<double>::quiet_NaN();
    std::optional<LatticeEnergy> energy_lo, energy_hi;
};

DimEstimate estimate_dim_theta(const MeasureSpec& spec, double theta, const ShellStats& stats,
                               const LatticeSettings& lattice = {});
/// Same with a prebuilt lattice probe (reused across theta values).
DimEstimate estimate_dim_theta(const MeasureSpec& spec, double theta, const ShellStats& stats,
                               const LatticeProbe& probe);

struct FourierDimEstimate {
    double estimate = 0.0;  // -2 x OLS slope of the decreasing sup majorant vs log R on the window
    double lower = 0.0;
    double upper = 0.0;
    double ratio_estimate = 0.0;  // -2 max_j log sup_j / log R_j on the window
    Vec local;                    // two-point exponents on the window
};
FourierDimEstimate estimate_fourier_dim(const ShellStats& stats);

struct Budgets {
    double r_max = 0.0;  // shells; 0: default_shell_rmax(spec)
    std::size_t shell_budget = 4096;
    std::uint64_t seed = 1;
    LatticeSettings lattice;
};
double default_shell_rmax(const MeasureSpec& spec);

struct SpectrumCurve {
    Vec thetas;
    Vec dims;
    Vec lower;
    Vec upper;
    std::vector<SpectrumFlag> flags;
};

SpectrumCurve spectrum_curve(const MeasureSpec& spec, const Vec& thetas, const Budgets& budgets = {});

/// Same, reusing a sampler (the shell statistics do not depend on theta
/// beyond the final power).
SpectrumCurve spectrum_curve(const ShellSampler& sampler, const Vec& thetas,
                             const LatticeSettings& lattice = {});

/// CSV: theta,dim,lower,upper,flag.
void write_spectrum_csv(std::ostream& out, const SpectrumCurve& curve);

}  // namespace fspec
