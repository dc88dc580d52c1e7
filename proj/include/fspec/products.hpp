#pragma once

#include "fspec/setdim.hpp"
#include "fspec/spectrum.hpp"

#include <iosfwd>

namespace fspec {

enum class Verdict { Consistent, ViolationCandidate, Informative, Inconclusive, NotSalem };
std::string to_string(Verdict v);

/// A point estimate with its band.
struct Banded {
    double value = 0.0;
    double lo = 0.0;
    double hi = 0.0;
};

struct BoundRecord {
    double theta = 0.0;
    Banded lhs;                 // product estimate
    Banded mu, nu;              // marginal spectra
    Banded fbar_mu, fbar_nu;    // upper Strichartz exponents (NaN at theta = 0)
    Banded lower;               // three-term minimum
    Banded upper_min;           // two-term minimum
    Banded upper_max;           // max-form bound with Strichartz exponents (NaN at theta = 0)
    Verdict verdict = Verdict::Consistent;        // lower and upper checks combined
    Verdict upper_verdict = Verdict::Consistent;  // Informative for set products
};

struct BoundReport {
    int k = 1;  // ambient dimension of the first factor
    int d = 2;  // ambient dimension of the product
    std::vector<BoundRecord> records;
    std::size_t violations() const;
};

MeasureSpec product_spec(const MeasureSpec& mu, const MeasureSpec& nu);

/// Bound formulas (exact arithmetic on given inputs).
double product_lower_formula(int k, int m, double theta, double dmu, double dnu);
double product_upper_min_formula(int k, int m, double theta, double dmu, double dnu);
double product_upper_max_formula(double fbar_mu, double fbar_nu, double dmu, double dnu);

BoundReport check_product_bounds(const MeasureSpec& mu, const MeasureSpec& nu, const Vec& thetas,
                                 const Budgets& budgets = {});

struct PowerPrediction {
    MeasureSpec spec;
    std::optional<double> prediction;  // (n-1) d theta + dim; omitted when d theta > dim
};
/// n-fold product mu x ... x mu with the predicted spectrum at theta, given
/// an estimate of dim_F^theta mu.
PowerPrediction power_spec(const MeasureSpec& mu, int n, double theta, double mu_dim_estimate);

/// Candidate measures on a cloud: uniform weights and Frostman minimisers.
struct CandidateFamily {
    std::vector<MeasureSpec> measures;
    std::vector<std::string> labels;
};
CandidateFamily default_candidates(const PointCloud& cloud, const Vec& s_grid = {});

/// Cartesian product cloud, subsampled without replacement to at most cap points.
PointCloud cartesian_product(const PointCloud& x, const PointCloud& y, std::size_t cap = std::size_t{1} << 20,
                             std::uint64_t seed = 1);

/// Set-level bounds. Extended spectra are LOWER-BOUND APPROXIMATIONS (best
/// candidate); only the lower bound is decidable, the upper direction is
/// reported as Informative.
struct SetBoundReport {
    BoundReport report;
    std::size_t product_cloud_size = 0;
    std::size_t candidates_x = 0, candidates_y = 0;
    double r_max = 0.0;  // shell radius limited by the cloud resolution
};
SetBoundReport check_set_product_bounds(const PointCloud& x, const CandidateFamily& fx, const PointCloud& y,
                                        const CandidateFamily& fy, const Vec& thetas, const Budgets& budgets = {});

/// Finest radius at which an atomic measure on the cloud still resembles
/// its continuum limit: largest 2^j <= 1/(4 delta_min), clamped to [2^7, 2^10].
double cloud_resolution_rmax(const PointCloud& cloud);

struct SalemReport {
    Banded fourier_dim;        // of the product (best candidate pair)
    double hausdorff_proxy_x = 0.0;
    double hausdorff_proxy_y = 0.0;
    double hausdorff_proxy = 0.0;  // sum of the factor proxies
    Verdict verdict = Verdict::Inconclusive;
};
/// Hausdorff proxy of a cloud: growth of the minimal s-energy from the
/// every-other-point subcloud to the full cloud at s = 0.95 d, converted to
/// a dimension through n ~ delta^{-D}.
double hausdorff_proxy(const PointCloud& cloud);
SalemReport salem_product_check(const PointCloud& x, const PointCloud& y, const Budgets& budgets = {});

/// Predicted curves of the worked examples: Lebesgue measure on [0,1]^d,
/// and sphere-times-cube measures sigma^k x L^n.
double lebesgue_prediction(int d, double theta);
double cylinder_prediction(int k, int n, double theta);
/// theta at which the two branches of the cylinder prediction cross, when
/// that happens inside (0, 1).
std::optional<double> cylinder_kink(int k);

/// BoundReport CSV (theta, lhs, lower_formula, upper_formula_thm21,
/// upper_formula_thm22, verdict).
void write_bound_report_csv(std::ostream& out, const BoundReport& r);

}  // namespace fspec
