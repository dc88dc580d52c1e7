#pragma once

#include <cstddef>

// Repo-wide tolerance constants. Every estimator, report and acceptance
// check reads its thresholds from here.
namespace fspec::tol {

// F_lower must sit this far below d*theta before the shell estimate is
// trusted as the spectrum value (otherwise the lattice probe takes over).
inline constexpr double kRegimeMargin = 0.1;

// Slack allowed above d*theta for any exact-regime estimate.
inline constexpr double kCeilingSlack = 0.05;

// Half-width floor of every estimate band; estimators are not resolved
// below this.
inline constexpr double kMinBandHalfWidth = 0.1;

// Relative standard error above which a shell is flagged.
inline constexpr double kShellRelStderr = 0.05;

// Certified absolute error targets for transforms.
inline constexpr double kSelfSimilarRelErr = 1e-10;
inline constexpr double kSphereAbsErr = 1e-8;

// Lattice enumeration refuses beyond this many points.
inline constexpr double kLatticeMaxPoints = 1e8;

// Bisection over s stops once the bracket is this narrow.
inline constexpr double kBisectionWidth = 0.02;

// Capacity / energy solver iteration cap.
inline constexpr long kSolverMaxIterations = 1'000'000;

// Above this many points the capacity kernel is evaluated on demand.
inline constexpr std::size_t kDenseKernelMaxPoints = 1u << 12;

}  // namespace fspec::tol
