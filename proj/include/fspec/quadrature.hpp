#pragma once

#include <array>
#include <functional>
#include <span>

namespace fspec::quad {

// 7-point Gauss / 15-point Kronrod pair on [-1, 1]. Node i of the Kronrod
// rule sits at kNodes[i] (0 = centre, then increasing), mirrored for i > 0.
struct GaussKronrod15 {
    static const std::array<double, 8> kNodes;
    static const std::array<double, 8> kKronrodWeights;
    static const std::array<double, 4> kGaussWeights;  // on nodes 0, 2, 4, 6

    // The 15 abscissae mapped onto [a, b], in the order used by combine().
    static std::array<double, 15> abscissae(double a, double b);

    struct Estimate {
        double kronrod;
        double gauss;
        double error() const { return std::abs(kronrod - gauss); }
    };

    // Combines function values sampled at abscissae(a, b).
    static Estimate combine(double a, double b, std::span<const double, 15> values);
};

struct Result {
    double value = 0.0;
    double abs_err = 0.0;
    bool converged = true;
};

// Adaptive bisection on GK15 panels until the summed |K - G| is below
// abs_tol or max_depth is reached.
Result adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                int max_depth = 30);

// Gauss-Legendre rule with 20 nodes on [-1, 1].
struct GaussLegendre20 {
    static const std::array<double, 20> kNodes;
    static const std::array<double, 20> kWeights;
};

}  // namespace fspec::quad
