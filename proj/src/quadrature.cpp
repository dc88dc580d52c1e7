#include "fspec/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <vector>

namespace fspec::quad {

const std::array<double, 8> GaussKronrod15::kNodes = {
    0.000000000000000000000000000000000,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144845693013,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
};

const std::array<double, 8> GaussKronrod15::kKronrodWeights = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
};

const std::array<double, 4> GaussKronrod15::kGaussWeights = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
};

std::array<double, 15> GaussKronrod15::abscissae(double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    std::array<double, 15> x{};
    x[0] = c;
    for (int i = 1; i < 8; ++i) {
        x[2 * i - 1] = c - h * kNodes[i];
        x[2 * i] = c + h * kNodes[i];
    }
    return x;
}

GaussKronrod15::Estimate GaussKronrod15::combine(double a, double b,
                                                 std::span<const double, 15> v) {
    const double h = 0.5 * (b - a);
    double k = kKronrodWeights[0] * v[0];
    double g = kGaussWeights[0] * v[0];
    for (int i = 1; i < 8; ++i) {
        const double pair = v[2 * i - 1] + v[2 * i];
        k += kKronrodWeights[i] * pair;
        if (i % 2 == 0) g += kGaussWeights[i / 2] * pair;
    }
    return {k * h, g * h};
}

namespace {

void adaptive_rec(const std::function<double(double)>& f, double a, double b, double tol,
                  int depth, Result& out) {
    const auto x = GaussKronrod15::abscissae(a, b);
    std::array<double, 15> v{};
    for (int i = 0; i < 15; ++i) v[i] = f(x[i]);
    const auto est = GaussKronrod15::combine(a, b, v);
    if (est.error() <= tol || depth <= 0) {
        out.value += est.kronrod;
        out.abs_err += est.error();
        if (est.error() > tol) out.converged = false;
        return;
    }
    const double m = 0.5 * (a + b);
    adaptive_rec(f, a, m, 0.5 * tol, depth - 1, out);
    adaptive_rec(f, m, b, 0.5 * tol, depth - 1, out);
}

}  // namespace

Result adaptive(const std::function<double(double)>& f, double a, double b, double abs_tol,
                int max_depth) {
    Result r;
    if (b <= a) return r;
    adaptive_rec(f, a, b, abs_tol, max_depth, r);
    return r;
}

namespace {

struct GL20Table {
    std::array<double, 20> nodes{};
    std::array<double, 20> weights{};
    GL20Table() {
        using Rule = boost::math::quadrature::gauss<double, 20>;
        const auto& abs = Rule::abscissa();
        const auto& w = Rule::weights();
        // boost stores the non-negative half; 20 is even so there is no centre node.
        for (std::size_t i = 0; i < abs.size(); ++i) {
            nodes[2 * i] = -abs[i];
            nodes[2 * i + 1] = abs[i];
            weights[2 * i] = w[i];
            weights[2 * i + 1] = w[i];
        }
    }
};

const GL20Table& gl20() {
    static const GL20Table t;
    return t;
}

}  // namespace

const std::array<double, 20> GaussLegendre20::kNodes = gl20().nodes;
const std::array<double, 20> GaussLegendre20::kWeights = gl20().weights;

}  // namespace fspec::quad
