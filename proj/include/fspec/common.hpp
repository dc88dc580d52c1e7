#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace fspec {

using Vec = std::vector<double>;
using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Malformed input: bad specs, bad files, violated preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A request whose cost exceeds the configured evaluation budget.
class BudgetError : public std::runtime_error {
public:
    BudgetError(const std::string& what, double required)
        : std::runtime_error(what), required_(required) {}
    double required() const { return required_; }

private:
    double required_;
};

// Numerical integration that could not certify its tolerance.
class QuadratureError : public std::runtime_error {
public:
    QuadratureError(const std::string& what, double achieved)
        : std::runtime_error(what), achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

inline double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace fspec
