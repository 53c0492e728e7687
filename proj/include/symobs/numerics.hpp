#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace symobs {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy. Every failure mode named by the library has its own type so
// callers (and the CLI) can branch on it.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define SYMOBS_ERROR(Name)                                   \
    struct Name : Error {                                    \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

SYMOBS_ERROR(DomainViolation);
SYMOBS_ERROR(SingularTimeJacobian);
SYMOBS_ERROR(InconclusiveClassification);
SYMOBS_ERROR(NonPositiveBound);
SYMOBS_ERROR(NoFeasibleSelection);
SYMOBS_ERROR(TuningDiverged);
SYMOBS_ERROR(PastBlowup);
SYMOBS_ERROR(DivergenceDetected);
SYMOBS_ERROR(UnstabilizablePair);
SYMOBS_ERROR(InvalidBounds);
SYMOBS_ERROR(InvalidK);
SYMOBS_ERROR(InvalidExponents);
SYMOBS_ERROR(InvalidGT);
SYMOBS_ERROR(InvalidConfig);

#undef SYMOBS_ERROR

// Central-difference step policy: h = rel * max(1, |arg|).
struct FdPolicy {
    double rel = 1e-6;
    double step(double arg) const { return rel * std::max(1.0, std::abs(arg)); }
};

inline double fd_derivative(const std::function<double(double)>& f, double a,
                            FdPolicy pol = {}) {
    const double h = pol.step(a);
    return (f(a + h) - f(a - h)) / (2.0 * h);
}

// Jacobian of a vector map by central differences, one column per argument.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& a,
                       FdPolicy pol = {}) {
    const Vec f0 = f(a);
    Mat J(f0.size(), a.size());
    Vec ap = a, am = a;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double h = pol.step(a(j));
        ap(j) = a(j) + h;
        am(j) = a(j) - h;
        J.col(j) = (f(ap) - f(am)) / (2.0 * h);
        ap(j) = a(j);
        am(j) = a(j);
    }
    return J;
}

// Derivative of a vector-valued function of a scalar.
inline Vec fd_vec_derivative(const std::function<Vec(double)>& f, double a,
                             FdPolicy pol = {}) {
    const double h = pol.step(a);
    return (f(a + h) - f(a - h)) / (2.0 * h);
}

inline double spectral_norm(const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

// sgn(s)|s|^k
inline double signed_pow(double s, double k) {
    if (s == 0.0) return 0.0;
    return std::copysign(std::pow(std::abs(s), k), s);
}

inline Vec stack(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

// Relative error with a unit floor on the denominator.
inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

inline double rel_err(const Mat& a, const Mat& b) {
    if (a.size() == 0) return 0.0;
    return (a - b).norm() / std::max(1.0, std::max(a.norm(), b.norm()));
}

}  // namespace symobs
