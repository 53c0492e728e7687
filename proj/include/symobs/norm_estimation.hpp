#pragma once

#include "symobs/system_maps.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace symobs {

using ScalarFn = std::function<double(double)>;

// Dissipation data for a state-input norm estimator:
//   D_t V <= -alpha(V) + phi(|(y, d)|),  |x| <= beta1(V) + beta0,
//   phi(|(y, d)|) <= eta(|(x, d)|).
struct SineData {
    std::function<double(double t, const Vec& x)> v;
    ScalarFn alpha, phi, beta1, eta;
    double beta0 = 0.0;
};

struct LambdaSelection {
    double omega1 = 1.0;
    double lambda1 = 0.5;
    double lambda0 = 0.0;
};

// Smallest value over the grid of alpha(s + omega1) - lambda1 alpha(s).
inline double lambda_margin(const ScalarFn& alpha, double omega1, double lambda1, double s_max,
                            int grid_n = 10000) {
    double worst = kInf;
    for (int i = 0; i < grid_n; ++i) {
        const double s = s_max * i / (grid_n - 1);
        worst = std::min(worst, alpha(s + omega1) - lambda1 * alpha(s));
    }
    return worst;
}

// Tries lambda1 = 0.9, 0.8, ..., 0.1 and keeps the first one with a positive
// grid margin; lambda0 is half that margin. Margins at or below min_margin
// count as infeasible.
inline LambdaSelection select_lambda(const ScalarFn& alpha, double omega1, double s_max = 100.0,
                                     int grid_n = 10000, double min_margin = 1e-8) {
    if (!(omega1 > 0.0)) throw InvalidConfig("omega1 must be positive");
    for (int k = 9; k >= 1; --k) {
        const double l1 = k / 10.0;
        const double margin = lambda_margin(alpha, omega1, l1, s_max, grid_n);
        if (margin > min_margin) {
            LambdaSelection sel{omega1, l1, 0.5 * margin};
            if (sel.lambda0 < alpha(omega1)) return sel;
        }
    }
    throw NoFeasibleSelection("no lambda1 in {0.9, ..., 0.1} leaves a positive margin");
}

inline double sine_filter_rhs(const LambdaSelection& sel, const SineData& data, double vhat,
                              double y_norm, double n_bound) {
    return std::max(-sel.lambda1 * data.alpha(vhat) + data.phi(y_norm + n_bound), 0.0);
}

// Time after which V(t, x(t)) <= vhat(t) + omega1 is guaranteed.
inline double settle_time(const LambdaSelection& sel, double v0) {
    return (v0 + sel.omega1) / sel.lambda0;
}

struct PSchedule {
    ScalarFn sigma;
    double omega0 = 0.0;
    double n_bound = 1.0;
    ScalarFn beta1;
    double omega1 = 1.0;
    double vhat0 = 0.0;
};

inline double p_of_t(const PSchedule& s, double vhat) {
    return s.sigma(s.omega0 + s.n_bound + s.beta1(vhat + s.omega1));
}

inline double dp_dvhat(const PSchedule& s, double vhat) {
    return fd_derivative([&](double v) { return p_of_t(s, v); }, vhat);
}

// Solves X M + M^T X = -R for symmetric X (M Hurwitz).
inline Mat solve_lyapunov(const Mat& M, const Mat& R) {
    const Eigen::Index n = M.rows();
    const Mat I = Mat::Identity(n, n);
    const Mat sys = Eigen::kroneckerProduct(I, M.transpose()).eval() +
                    Eigen::kroneckerProduct(M.transpose(), I).eval();
    const Vec rhs = -Eigen::Map<const Vec>(R.data(), R.size());
    const Vec sol = sys.fullPivLu().solve(rhs);
    Mat X = Eigen::Map<const Mat>(sol.data(), n, n);
    return 0.5 * (X + X.transpose());
}

// Closed forms for lower-triangular systems with V = ln(1 + x'Qx).
// The state bound uses |x|^2 <= (e^V - 1)/q_min.
inline SineData build_sine_for_triangular(const Mat& q, double ell1, double ell2, const ScalarFn& tau) {
    if (!(ell1 > 0.0) || !(ell2 > 0.0)) throw InvalidBounds("ell1 and ell2 must be positive");
    Eigen::SelfAdjointEigenSolver<Mat> es(q);
    const double q_min = es.eigenvalues().minCoeff();
    if (!(q_min > 0.0)) throw InvalidBounds("Q must be positive definite");
    SineData s;
    s.v = [q](double, const Vec& x) { return std::log1p(x.dot(q * x)); };
    s.alpha = [ell1](double v) { return ell1 * v / (1.0 + v); };
    s.phi = [ell2, tau](double v) { return ell2 * (1.0 + tau(v)) * (1.0 + v * v); };
    s.beta1 = [q_min](double v) { return std::sqrt(std::expm1(v) / q_min); };
    const double tau0 = tau(0.0);
    s.eta = [ell2, tau, tau0](double v) {
        return ell2 * (1.0 + tau0) * ((1.0 + tau(v)) * (1.0 + v * v) - tau0);
    };
    s.beta0 = 0.0;
    return s;
}

// Fits the dissipation constant ell2 of
//   D_t W <= -ell1 W + ell2 * shape(|y|) * (W + |d|^2 + |y|^2)
// by maximizing the required ratio over random samples, padded by 10%.
inline double fit_dissipation_gain(const std::function<double(const Vec&)>& w, const SystemMap& sys,
                                   double ell1, const ScalarFn& shape, const SampleBox& box,
                                   int n_samples, unsigned seed = 11) {
    BoxSampler s(seed);
    double worst = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const Vec x = s.uniform(box.x_lo, box.x_hi);
        const Vec d = s.uniform(box.d_lo, box.d_hi);
        const Vec y = sys.h(0.0, x, d);
        const Mat grad = fd_jacobian([&](const Vec& z) { return Vec::Constant(1, w(z)); }, x);
        const double dw = (grad * sys.f(0.0, x, d))(0);
        const double wx = w(x);
        const double need = dw + ell1 * wx;
        if (need <= 0.0) continue;
        worst = std::max(worst, need / (shape(y.norm()) * (wx + d.squaredNorm() + y.squaredNorm())));
    }
    return 1.1 * worst;
}

}  // namespace symobs
