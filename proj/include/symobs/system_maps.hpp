#pragma once

#include "symobs/contraction.hpp"

namespace symobs {

using VecField = std::function<Vec(double t, const Vec& x, const Vec& d)>;
using MatOfTime = std::function<Mat(double t)>;

// The pair (F, H) defining the residual Sigma = (x1 - F; y - H), with its
// linearization at (x, d) = 0 and the remainder of that linearization.
//
// Linearization matrices and delta_l may be left empty; they are then derived
// by central differences at the origin. f1 is set for systems written in the
// split form F = F0(t, x, d) + F1(t, x_1) with H = x_1, used by the partial
// observer.
struct SystemMap {
    std::string name;
    int n = 0, m = 0, p = 0;
    VecField f, h;
    MatOfTime a, b, c, dmat;
    VecField delta_l;
    std::function<double(double)> xi;
    std::function<Vec(double t, const Vec& x1)> f1;
    FdPolicy fd;
};

inline Mat lin_a(const SystemMap& s, double t) {
    if (s.a) return s.a(t);
    return fd_jacobian([&](const Vec& x) { return s.f(t, x, Vec::Zero(s.m)); }, Vec::Zero(s.n), s.fd);
}
inline Mat lin_b(const SystemMap& s, double t) {
    if (s.b) return s.b(t);
    return fd_jacobian([&](const Vec& d) { return s.f(t, Vec::Zero(s.n), d); }, Vec::Zero(s.m), s.fd);
}
inline Mat lin_c(const SystemMap& s, double t) {
    if (s.c) return s.c(t);
    return fd_jacobian([&](const Vec& x) { return s.h(t, x, Vec::Zero(s.m)); }, Vec::Zero(s.n), s.fd);
}
inline Mat lin_d(const SystemMap& s, double t) {
    if (s.dmat) return s.dmat(t);
    return fd_jacobian([&](const Vec& d) { return s.h(t, Vec::Zero(s.n), d); }, Vec::Zero(s.m), s.fd);
}

// Remainder of the linearization, stacked as (state rows; output rows).
inline Vec delta_l(const SystemMap& s, double t, const Vec& x, const Vec& d) {
    if (s.delta_l) return s.delta_l(t, x, d);
    const Vec fh = stack(s.f(t, x, d), s.h(t, x, d));
    Mat abcd(s.n + s.p, s.n + s.m);
    abcd << lin_a(s, t), lin_b(s, t), lin_c(s, t), lin_d(s, t);
    return fh - abcd * stack(x, d);
}

inline double stacking_residual(const SystemMap& s, double t, const Vec& x, const Vec& d) {
    const Vec fh = stack(s.f(t, x, d), s.h(t, x, d));
    Mat abcd(s.n + s.p, s.n + s.m);
    abcd << lin_a(s, t), lin_b(s, t), lin_c(s, t), lin_d(s, t);
    return (fh - abcd * stack(x, d) - delta_l(s, t, x, d)).norm();
}

inline Mat delta_l_jacobian(const SystemMap& s, double t, const Vec& x, const Vec& d) {
    return fd_jacobian(
        [&](const Vec& z) { return delta_l(s, t, z.head(s.n), z.tail(s.m)); }, stack(x, d), s.fd);
}

inline Vec evaluate_sigma(const SystemMap& s, double t, const Vec& x, const Vec& x1, const Vec& d,
                          const Vec& y) {
    return stack(x1 - s.f(t, x, d), y - s.h(t, x, d));
}

// Infinitesimal symmetry condition: the prolonged generator applied to Sigma
// on its zero set, expanded as a sum of Jacobian-generator products.
inline double lie_symmetry_residual(const SystemMap& s, const Generator& g, double t, const Vec& x,
                                    const Vec& d) {
    const FdPolicy fd = s.fd;
    const Vec F = s.f(t, x, d);
    const Vec H = s.h(t, x, d);
    const double gt = g.g_t(t);
    const Vec gx = g.g_x(t, x);
    const Vec gd = g.g_d(t, x, d);
    const Vec gy = g.g_y(t, H);
    const Vec gx1 = prolong_generator(g, t, x, F);

    const Vec Ft = fd_vec_derivative([&](double r) { return s.f(r, x, d); }, t, fd);
    const Mat Fx = fd_jacobian([&](const Vec& v) { return s.f(t, v, d); }, x, fd);
    const Mat Fd = fd_jacobian([&](const Vec& v) { return s.f(t, x, v); }, d, fd);
    const Vec Ht = fd_vec_derivative([&](double r) { return s.h(r, x, d); }, t, fd);
    const Mat Hx = fd_jacobian([&](const Vec& v) { return s.h(t, v, d); }, x, fd);
    const Mat Hd = fd_jacobian([&](const Vec& v) { return s.h(t, x, v); }, d, fd);

    const Vec state_rows = gx1 - Ft * gt - Fx * gx - Fd * gd;
    const Vec output_rows = gy - Ht * gt - Hx * gx - Hd * gd;
    return stack(state_rows, output_rows).norm();
}

// Image of the solution-manifold point (t, x, F, d, H) under Psi_par, returned
// as (t_p, x_p, x1_p, d_p, y_p).
struct ProlongedImage {
    double t;
    Vec x, x1, d, y;
};

inline ProlongedImage transform_manifold_point(const SystemMap& s, const GroupAction& a, double par,
                                               double t, const Vec& x, const Vec& d) {
    const Vec H = s.h(t, x, d);
    if (!in_domain(a, par, Point{t, x, d, H}))
        throw DomainViolation("manifold point outside the domain of " + a.name);
    auto [xp, x1p] = prolong_point(a, par, t, x, s.f(t, x, d));
    return {a.psi_t(par, t), std::move(xp), std::move(x1p), a.psi_d(par, t, x, d), a.psi_y(par, t, H)};
}

inline double pushforward_residual(const SystemMap& s, const GroupAction& a, double par, double t,
                                   const Vec& x, const Vec& d) {
    const auto im = transform_manifold_point(s, a, par, t, x, d);
    return evaluate_sigma(s, im.t, im.x, im.x1, im.d, im.y).norm();
}

// Target system of an asymptotic symmetry with its approximation rates
// nu(r, p) and lambda(r, p).
struct AsymptoticPair {
    SystemMap sigma_inf;
    std::function<double(double r, double par)> nu;
    std::function<double(double r, double par)> lambda;
};

// The transformed target residual restricted to the solution manifold,
// evaluated at a transformed point (tb, xb, ub). The argument is pulled back
// along the group, placed on the manifold, and pushed forward again.
inline Vec delta_sigma_inf(const SystemMap& s, const SystemMap& target, const GroupAction& a,
                           double par, double tb, const Vec& xb, const Vec& ub) {
    const double t = a.psi_t(-par, tb);
    const Vec x = a.psi_x(-par, tb, xb);
    const Vec d = a.psi_d(-par, tb, xb, ub);
    const Vec H = s.h(t, x, d);
    auto [xp, x1p] = prolong_point(a, par, t, x, s.f(t, x, d));
    const Vec yp = a.psi_y(par, t, H);
    return stack(x1p - target.f(tb, xb, ub), yp - target.h(tb, xb, ub));
}

struct ResidualPair {
    double lhs = 0.0, rhs = 0.0;
    bool holds() const { return lhs <= rhs; }
};

inline double contracted_norm(const ContractionCertificate& cert, double par, const Vec& xp,
                              const Vec& dp) {
    const Vec gx = cert.group.gamma_x(par).cwiseProduct(select(xp, cert.group.index_x));
    const Vec gd = cert.group.gamma_d(par).cwiseProduct(select(dp, cert.group.index_d));
    return stack(gx, gd).norm();
}

inline ResidualPair asymptotic_residual(const SystemMap& s, const AsymptoticPair& pair,
                                        const GroupAction& a, const ContractionCertificate& cert,
                                        double par, double t, const Vec& x, const Vec& d) {
    const auto im = transform_manifold_point(s, a, par, t, x, d);
    ResidualPair r;
    r.lhs = stack(im.x1 - pair.sigma_inf.f(im.t, im.x, im.d), im.y - pair.sigma_inf.h(im.t, im.x, im.d)).norm();
    r.rhs = pair.nu(contracted_norm(cert, par, im.x, im.d), par) * stack(im.x, im.d).norm();
    return r;
}

inline ResidualPair variational_residual(const SystemMap& s, const AsymptoticPair& pair,
                                         const GroupAction& a, const ContractionCertificate& cert,
                                         double par, double t, const Vec& x, const Vec& d) {
    const auto im = transform_manifold_point(s, a, par, t, x, d);
    const auto fn = [&](const Vec& z) {
        return delta_sigma_inf(s, pair.sigma_inf, a, par, im.t, z.head(s.n), z.tail(s.m));
    };
    ResidualPair r;
    r.lhs = spectral_norm(fd_jacobian(fn, stack(im.x, im.d), s.fd));
    r.rhs = pair.lambda(contracted_norm(cert, par, im.x, im.d), par);
    return r;
}

}  // namespace symobs
