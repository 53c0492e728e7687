#pragma once

#include "symobs/numerics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace symobs {

// A point (t, x, d, y) of the extended space the groups act on.
struct Point {
    double t = 0.0;
    Vec x, d, y;
};

// One-parameter group of transformations acting on (t, x, d, y).
//
// The time map depends on (p, t) only. Analytic Jacobians are optional; when
// an entry is empty the corresponding derivative is taken by central
// differences with the action's FdPolicy.
struct GroupAction {
    std::string name;
    int n = 0, m = 0, p = 0;

    std::function<double(double par, double t)> psi_t;
    std::function<Vec(double par, double t, const Vec& x)> psi_x;
    std::function<Vec(double par, double t, const Vec& x, const Vec& d)> psi_d;
    std::function<Vec(double par, double t, const Vec& y)> psi_y;

    // sup{a : [0, a) inside the domain of the time map}; +inf when global.
    std::function<double(double par)> dom_plus_t;
    // Membership in Dom(Psi_par). Empty means the whole space.
    std::function<bool(double par, const Point&)> domain_test;

    struct Jacobians {
        std::function<double(double par, double t)> dt_dt;
        std::function<Vec(double par, double t, const Vec& x)> dx_dt;
        std::function<Mat(double par, double t, const Vec& x)> dx_dx;
    } jac;

    FdPolicy fd;
};

inline bool in_domain(const GroupAction& a, double par, const Point& pt) {
    if (a.dom_plus_t) {
        const double dp = a.dom_plus_t(par);
        if (pt.t >= 0.0 && pt.t >= dp) return false;
    }
    return !a.domain_test || a.domain_test(par, pt);
}

inline double time_jacobian(const GroupAction& a, double par, double t) {
    if (a.jac.dt_dt) return a.jac.dt_dt(par, t);
    return fd_derivative([&](double s) { return a.psi_t(par, s); }, t, a.fd);
}

inline Vec state_time_derivative(const GroupAction& a, double par, double t, const Vec& x) {
    if (a.jac.dx_dt) return a.jac.dx_dt(par, t, x);
    return fd_vec_derivative([&](double s) { return a.psi_x(par, s, x); }, t, a.fd);
}

inline Mat state_jacobian(const GroupAction& a, double par, double t, const Vec& x) {
    if (a.jac.dx_dx) return a.jac.dx_dx(par, t, x);
    return fd_jacobian([&](const Vec& v) { return a.psi_x(par, t, v); }, x, a.fd);
}

// Image of a point; throws DomainViolation outside Dom(Psi_par).
inline Point apply(const GroupAction& a, double par, const Point& pt) {
    if (!in_domain(a, par, pt))
        throw DomainViolation("point outside the domain of " + a.name);
    Point out;
    out.t = a.psi_t(par, pt.t);
    out.x = a.psi_x(par, pt.t, pt.x);
    out.d = a.psi_d(par, pt.t, pt.x, pt.d);
    out.y = a.psi_y(par, pt.t, pt.y);
    return out;
}

inline constexpr double kSingularTimeTol = 1e-12;

// First prolongation of the (t, x) action: the image of a state velocity x1.
inline std::pair<Vec, Vec> prolong_point(const GroupAction& a, double par, double t,
                                         const Vec& x, const Vec& x1) {
    if (par == 0.0) return {x, x1};
    const double s = time_jacobian(a, par, t);
    if (!(std::abs(s) > kSingularTimeTol))
        throw SingularTimeJacobian("dPsi^t/dt vanishes at t=" + std::to_string(t));
    Vec xp = a.psi_x(par, t, x);
    Vec x1p = (state_time_derivative(a, par, t, x) + state_jacobian(a, par, t, x) * x1) / s;
    return {std::move(xp), std::move(x1p)};
}

// Constants of the regularity assumption on the generator used by the global
// observer: g^t(t) <= h t, kappa bounds the drift of dg^x/dx away from 0,
// dgx0_sup bounds dg^x/dx at x = 0.
struct Regularity {
    double h = 0.0;
    std::function<double(double)> kappa;
    double dgx0_sup = 0.0;
};

struct Generator {
    std::function<double(double t)> g_t;
    std::function<Vec(double t, const Vec& x)> g_x;
    std::function<Vec(double t, const Vec& x, const Vec& d)> g_d;
    std::function<Vec(double t, const Vec& y)> g_y;
    std::optional<Regularity> regularity;
    // Optional analytic dg^x/dx; otherwise finite differences.
    std::function<Mat(double t, const Vec& x)> dgx_dx;
    FdPolicy fd;
};

inline Mat generator_state_jacobian(const Generator& g, double t, const Vec& x) {
    if (g.dgx_dx) return g.dgx_dx(t, x);
    return fd_jacobian([&](const Vec& v) { return g.g_x(t, v); }, x, g.fd);
}

// Velocity component of the prolonged generator:
//   (dg^x/dx) x1 + dg^x/dt - (dg^t/dt) x1.
inline Vec prolong_generator(const Generator& g, double t, const Vec& x, const Vec& x1) {
    const Mat gx_x = generator_state_jacobian(g, t, x);
    const Vec gx_t = fd_vec_derivative([&](double s) { return g.g_x(s, x); }, t, g.fd);
    const double gt_t = fd_derivative(g.g_t, t, g.fd);
    return gx_x * x1 + gx_t - gt_t * x1;
}

// max over samples of the central difference (Psi_h - Psi_-h)/(2h) against g.
inline double generator_consistency(const GroupAction& a, const Generator& g,
                                    const std::vector<Point>& samples, double h = 1e-4) {
    double worst = 0.0;
    for (const auto& pt : samples) {
        if (!in_domain(a, h, pt) || !in_domain(a, -h, pt)) continue;
        const Point up = apply(a, h, pt), dn = apply(a, -h, pt);
        const double rt = std::abs((up.t - dn.t) / (2 * h) - g.g_t(pt.t));
        const double rx = ((up.x - dn.x) / (2 * h) - g.g_x(pt.t, pt.x)).norm();
        const double rd = ((up.d - dn.d) / (2 * h) - g.g_d(pt.t, pt.x, pt.d)).norm();
        const double ry = ((up.y - dn.y) / (2 * h) - g.g_y(pt.t, pt.y)).norm();
        worst = std::max({worst, rt, rx, rd, ry});
    }
    return worst;
}

enum class TimeScaleTag { UU, BU, CBU, Other };

inline const char* to_string(TimeScaleTag t) {
    switch (t) {
        case TimeScaleTag::UU: return "UU";
        case TimeScaleTag::BU: return "BU";
        case TimeScaleTag::CBU: return "CBU";
        default: return "Other";
    }
}

struct TimeScaleEvidence {
    double par, dom_plus, limit_estimate;
};

struct TimeScaleClass {
    TimeScaleTag tag = TimeScaleTag::Other;
    std::vector<TimeScaleEvidence> evidence;
};

inline constexpr double kInfinityWitness = 1e8;

// Classify the time map from the analytic Dom+ and numerical limit probes.
// p_grid is expected in increasing order.
inline TimeScaleClass classify_time_scale(const GroupAction& a, const std::vector<double>& p_grid,
                                          double horizon) {
    if (p_grid.empty()) throw InvalidConfig("empty parameter grid");
    TimeScaleClass out;
    int n_unbounded = 0, n_bounded = 0;
    bool all_blow = true;
    for (double par : p_grid) {
        if (!(par > 0.0)) throw InvalidConfig("parameter grid must be strictly positive");
        const double dp = a.dom_plus_t ? a.dom_plus_t(par) : kInf;
        double probe = 0.0;
        if (std::isinf(dp)) {
            ++n_unbounded;
            for (int j = 0; j <= 8; ++j) {
                probe = a.psi_t(par, horizon * std::pow(10.0, j));
                if (probe > kInfinityWitness) break;
            }
        } else {
            ++n_bounded;
            for (int j = 1; j <= 12; ++j) {
                probe = a.psi_t(par, dp * (1.0 - std::pow(10.0, -j)));
                if (probe > kInfinityWitness) break;
            }
        }
        if (!(probe > kInfinityWitness)) all_blow = false;
        out.evidence.push_back({par, dp, probe});
    }
    if (n_unbounded > 0 && n_bounded > 0)
        throw InconclusiveClassification("Dom+ finite for some parameters and infinite for others");
    if (!all_blow) {
        out.tag = TimeScaleTag::Other;
        return out;
    }
    if (n_unbounded > 0) {
        out.tag = TimeScaleTag::UU;
        return out;
    }
    out.tag = TimeScaleTag::BU;
    const auto& ev = out.evidence;
    if (ev.size() < 2) return out;
    bool decreasing = true;
    for (size_t i = 1; i < ev.size(); ++i)
        if (!(ev[i].dom_plus < ev[i - 1].dom_plus)) decreasing = false;
    const double ratio = ev.back().dom_plus / ev[ev.size() - 2].dom_plus;
    if (decreasing && ratio < 0.9) {
        out.tag = TimeScaleTag::CBU;
    } else if (!decreasing || ratio > 0.99) {
        out.tag = TimeScaleTag::BU;
    } else {
        throw InconclusiveClassification("Dom+ shrinks too slowly to decide whether it tends to 0");
    }
    return out;
}

struct AxiomReport {
    double identity = 0.0, inversion = 0.0, composition = 0.0;
    int checked = 0, skipped = 0;
    bool pass = false;
};

namespace detail {
inline double block_gap(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) return kInf;
    if (a.size() == 0) return 0.0;
    const double g = (a - b).norm() / std::max(1.0, b.norm());
    return std::isfinite(g) ? g : kInf;
}
inline double point_gap(const Point& a, const Point& b) {
    const double gt = std::abs(a.t - b.t) / std::max(1.0, std::abs(b.t));
    return std::max({std::isfinite(gt) ? gt : kInf, block_gap(a.x, b.x), block_gap(a.d, b.d),
                     block_gap(a.y, b.y)});
}
}  // namespace detail

// Identity, inversion and composition residuals over a sample set. Pairs whose
// intermediate points leave the domain are skipped and counted.
inline AxiomReport check_group_axioms(const GroupAction& a, const std::vector<Point>& samples,
                                      const std::vector<std::pair<double, double>>& p_pairs,
                                      double tol = 1e-8) {
    AxiomReport r;
    for (const auto& pt : samples) {
        if (in_domain(a, 0.0, pt)) r.identity = std::max(r.identity, detail::point_gap(apply(a, 0.0, pt), pt));
        for (auto [p1, p2] : p_pairs) {
            for (double par : {p1, p2}) {
                if (!in_domain(a, par, pt)) { ++r.skipped; continue; }
                const Point q = apply(a, par, pt);
                if (!in_domain(a, -par, q)) { ++r.skipped; continue; }
                r.inversion = std::max(r.inversion, detail::point_gap(apply(a, -par, q), pt));
                ++r.checked;
            }
            if (!in_domain(a, p2, pt) || !in_domain(a, p1 + p2, pt)) { ++r.skipped; continue; }
            const Point q = apply(a, p2, pt);
            if (!in_domain(a, p1, q)) { ++r.skipped; continue; }
            r.composition = std::max(r.composition,
                                     detail::point_gap(apply(a, p1, q), apply(a, p1 + p2, pt)));
            ++r.checked;
        }
    }
    r.pass = r.identity < tol && r.inversion < tol && r.composition < tol;
    return r;
}

}  // namespace symobs
