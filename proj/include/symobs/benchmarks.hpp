#pragma once

#include "symobs/observers.hpp"

#include <map>

namespace symobs {

using DisturbanceFn = std::function<Vec(double t)>;

struct SymmetryEntry {
    std::string label;
    GroupAction action;
    Generator generator;
    std::optional<ContractionCertificate> cert;
    TimeScaleTag expected_class = TimeScaleTag::UU;
    ScalarFn pi1, pi2, pi3;
    // True when the action is an exact symmetry of the target system of the
    // asymptotic pair rather than of the benchmark map itself.
    bool of_target = false;
};

struct Benchmark {
    std::string name;
    SystemMap map;
    std::vector<SymmetryEntry> actions;
    std::optional<SineData> sine;
    std::optional<AsymptoticPair> asymptotic;
    SampleBox box;
    std::map<std::string, DisturbanceFn> disturbance_profiles;
    // For the global observer: the contraction threshold map built with the
    // benchmark's growth-compatible choice of phi.
    ScalarFn global_phi;
    // Whether the parameters satisfy the hypotheses under which the
    // asymptotic rates nu and lambda are claimed.
    bool rates_certified = true;
    std::string rates_note;

    const SymmetryEntry& entry(const std::string& label) const {
        for (const auto& e : actions)
            if (e.label == label) return e;
        throw InvalidConfig("benchmark " + name + " has no action '" + label + "'");
    }
};

struct CertOptions {
    double delta = 0.5;
    ScalarFn phi = [](double s) { return s; };
};

namespace bench_detail {

inline Vec v1(double a) { return Vec::Constant(1, a); }
inline Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}
inline Mat double_integrator() {
    Mat a(2, 2);
    a << 0, 1, 0, 0;
    return a;
}
inline Mat row_c() {
    Mat c(1, 2);
    c << 1, 0;
    return c;
}
inline Mat col_b() {
    Mat b(2, 1);
    b << 0, 1;
    return b;
}

inline std::map<std::string, DisturbanceFn> standard_profiles(int m) {
    return {
        {"zero", [m](double) { return Vec::Zero(m); }},
        {"constant", [m](double) { return Vec::Constant(m, 0.1); }},
        {"sinusoid", [m](double t) { return Vec::Constant(m, 0.3 * std::sin(2.0 * t)); }},
    };
}

inline void check_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidConfig("delta must lie in (0, 1)");
}

// Single-output double-integrator skeleton shared by the planar examples.
inline SystemMap planar_map(std::string name, VecField f, VecField dl, ScalarFn xi, bool has_b = true) {
    SystemMap s;
    s.name = std::move(name);
    s.n = 2;
    s.m = 1;
    s.p = 1;
    s.f = std::move(f);
    s.h = [](double, const Vec& x, const Vec&) { return v1(x(0)); };
    s.a = [](double) { return double_integrator(); };
    s.b = [has_b](double) { return has_b ? col_b() : Mat(Mat::Zero(2, 1)); };
    s.c = [](double) { return row_c(); };
    s.dmat = [](double) { return Mat(Mat::Zero(1, 1)); };
    s.delta_l = std::move(dl);
    s.xi = std::move(xi);
    return s;
}

// Diagonal exponential scaling with a linear time map t -> e^{rate_t p} t.
struct ScalingRates {
    double t;
    Vec x, d, y;
};

inline GroupAction scaling_action(std::string name, ScalingRates r) {
    GroupAction a;
    a.name = std::move(name);
    a.n = r.x.size();
    a.m = r.d.size();
    a.p = r.y.size();
    a.psi_t = [rt = r.t](double par, double t) { return std::exp(rt * par) * t; };
    a.psi_x = [rx = r.x](double par, double, const Vec& x) {
        return Vec((-par * rx).array().exp() * x.array());
    };
    a.psi_d = [rd = r.d](double par, double, const Vec&, const Vec& d) {
        return Vec((-par * rd).array().exp() * d.array());
    };
    a.psi_y = [ry = r.y](double par, double, const Vec& y) {
        return Vec((-par * ry).array().exp() * y.array());
    };
    a.dom_plus_t = [](double) { return kInf; };
    a.jac.dt_dt = [rt = r.t](double par, double) { return std::exp(rt * par); };
    a.jac.dx_dt = [n = a.n](double, double, const Vec&) { return Vec(Vec::Zero(n)); };
    a.jac.dx_dx = [rx = r.x](double par, double, const Vec&) {
        return Mat((-par * rx).array().exp().matrix().asDiagonal());
    };
    return a;
}

inline Generator scaling_generator(ScalingRates r) {
    Generator g;
    g.g_t = [rt = r.t](double t) { return rt * t; };
    g.g_x = [rx = r.x](double, const Vec& x) { return Vec(-rx.cwiseProduct(x)); };
    g.g_d = [rd = r.d](double, const Vec&, const Vec& d) { return Vec(-rd.cwiseProduct(d)); };
    g.g_y = [ry = r.y](double, const Vec& y) { return Vec(-ry.cwiseProduct(y)); };
    g.dgx_dx = [rx = r.x](double, const Vec&) { return Mat((-rx).asDiagonal()); };
    g.regularity = Regularity{r.t, [](double) { return 0.0; }, r.x.cwiseAbs().maxCoeff()};
    return g;
}

}  // namespace bench_detail

namespace bench_detail {

// Threshold sigma = ln(1 + phi(s)) / (rate * c) with mu = e^{-rate (1 - c) s},
// c = 1 - delta for full-state certificates and c = delta for partial ones.
inline ContractionCertificate log_certificate(double c, double rate, ScalarFn phi, DiagonalGroup group,
                                              CertKind kind) {
    ContractionCertificate cert;
    cert.sigma = [c, rate, phi](double s) { return std::log1p(phi(s)) / (rate * c); };
    cert.mu = [c, rate](double s) { return std::exp(-rate * (1.0 - c) * s); };
    cert.group = std::move(group);
    cert.kind = kind;
    return cert;
}

inline DiagonalGroup identity_on(std::vector<int> ix, std::vector<int> id) {
    DiagonalGroup g;
    g.gamma_x = [nx = ix.size()](double) { return Vec::Ones(nx); };
    g.gamma_d = [nd = id.size()](double) { return Vec::Ones(nd); };
    g.index_x = std::move(ix);
    g.index_d = std::move(id);
    return g;
}

// Q solving Q(A - KC) + (A - KC)'Q = -2I for the double integrator with the
// gain placing both observer poles at {-1, -2}.
inline Mat reference_q() {
    const Mat a = double_integrator(), c = row_c();
    const Mat k = place_observer_poles(a, c, {-1.0, -2.0});
    return solve_lyapunov(a - k * c, 2.0 * Mat::Identity(2, 2));
}

inline double eig_max(const Mat& q) { return Eigen::SelfAdjointEigenSolver<Mat>(q).eigenvalues().maxCoeff(); }
inline double eig_min(const Mat& q) { return Eigen::SelfAdjointEigenSolver<Mat>(q).eigenvalues().minCoeff(); }

}  // namespace bench_detail

inline Benchmark bench_ex1(const CertOptions& opt = {}) {
    using namespace bench_detail;
    check_delta(opt.delta);
    Benchmark b;
    b.name = "ex1";
    b.map = planar_map(
        "ex1", [](double, const Vec& x, const Vec& d) { return v2(x(1), x(1) * x(1) + d(0)); },
        [](double, const Vec& x, const Vec&) {
            Vec r = Vec::Zero(3);
            r(1) = x(1) * x(1);
            return r;
        },
        [](double s) { return 2.0 * s; });
    b.box = make_box(2, 1);
    b.disturbance_profiles = standard_profiles(1);

    // Nonlinear global symmetry; D(x1) = 1 + e^{x1} - e^{x1 - p} > 0 on its domain.
    {
        SymmetryEntry e;
        e.label = "psi0";
        GroupAction& a = e.action;
        a.name = "ex1.psi0";
        a.n = 2;
        a.m = 1;
        a.p = 1;
        auto den = [](double par, double x1) { return 1.0 + std::exp(x1) - std::exp(x1 - par); };
        auto log_map = [den](double par, double x1) { return x1 - par - std::log(den(par, x1)); };
        a.psi_t = [](double par, double t) { return std::exp(par) * t; };
        a.psi_x = [den, log_map](double par, double, const Vec& x) {
            return v2(log_map(par, x(0)), std::exp(-par) * x(1) / den(par, x(0)));
        };
        a.psi_d = [den](double par, double, const Vec& x, const Vec& d) {
            return v1(std::exp(-2.0 * par) * d(0) / den(par, x(0)));
        };
        a.psi_y = [log_map](double par, double, const Vec& y) { return v1(log_map(par, y(0))); };
        a.dom_plus_t = [](double) { return kInf; };
        a.domain_test = [](double par, const Point& pt) {
            if (par >= 0.0) return true;
            const double cap = -std::log(std::expm1(-par));
            return pt.x(0) < cap && (pt.y.size() == 0 || pt.y(0) < cap);
        };
        a.jac.dt_dt = [](double par, double) { return std::exp(par); };
        a.jac.dx_dt = [](double, double, const Vec&) { return Vec(Vec::Zero(2)); };
        a.jac.dx_dx = [den](double par, double, const Vec& x) {
            const double D = den(par, x(0));
            const double dD = std::exp(x(0)) * (1.0 - std::exp(-par));
            Mat j(2, 2);
            j << 1.0 / D, 0.0, -std::exp(-par) * x(1) * dD / (D * D), std::exp(-par) / D;
            return j;
        };
        Generator& g = e.generator;
        g.g_t = [](double t) { return t; };
        g.g_x = [](double, const Vec& x) {
            const double ex = std::exp(x(0));
            return v2(-(1.0 + ex), -(1.0 + ex) * x(1));
        };
        g.g_d = [](double, const Vec& x, const Vec& d) { return v1(-(2.0 + std::exp(x(0))) * d(0)); };
        g.g_y = [](double, const Vec& y) { return v1(-(1.0 + std::exp(y(0)))); };
        g.dgx_dx = [](double, const Vec& x) {
            const double ex = std::exp(x(0));
            Mat j(2, 2);
            j << -ex, 0.0, -ex * x(1), -(1.0 + ex);
            return j;
        };
        // Certified on (x2, d): for p > 0 the denominator is at least 1.
        const double delta = opt.delta;
        ContractionCertificate c;
        c.sigma = [delta](double s) { return s / delta; };
        c.mu = [delta](double s) { return std::exp(-s * (1.0 - delta)); };
        c.group = identity_on({1}, {0});
        c.kind = CertKind::PSI;
        e.cert = c;
        e.expected_class = TimeScaleTag::UU;
        b.actions.push_back(std::move(e));
    }
    {
        SymmetryEntry e;
        e.label = "psi0_alt";
        e.action = scaling_action("ex1.psi0_alt", {1.0, v2(0.0, 1.0), v1(2.0), v1(0.0)});
        e.generator = scaling_generator({1.0, v2(0.0, 1.0), v1(2.0), v1(0.0)});
        e.cert = log_certificate(opt.delta, 1.0, opt.phi, identity_on({1}, {0}), CertKind::PSI);
        e.expected_class = TimeScaleTag::UU;
        e.pi1 = [](double s) { return 1.0 + s; };
        e.pi2 = [](double s) { return std::exp(-s); };
        e.pi3 = [](double s) { return s; };
        b.actions.push_back(std::move(e));
    }

    // Norm estimator from W = z'Qz with z = (x1, e^{-x1} x2).
    const Mat q = reference_q();
    const double q_min = eig_min(q);
    const double ell1 = 2.0 / (1.1 * eig_max(q));
    auto w = [q](const Vec& x) {
        const Vec z = v2(x(0), std::exp(-x(0)) * x(1));
        return z.dot(q * z);
    };
    const double ell2 = fit_dissipation_gain(
        w, b.map, ell1, [](double y) { return 1.0 + std::exp(y + 1.0); }, b.box, 20000);
    SineData s;
    s.v = [w](double, const Vec& x) { return std::log1p(w(x)); };
    s.alpha = [ell1](double v) { return ell1 * v / (1.0 + v); };
    s.phi = [ell2](double v) { return ell2 * (1.0 + std::exp(v + 1.0)) * (1.0 + v * v); };
    s.beta1 = [q_min](double v) {
        const double r = std::sqrt(std::expm1(v) / q_min);
        return r * (1.0 + std::exp(r));
    };
    s.eta = s.phi;
    b.sine = s;
    b.global_phi = [](double v) { return v; };
    return b;
}

// Linear example with the finite-time (blowing-up) group.
inline Benchmark bench_ex2() {
    using namespace bench_detail;
    Benchmark b;
    b.name = "ex2";
    b.map = planar_map(
        "ex2", [](double, const Vec& x, const Vec& d) { return v2(x(1), d(0)); },
        [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(3)); }, [](double) { return 0.0; });
    b.box = make_box(2, 1, 3.0, 2.0, 0.9);
    b.disturbance_profiles = standard_profiles(1);

    SymmetryEntry e;
    e.label = "locgr";
    GroupAction& a = e.action;
    a.name = "ex2.locgr";
    a.n = 2;
    a.m = 1;
    a.p = 1;
    a.psi_t = [](double par, double t) { return t / (1.0 - par * t); };
    a.psi_x = [](double par, double t, const Vec& x) {
        const double c = 1.0 - par * t;
        return v2(x(0) / c, par * x(0) + c * x(1));
    };
    a.psi_d = [](double par, double t, const Vec&, const Vec& d) { return v1(std::pow(1.0 - par * t, 3) * d(0)); };
    a.psi_y = [](double par, double t, const Vec& y) { return v1(y(0) / (1.0 - par * t)); };
    a.dom_plus_t = [](double par) { return par > 0.0 ? 1.0 / par : kInf; };
    a.domain_test = [](double par, const Point& pt) { return 1.0 - par * pt.t > 0.0; };
    a.jac.dt_dt = [](double par, double t) { return 1.0 / ((1.0 - par * t) * (1.0 - par * t)); };
    a.jac.dx_dt = [](double par, double t, const Vec& x) {
        const double c = 1.0 - par * t;
        return v2(par * x(0) / (c * c), -par * x(1));
    };
    a.jac.dx_dx = [](double par, double t, const Vec&) {
        const double c = 1.0 - par * t;
        Mat j(2, 2);
        j << 1.0 / c, 0.0, par, c;
        return j;
    };
    Generator& g = e.generator;
    g.g_t = [](double t) { return t * t; };
    g.g_x = [](double t, const Vec& x) { return v2(t * x(0), x(0) - t * x(1)); };
    g.g_d = [](double t, const Vec&, const Vec& d) { return v1(-3.0 * t * d(0)); };
    g.g_y = [](double t, const Vec& y) { return v1(t * y(0)); };
    g.dgx_dx = [](double t, const Vec&) {
        Mat j(2, 2);
        j << t, 0.0, 1.0, -t;
        return j;
    };
    e.expected_class = TimeScaleTag::CBU;
    e.pi1 = [](double) { return 1.0; };
    // The bound scales with sup|d| (constant factor 1).
    e.pi3 = [](double s) { return s; };
    b.actions.push_back(std::move(e));
    return b;
}

namespace bench_detail {

inline ScalarFn ex3_xi(int k) {
    if (k == 2) return [](double s) { return 2.0 * s * s; };
    return [k](double s) { return (k + 1) * std::pow(s, k) + 3.0 * s * s; };
}

inline void check_k(int k) {
    if (k < 2) throw InvalidK("k must be an integer >= 2, got " + std::to_string(k));
}

// The weighted-homogeneous symmetry of the triangular example. With
// `coupled_d` the disturbance enters through (1 + x1^2), otherwise through x1^2.
inline SymmetryEntry ex3_symmetry(int k, bool coupled_d, const CertOptions& opt) {
    SymmetryEntry e;
    e.label = "triang";
    const ScalingRates rates{double(k), v2(1.0, 1.0 + k), v1(2.0 * k - 1.0), v1(1.0)};
    e.action = scaling_action(coupled_d ? "ex3.triang" : "ex3i.triang", rates);
    e.generator = scaling_generator(rates);
    if (coupled_d) {
        e.action.psi_d = [k](double par, double, const Vec& x, const Vec& d) {
            const double x1s = x(0) * x(0);
            return v1(std::exp(-(2.0 * k - 1.0) * par) * (1.0 + x1s) / (std::exp(2.0 * par) + x1s) * d(0));
        };
        e.generator.g_d = [k](double, const Vec& x, const Vec& d) {
            const double x1s = x(0) * x(0);
            return v1((-(1.0 + 2.0 * k) + 2.0 * x1s / (1.0 + x1s)) * d(0));
        };
    }
    e.cert = log_certificate(1.0 - opt.delta, 1.0, opt.phi, identity_group(2, 1), CertKind::SI);
    e.expected_class = TimeScaleTag::UU;
    e.pi1 = [](double s) { return 1.0 + s; };
    e.pi2 = [k](double s) { return std::exp(-(1.0 + k) * s); };
    e.pi3 = [](double s) { return s; };
    return e;
}

inline SystemMap ex3_map(int k, bool coupled_d) {
    const double c0 = coupled_d ? 1.0 : 0.0;
    return planar_map(
        coupled_d ? "ex3" : "ex3i",
        [k, c0](double, const Vec& x, const Vec& d) {
            return v2(x(1), x(1) * std::pow(x(0), k) + (c0 + x(0) * x(0)) * d(0));
        },
        [k](double, const Vec& x, const Vec& d) {
            Vec r = Vec::Zero(3);
            r(1) = x(1) * std::pow(x(0), k) + x(0) * x(0) * d(0);
            return r;
        },
        ex3_xi(k), coupled_d);
}

}  // namespace bench_detail

inline Benchmark bench_ex3(int k = 2, const CertOptions& opt = {}) {
    using namespace bench_detail;
    check_k(k);
    check_delta(opt.delta);
    Benchmark b;
    b.name = "ex3";
    b.map = ex3_map(k, true);
    b.box = make_box(2, 1);
    b.disturbance_profiles = standard_profiles(1);
    b.actions.push_back(ex3_symmetry(k, true, opt));

    auto tau = [k](double s) { return 2.0 * (1.0 + std::pow(s, k)); };
    const Mat q = reference_q();
    const double ell1 = 2.0 / (1.1 * eig_max(q));
    const double ell2 = fit_dissipation_gain([q](const Vec& x) { return x.dot(q * x); }, b.map, ell1,
                                             [tau](double y) { return 1.0 + tau(y); },
                                             make_box(2, 1, 10.0, 2.0), 20000);
    b.sine = build_sine_for_triangular(q, ell1, ell2, tau);
    b.global_phi = [tau](double s) { return s * (1.0 + tau(s)) * (1.0 + s) + tau(s) - tau(0.0); };
    return b;
}

// Variant of the triangular example whose disturbance enters through x1^2, so
// that the linearization has no input column.
inline Benchmark bench_ex3_insensitive(int k = 2, const CertOptions& opt = {}) {
    using namespace bench_detail;
    check_k(k);
    check_delta(opt.delta);
    Benchmark b;
    b.name = "ex3i";
    b.map = ex3_map(k, false);
    b.box = make_box(2, 1);
    b.disturbance_profiles = standard_profiles(1);
    b.actions.push_back(ex3_symmetry(k, false, opt));
    return b;
}

struct Ex5Params {
    double r1 = 1.0, gamma = 1.0;
    double a1 = 1.0, a21 = 0.5, a22 = -1.0;
};

namespace bench_detail {

// Lyapunov function of the homogeneous triangular family:
//   int_{[x2]^{r1/r2}}^{d1 x1} ([s]^e - [x2]^{(d2-r1)/r2}) ds + |x2|^{d2/r2},
// e = (d2 - r1)/r1, evaluated in closed form with signed powers.
inline double ex5_v(const Vec& x, double r1, double r2, double d1, double d2) {
    const double e = (d2 - r1) / r1;
    const double lo = signed_pow(x(1), r1 / r2);
    const double hi = d1 * x(0);
    const double c = signed_pow(x(1), (d2 - r1) / r2);
    const double integral =
        (std::pow(std::abs(hi), e + 1.0) - std::pow(std::abs(lo), e + 1.0)) / (e + 1.0) - c * (hi - lo);
    return integral + std::pow(std::abs(x(1)), d2 / r2);
}

}  // namespace bench_detail

inline Benchmark bench_ex5(const Ex5Params& prm = {}, const CertOptions& opt = {}) {
    using namespace bench_detail;
    if (!(prm.r1 > 0.0) || !(prm.gamma >= 0.0))
        throw InvalidExponents("need r1 > 0 and gamma >= 0");
    check_delta(opt.delta);
    const double r1 = prm.r1, g = prm.gamma, r2 = r1 + g;
    Benchmark b;
    b.name = "ex5";
    SystemMap& s = b.map;
    s.name = "ex5";
    s.n = 2;
    s.m = 1;
    s.p = 1;
    s.f = [prm, r1, r2, g](double, const Vec& x, const Vec& d) {
        return v2(prm.a1 * signed_pow(x(0), (g + r1) / r1) + x(1),
                  prm.a21 * signed_pow(x(0), (g + r2) / r1) + prm.a22 * signed_pow(x(1), (g + r2) / r2) + d(0));
    };
    s.h = [](double, const Vec& x, const Vec&) { return v1(x(0)); };
    // Global Lipschitz bound only in the linear case; the nonlinear case is
    // not used with the semiglobal tuning.
    s.xi = [](double) { return 0.0; };
    b.box = make_box(2, 1);
    b.disturbance_profiles = standard_profiles(1);

    SymmetryEntry e;
    e.label = "homog";
    const ScalingRates rates{g, v2(r1, r2), v1(g + r2), v1(r1)};
    e.action = scaling_action("ex5.homog", rates);
    e.generator = scaling_generator(rates);
    e.cert = log_certificate(opt.delta, r1, opt.phi, identity_group(2, 1), CertKind::SI);
    e.expected_class = g > 0.0 ? TimeScaleTag::UU : TimeScaleTag::Other;
    e.pi1 = [](double v) { return 1.0 + v; };
    e.pi3 = [](double v) { return v; };
    b.actions.push_back(std::move(e));

    // Norm estimator with power-law gains, all constants fitted on the box.
    const double d2 = 2.0 * std::max(r1, r2) + g, d1 = 4.0;
    auto v = [=](const Vec& x) { return ex5_v(x, r1, r2, d1, d2); };
    const double ea = (d2 + g) / d2, ey = (d2 + g) / r1, ed = (d2 + g) / (r2 + g);
    BoxSampler smp(13);
    auto dv = [&](const Vec& x, const Vec& d) {
        const Mat grad = fd_jacobian([&](const Vec& z) { return v1(v(z)); }, x);
        return (grad * s.f(0.0, x, d))(0);
    };
    double ell1 = kInf;
    for (int i = 0; i < 4000; ++i) {
        const Vec x = v2(0.0, smp.uniform(-3.0, 3.0));
        if (std::abs(x(1)) < 1e-3) continue;
        ell1 = std::min(ell1, -dv(x, v1(0.0)) / std::pow(v(x), ea));
    }
    ell1 *= 0.5;
    if (ell1 > 0.0) {
        double ell2 = 0.0, b1 = 0.0;
        for (int i = 0; i < 20000; ++i) {
            const Vec x = smp.uniform(b.box.x_lo, b.box.x_hi);
            const Vec d = smp.uniform(b.box.d_lo, b.box.d_hi);
            const double vx = v(x);
            const double need = dv(x, d) + ell1 * std::pow(vx, ea);
            if (need > 0.0)
                ell2 = std::max(ell2, need / (std::pow(std::abs(x(0)), ey) + std::pow(std::abs(d(0)), ed)));
            if (x.norm() > 1.0 && vx > 0.0) b1 = std::max(b1, (x.norm() - 1.0) / std::pow(vx, r2 / d2));
        }
        ell2 *= 1.1;
        b1 *= 1.1;
        SineData sd;
        sd.v = [v](double, const Vec& x) { return v(x); };
        sd.alpha = [ell1, ea](double z) { return ell1 * std::pow(z, ea); };
        sd.phi = [ell2, ey, ed](double z) { return ell2 * (std::pow(z, ey) + std::pow(z, ed)); };
        sd.beta1 = [b1, r2, d2](double z) { return b1 * std::pow(z, r2 / d2); };
        sd.eta = sd.phi;
        sd.beta0 = 1.0;
        b.sine = sd;
    }
    b.global_phi = [](double z) { return z; };
    return b;
}

// Builds the e8 data for any time rate. The approximation rates are only
// valid for gt >= max{6, 2k}; bench_e8 enforces that, while verification
// suites use this builder to exhibit the failure below the threshold.
inline Benchmark bench_e8_unchecked(int k, double gt, const CertOptions& opt = {}) {
    using namespace bench_detail;
    check_k(k);
    check_delta(opt.delta);
    Benchmark b;
    b.name = "e8";
    b.map = ex3_map(k, true);
    b.box = make_box(2, 1);
    b.disturbance_profiles = standard_profiles(1);

    AsymptoticPair pair;
    pair.sigma_inf = planar_map(
        "e8.target", [](double, const Vec& x, const Vec&) { return v2(x(1), 0.0); },
        [](double, const Vec&, const Vec&) { return Vec(Vec::Zero(3)); }, [](double) { return 0.0; },
        false);
    pair.nu = [k, gt](double r, double s) { return std::exp(-s * gt) * (std::pow(r, k) + 1.0 + r * r); };
    pair.lambda = [k, gt](double r, double s) {
        return std::exp(-s * gt / 2.0) * (1.0 + 3.0 * r + std::pow(r, k - 1) * (k + 1));
    };
    b.asymptotic = pair;
    b.rates_certified = gt >= std::max(6.0, 2.0 * k);
    if (!b.rates_certified) b.rates_note = "g_t below max{6, 2k}: rates not certified";

    SymmetryEntry e;
    e.label = "avs";
    const ScalingRates rates{gt, v2(1.0, 1.0 + gt), v1(1.0 + 2.0 * gt / 3.0), v1(1.0)};
    e.action = scaling_action("e8.avs", rates);
    e.generator = scaling_generator(rates);
    DiagonalGroup grp;
    grp.gamma_x = [gt](double par) { return v2(1.0, std::exp(par * gt)); };
    grp.gamma_d = [gt](double par) { return v1(std::exp(2.0 * par * gt / 3.0)); };
    grp.index_x = {0, 1};
    grp.index_d = {0};
    e.cert = log_certificate(1.0 - opt.delta, 1.0, opt.phi, grp, CertKind::SI);
    e.expected_class = TimeScaleTag::UU;
    e.pi1 = [](double s) { return 1.0 + s; };
    e.pi3 = [](double s) { return s; };
    e.of_target = true;
    b.actions.push_back(std::move(e));
    return b;
}

inline Benchmark bench_e8(int k = 2, double gt = 6.0, const CertOptions& opt = {}) {
    if (!(gt >= std::max(6.0, 2.0 * k))) throw InvalidGT("need g_t >= max{6, 2k}");
    return bench_e8_unchecked(k, gt, opt);
}

inline std::vector<std::string> benchmark_names() { return {"ex1", "ex2", "ex3", "ex3i", "ex5", "e8"}; }

struct BenchmarkParams {
    int k = 2;
    double gt = 6.0;
    Ex5Params ex5;
    CertOptions cert;
};

inline Benchmark make_benchmark(const std::string& name, const BenchmarkParams& p = {}) {
    if (name == "ex1") return bench_ex1(p.cert);
    if (name == "ex2") return bench_ex2();
    if (name == "ex3") return bench_ex3(p.k, p.cert);
    if (name == "ex3i") return bench_ex3_insensitive(p.k, p.cert);
    if (name == "ex5") return bench_ex5(p.ex5, p.cert);
    if (name == "e8") return bench_e8(p.k, p.gt, p.cert);
    throw InvalidConfig("unknown benchmark '" + name + "'");
}

}  // namespace symobs
