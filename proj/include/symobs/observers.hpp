#pragma once

#include "symobs/norm_estimation.hpp"

#include <map>
#include <optional>

namespace symobs {

enum class Variant { Semiglobal, PartialSI, Global, FiniteTime, AVS, HGO, SLO };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::Semiglobal: return "semiglobal";
        case Variant::PartialSI: return "partial";
        case Variant::Global: return "global";
        case Variant::FiniteTime: return "finite_time";
        case Variant::AVS: return "avs";
        case Variant::HGO: return "hgo";
        case Variant::SLO: return "slo";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    static const std::map<std::string, Variant> table{
        {"semiglobal", Variant::Semiglobal}, {"partial", Variant::PartialSI},
        {"global", Variant::Global},         {"finite_time", Variant::FiniteTime},
        {"finite-time", Variant::FiniteTime},
        {"avs", Variant::AVS},               {"hgo", Variant::HGO},
        {"slo", Variant::SLO}};
    const auto it = table.find(s);
    if (it == table.end()) throw InvalidConfig("unknown observer '" + s + "'");
    return it->second;
}

struct GainSchedule {
    std::function<Mat(double)> k;
    std::function<Mat(double)> p_mat;
    double p_lower = 1.0, p_upper = 1.0;
    double sup_k = 0.0, sup_b = 0.0, sup_d = 0.0;
};

// Largest eigenvalue of P(A - KC) + (A - KC)'P + 2I for constant P; must be <= 0.
inline double lyapunov_margin(const GainSchedule& g, const Mat& a, const Mat& c, double t) {
    const Mat p = g.p_mat(t);
    const Mat m = a - g.k(t) * c;
    const Mat q = p * m + m.transpose() * p + 2.0 * Mat::Identity(a.rows(), a.rows());
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (q + q.transpose()));
    return es.eigenvalues().maxCoeff();
}

// Single-output observer gain by Ackermann's formula on the dual pair.
inline Mat place_observer_poles(const Mat& a, const Mat& c, const std::vector<double>& poles) {
    const Eigen::Index n = a.rows();
    if (c.rows() != 1) throw InvalidConfig("pole placement supports single-output pairs only");
    if (static_cast<Eigen::Index>(poles.size()) != n) throw InvalidConfig("need one pole per state");
    Mat obs(n, n);
    Mat row = c;
    for (Eigen::Index i = 0; i < n; ++i) {
        obs.row(i) = row;
        row = row * a;
    }
    Eigen::FullPivLU<Mat> lu(obs);
    if (lu.rank() < n) throw UnstabilizablePair("(C, A) is not observable");
    Mat charpoly = Mat::Identity(n, n);
    for (double pole : poles) charpoly = charpoly * (a - pole * Mat::Identity(n, n));
    Vec en = Vec::Zero(n);
    en(n - 1) = 1.0;
    return charpoly * lu.solve(en);
}

namespace detail {
// Max of the spectral norm over [0, horizon]; padded 5% only if it varies.
inline double grid_sup(const MatOfTime& f, double horizon, int points = 10000) {
    const double first = spectral_norm(f(0.0));
    double worst = first;
    bool varies = false;
    for (int i = 1; i < points; ++i) {
        const double v = spectral_norm(f(horizon * i / (points - 1)));
        if (std::abs(v - first) > 1e-14 * std::max(1.0, first)) varies = true;
        worst = std::max(worst, v);
    }
    return varies ? 1.05 * worst : worst;
}
}  // namespace detail

inline constexpr double kLyapunovMargin = 1e-2;

// Constant K by pole placement on the linearization at t = 0 and constant P
// from P(A - KC) + (A - KC)'P = -(2 + margin) I.
inline GainSchedule build_gains(const SystemMap& s, const std::vector<double>& poles, double horizon = 1.0) {
    const Mat a = lin_a(s, 0.0), c = lin_c(s, 0.0);
    const Mat k = place_observer_poles(a, c, poles);
    const Mat m = a - k * c;
    Eigen::EigenSolver<Mat> ev(m);
    if ((ev.eigenvalues().real().array() >= 0.0).any())
        throw UnstabilizablePair("placement did not give a Hurwitz A - KC");
    const Mat p = solve_lyapunov(m, (2.0 + kLyapunovMargin) * Mat::Identity(a.rows(), a.rows()));
    Eigen::SelfAdjointEigenSolver<Mat> es(p);
    GainSchedule g;
    g.k = [k](double) { return k; };
    g.p_mat = [p](double) { return p; };
    g.p_lower = es.eigenvalues().minCoeff();
    g.p_upper = es.eigenvalues().maxCoeff();
    if (!(g.p_lower > 0.0)) throw UnstabilizablePair("Lyapunov solution is not positive definite");
    g.sup_k = spectral_norm(k);
    g.sup_b = detail::grid_sup([&](double t) { return lin_b(s, t); }, horizon);
    g.sup_d = detail::grid_sup([&](double t) { return lin_d(s, t); }, horizon);
    return g;
}

struct PredicateValue {
    std::string name;
    double value, bound;
    double slack() const { return bound - value; }
};

struct TuningRecord {
    double epsilon = 0.0, n_bound = 0.0, omega = 0.0, p_star = 0.0, pi1_0 = 1.0;
    ScalarFn pi2, pi3;
    std::vector<PredicateValue> predicate_log;
};

struct TuningOptions {
    double omega_cap = 1e6;
    int bisection_steps = 40;
    // Added to phi(p); used by the asymptotic-symmetry observer for the
    // variational rate.
    ScalarFn extra_phi;
};

inline std::vector<PredicateValue> tuning_predicates(const ContractionCertificate& cert,
                                                     const GainSchedule& g, const SystemMap& s,
                                                     const ScalarFn& pi1, double epsilon, double par,
                                                     const ScalarFn& extra_phi = {}) {
    const double mu = cert.mu(par);
    double phi = (1.0 + g.sup_k) * s.xi((s.n + s.m) * mu);
    if (extra_phi) phi += extra_phi(par);
    const double pl = g.p_lower, pu = g.p_upper;
    const double pi1_0 = pi1(0.0);
    const double bd = g.sup_b + g.sup_d;
    const double chain = 4.0 * pu * std::sqrt(2.0 * pu / pl);
    return {
        {"a", 8.0 * pu * pu * phi / pl, 1.0},
        {"b", pi1(s.n * mu), 2.0 * pi1_0},
        {"c", (1.0 + g.sup_k) * ((bd + phi) * (bd + phi) - bd * bd),
         epsilon * epsilon / (chain * chain * 4.0 * pi1_0 * pi1_0)},
    };
}

namespace detail {
inline double invert_increasing(const ScalarFn& f, double target) {
    if (target <= f(0.0)) return 0.0;
    double hi = 1.0;
    while (f(hi) < target) {
        hi *= 2.0;
        if (hi > 1e12) throw TuningDiverged("sigma inverse out of range");
    }
    double lo = 0.0;
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < target ? lo : hi) = mid;
    }
    return hi;
}
}  // namespace detail

inline TuningRecord tune_p(const ContractionCertificate& cert, const GainSchedule& g,
                           const SystemMap& s, const ScalarFn& pi1, const ScalarFn& pi2,
                           double epsilon, double n_bound, double p0, const TuningOptions& opt = {}) {
    if (!(epsilon > 0.0) || !(n_bound > 0.0)) throw InvalidConfig("epsilon and N must be positive");
    if (!s.xi) throw InvalidConfig("system map has no xi bound");
    auto feasible = [&](double omega) {
        for (const auto& pv : tuning_predicates(cert, g, s, pi1, epsilon, cert.sigma(omega), opt.extra_phi))
            if (!(pv.value <= pv.bound)) return false;
        return true;
    };
    const double floor = std::max(detail::invert_increasing(cert.sigma, p0), n_bound);
    double lo = floor;
    double hi = floor * (1.0 + 1e-12) + 1e-12;
    if (!feasible(hi)) {
        lo = hi;
        while (!feasible(hi)) {
            lo = hi;
            hi *= 2.0;
            if (hi > opt.omega_cap) throw TuningDiverged("no feasible omega below the cap");
        }
        for (int i = 0; i < opt.bisection_steps; ++i) {
            const double mid = 0.5 * (lo + hi);
            (feasible(mid) ? hi : lo) = mid;
        }
    }
    TuningRecord r;
    r.epsilon = epsilon;
    r.n_bound = n_bound;
    r.omega = hi;
    r.p_star = cert.sigma(hi);
    r.pi1_0 = pi1(0.0);
    r.pi2 = pi2;
    r.pi3 = [](double v) { return v; };
    r.predicate_log = tuning_predicates(cert, g, s, pi1, epsilon, r.p_star, opt.extra_phi);
    return r;
}

inline double error_bound(const GainSchedule& g, double pi1_0, const ScalarFn& pi3, double sup_d,
                          double epsilon) {
    const double chain = 8.0 * g.p_upper * std::sqrt(2.0 * g.p_upper / g.p_lower);
    return (epsilon + chain * (1.0 + g.sup_k) * (g.sup_b + g.sup_d) * pi1_0) * pi3(sup_d);
}

// Everything an observer needs to run. Fixtures are held by value.
struct ObserverRig {
    Variant variant = Variant::Semiglobal;
    Vec chi;
    double p_value = 0.0;
    SystemMap map;                            // plant model
    std::optional<GroupAction> action;
    std::optional<ContractionCertificate> cert;
    GainSchedule gains;
    TuningRecord tuning;

    std::optional<AsymptoticPair> pair;       // AVS
    std::optional<Generator> generator;       // Global
    std::optional<PSchedule> schedule;        // Global
    std::optional<SineData> sine;             // Global
    LambdaSelection lambda;                   // Global
    double gamma = 1.0, n_sat = 1.0;          // HGO / SLO
    double deadzone = 1e-9;                   // SLO
    double blowup_guard = 1e-6;               // FiniteTime
};

struct RhsResult {
    Vec dchi;
    Vec zeta;
    double dp = 0.0;
};

namespace detail {

inline const GroupAction& need_action(const ObserverRig& r) {
    if (!r.action) throw InvalidConfig(std::string(to_string(r.variant)) + " observer needs a group action");
    return *r.action;
}
inline const ContractionCertificate& need_cert(const ObserverRig& r) {
    if (!r.cert) throw InvalidConfig(std::string(to_string(r.variant)) + " observer needs a certificate");
    return *r.cert;
}

inline double clock_rate(const GroupAction& a, double par, double t) {
    const double s = time_jacobian(a, par, t);
    if (!(std::abs(s) > kSingularTimeTol)) throw SingularTimeJacobian("at t=" + std::to_string(t));
    return s;
}

// Filter with full-state saturation, for the model `s`. When `inf` is set the
// asymptotic residual of the plant against `s` is added.
inline RhsResult full_state_rhs(const ObserverRig& r, const SystemMap& s, const SystemMap* plant,
                                double par, double t, const Vec& chi, const Vec& y) {
    const auto& a = need_action(r);
    const auto& cert = need_cert(r);
    const double rate = clock_rate(a, par, t);
    const double tp = a.psi_t(par, t);
    const Vec chisat = saturate_in_group(cert, par, chi);
    const Vec zero_d = Vec::Zero(s.m);
    Vec dl = delta_l(s, tp, chisat, zero_d);
    if (plant) dl += delta_sigma_inf(*plant, s, a, par, tp, chisat, zero_d);
    RhsResult out;
    out.zeta = lin_c(s, tp) * chi + dl.tail(s.p);
    const Vec yp = a.psi_y(par, t, y);
    out.dchi = rate * (lin_a(s, tp) * chi + dl.head(s.n) + r.gains.k(tp) * (yp - out.zeta));
    return out;
}

// Split form: the measured block is replaced by the transformed output and
// only the remaining components are saturated.
inline Vec partial_argument(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    const auto& a = need_action(r);
    Vec arg = saturate_in_group(need_cert(r), par, chi);
    arg.head(r.map.p) = a.psi_y(par, t, y);
    return arg;
}

inline RhsResult partial_form_rhs(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    const auto& a = need_action(r);
    const SystemMap& s = r.map;
    const double rate = clock_rate(a, par, t);
    const double tp = a.psi_t(par, t);
    const Vec arg = partial_argument(r, par, t, chi, y);
    const Vec yp = arg.head(s.p);
    Vec bracket = lin_a(s, tp) * chi + delta_l(s, tp, arg, Vec::Zero(s.m)).head(s.n) +
                  r.gains.k(tp) * (yp - chi.head(s.p));
    if (s.f1) bracket += s.f1(tp, yp);
    RhsResult out;
    out.zeta = chi.head(s.p);
    out.dchi = rate * bracket;
    return out;
}

inline Vec deadzone(const Vec& v, double w) {
    return v.unaryExpr([w](double e) { return std::abs(e) < w ? 0.0 : e; });
}

}  // namespace detail

inline RhsResult semiglobal_rhs(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    return detail::full_state_rhs(r, r.map, nullptr, par, t, chi, y);
}
inline RhsResult semiglobal_rhs(const ObserverRig& r, double t, const Vec& y) {
    return semiglobal_rhs(r, r.p_value, t, r.chi, y);
}

inline Vec partial_rhs(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    return detail::partial_form_rhs(r, par, t, chi, y).dchi;
}
inline Vec partial_rhs(const ObserverRig& r, double t, const Vec& y) {
    return partial_rhs(r, r.p_value, t, r.chi, y);
}

inline double global_parameter(const ObserverRig& r, double vhat) {
    if (!r.schedule) throw InvalidConfig("global observer needs a parameter schedule");
    return p_of_t(*r.schedule, vhat);
}

// Global filter at a given parameter value and parameter rate.
inline RhsResult global_rhs_at(const ObserverRig& r, double par, double dp, double t, const Vec& chi,
                               const Vec& y) {
    if (!r.generator) throw InvalidConfig("global observer needs the generator");
    const bool partial = detail::need_cert(r).kind == CertKind::PSI;
    RhsResult out = partial ? detail::partial_form_rhs(r, par, t, chi, y)
                            : detail::full_state_rhs(r, r.map, nullptr, par, t, chi, y);
    out.dp = dp;
    if (dp != 0.0) {
        const auto& g = *r.generator;
        const double tp = detail::need_action(r).psi_t(par, t);
        const Mat lin = generator_state_jacobian(g, tp, Vec::Zero(r.map.n));
        const Vec chisat = partial ? detail::partial_argument(r, par, t, chi, y)
                                   : saturate_in_group(*r.cert, par, chi);
        // The rate factors of the two correction terms cancel.
        out.dchi += dp * (lin * chi + g.g_x(tp, chisat) - lin * chisat);
    }
    return out;
}

// The parameter may be frozen by the caller (the integrator holds it over a
// step); D_t p is always taken from the filter derivative.
inline RhsResult global_rhs(const ObserverRig& r, double t, const Vec& chi, const Vec& y, double vhat,
                            double dvhat, std::optional<double> frozen_par = std::nullopt) {
    if (!r.schedule) throw InvalidConfig("global observer needs a parameter schedule");
    const double par = frozen_par ? *frozen_par : global_parameter(r, vhat);
    return global_rhs_at(r, par, dp_dvhat(*r.schedule, vhat) * dvhat, t, chi, y);
}
inline RhsResult global_rhs(const ObserverRig& r, double t, const Vec& y, double vhat, double dvhat) {
    return global_rhs(r, t, r.chi, y, vhat, dvhat);
}

inline Vec finite_time_rhs(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    const auto& a = detail::need_action(r);
    const double dom = a.dom_plus_t ? a.dom_plus_t(par) : kInf;
    if (t > dom - r.blowup_guard * (1.0 - 1e-6))
        throw PastBlowup("t=" + std::to_string(t) + " beyond the blow-up guard of " + std::to_string(dom));
    const double rate = detail::clock_rate(a, par, t);
    const double tp = a.psi_t(par, t);
    const Mat k = r.gains.k(tp);
    const Mat m = lin_a(r.map, tp) - k * lin_c(r.map, tp);
    return rate * (m * chi + k * a.psi_y(par, t, y));
}
inline Vec finite_time_rhs(const ObserverRig& r, double t, const Vec& y) {
    return finite_time_rhs(r, r.p_value, t, r.chi, y);
}

inline RhsResult avs_rhs(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    if (!r.pair) throw InvalidConfig("AVS observer needs an asymptotic pair");
    return detail::full_state_rhs(r, r.pair->sigma_inf, &r.map, par, t, chi, y);
}
inline RhsResult avs_rhs(const ObserverRig& r, double t, const Vec& y) {
    return avs_rhs(r, r.p_value, t, r.chi, y);
}

// High-gain baseline: row i of K scaled by gamma^(i+1), model nonlinearity
// evaluated at the estimate clamped to [-N, N].
inline Vec baseline_hgo_rhs(const ObserverRig& r, double t, const Vec& xhat, const Vec& y) {
    const SystemMap& s = r.map;
    const Vec sat = saturate(r.n_sat, xhat);
    const Vec dl = delta_l(s, t, sat, Vec::Zero(s.m));
    const Vec innov = y - (lin_c(s, t) * xhat + dl.tail(s.p));
    Vec inj = r.gains.k(t) * innov;
    for (Eigen::Index i = 0; i < inj.size(); ++i) inj(i) *= std::pow(r.gamma, double(i + 1));
    return lin_a(s, t) * xhat + dl.head(s.n) + inj;
}

// Sliding-mode baseline: row i injects gamma^(i+1) k_i sgn(Y)|Y|^((i+1)/n).
inline Vec baseline_slo_rhs(const ObserverRig& r, double t, const Vec& xhat, const Vec& y) {
    const SystemMap& s = r.map;
    if (s.p != 1) throw InvalidConfig("sliding-mode baseline supports a single output");
    const Vec sat = saturate(r.n_sat, xhat);
    const Vec dl = delta_l(s, t, sat, Vec::Zero(s.m));
    const Vec innov = detail::deadzone(y - (lin_c(s, t) * xhat + dl.tail(s.p)), r.deadzone);
    const Vec k = r.gains.k(t).col(0);
    Vec inj(s.n);
    for (int i = 0; i < s.n; ++i)
        inj(i) = std::pow(r.gamma, double(i + 1)) * k(i) * signed_pow(innov(0), double(i + 1) / s.n);
    return lin_a(s, t) * xhat + dl.head(s.n) + inj;
}
inline Vec baseline_hgo_rhs(const ObserverRig& r, double t, const Vec& y) { return baseline_hgo_rhs(r, t, r.chi, y); }
inline Vec baseline_slo_rhs(const ObserverRig& r, double t, const Vec& y) { return baseline_slo_rhs(r, t, r.chi, y); }

// Estimate in original coordinates for the parameter `par`.
inline Vec output_map(const ObserverRig& r, double par, double t, const Vec& chi, const Vec& y) {
    switch (r.variant) {
        case Variant::HGO:
        case Variant::SLO:
            return chi;
        case Variant::FiniteTime: {
            const auto& a = detail::need_action(r);
            const double tp = a.psi_t(par, t);
            return a.psi_x(-par, tp, chi);
        }
        default: break;
    }
    const auto& a = detail::need_action(r);
    const auto& cert = detail::need_cert(r);
    const double tp = a.psi_t(par, t);
    const bool partial = r.variant == Variant::PartialSI ||
                         (r.variant == Variant::Global && cert.kind == CertKind::PSI);
    const Vec arg = partial ? detail::partial_argument(r, par, t, chi, y) : saturate_in_group(cert, par, chi);
    const Vec zero_d = Vec::Zero(a.m);
    if (!in_domain(a, -par, Point{tp, arg, zero_d, Vec::Zero(a.p)}))
        throw DomainViolation("saturated filter state outside the inverse map's domain");
    Vec xhat = a.psi_x(-par, tp, arg);
    if (partial) xhat.head(r.map.p) = y;
    return xhat;
}

// A - KC of the filter in its own clock, used as the stiff linear part.
inline Mat stiff_matrix(const ObserverRig& r) {
    if (r.variant == Variant::HGO || r.variant == Variant::SLO)
        return Mat::Zero(r.map.n, r.map.n);
    const SystemMap& s = r.variant == Variant::AVS ? r.pair->sigma_inf : r.map;
    return lin_a(s, 0.0) - r.gains.k(0.0) * lin_c(s, 0.0);
}

}  // namespace symobs
