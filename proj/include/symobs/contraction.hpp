#pragma once

#include "symobs/transform_groups.hpp"

#include <random>

namespace symobs {

// Componentwise clamp to [-c, c].
inline Vec saturate(double c, const Vec& v) {
    if (!(c > 0.0)) throw NonPositiveBound("saturation level must be positive");
    return v.cwiseMax(-c).cwiseMin(c);
}

inline double saturate(double c, double v) {
    if (!(c > 0.0)) throw NonPositiveBound("saturation level must be positive");
    return std::clamp(v, -c, c);
}

// Diagonal, parameter-monotone scalings acting on the certified components.
// index_x / index_d select which components of (x_p, d_p) are certified; for
// a full-state certificate they cover every index.
struct DiagonalGroup {
    std::function<Vec(double)> gamma_x;
    std::function<Vec(double)> gamma_d;
    std::vector<int> index_x, index_d;
};

inline DiagonalGroup identity_group(int n, int m) {
    DiagonalGroup g;
    for (int i = 0; i < n; ++i) g.index_x.push_back(i);
    for (int j = 0; j < m; ++j) g.index_d.push_back(j);
    g.gamma_x = [n](double) { return Vec::Ones(n); };
    g.gamma_d = [m](double) { return Vec::Ones(m); };
    return g;
}

enum class CertKind { SI, PSI };

struct ContractionCertificate {
    std::function<double(double)> sigma;  // class K-infinity
    std::function<double(double)> mu;     // class L
    DiagonalGroup group;
    CertKind kind = CertKind::SI;
};

inline Vec select(const Vec& v, const std::vector<int>& idx) {
    Vec out(idx.size());
    for (size_t i = 0; i < idx.size(); ++i) out(i) = v(idx[i]);
    return out;
}

// Full-state version of chi_sat = Gamma_{-p} sat_{mu(p)}(Gamma_p chi) on the
// certified state indices; uncertified components pass through untouched.
inline Vec saturate_in_group(const ContractionCertificate& cert, double par, const Vec& chi) {
    Vec out = chi;
    const Vec g = cert.group.gamma_x(par);
    const double level = cert.mu(par);
    for (size_t i = 0; i < cert.group.index_x.size(); ++i) {
        const int k = cert.group.index_x[i];
        out(k) = saturate(level, g(i) * chi(k)) / g(i);
    }
    return out;
}

struct ContractionSample {
    double lhs = 0.0, rhs = 0.0;
    bool satisfied = false, applicable = false;
};

inline ContractionSample contraction_residual(const ContractionCertificate& cert,
                                              const GroupAction& a, double par, double t,
                                              const Vec& x, const Vec& d) {
    ContractionSample s;
    const double nrm = stack(x, d).norm();
    Point pt{t, x, d, Vec::Zero(a.p)};
    s.applicable = par >= cert.sigma(nrm) && in_domain(a, par, pt);
    if (!s.applicable) return s;
    const Vec xp = a.psi_x(par, t, x);
    const Vec dp = a.psi_d(par, t, x, d);
    const Vec gx = cert.group.gamma_x(par).cwiseProduct(select(xp, cert.group.index_x));
    const Vec gd = cert.group.gamma_d(par).cwiseProduct(select(dp, cert.group.index_d));
    s.lhs = stack(gx, gd).norm();
    s.rhs = cert.mu(par);
    s.satisfied = s.lhs <= s.rhs;
    return s;
}

struct SampleBox {
    double t_lo = 0.0, t_hi = 5.0;
    Vec x_lo, x_hi, d_lo, d_hi;
};

inline SampleBox make_box(int n, int m, double xr = 3.0, double dr = 2.0, double t_hi = 5.0) {
    return {0.0, t_hi, Vec::Constant(n, -xr), Vec::Constant(n, xr), Vec::Constant(m, -dr),
            Vec::Constant(m, dr)};
}

// Uniform draws in a box from a seeded engine.
struct BoxSampler {
    explicit BoxSampler(unsigned seed) : rng(seed) {}
    std::mt19937_64 rng;
    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
    Vec uniform(const Vec& lo, const Vec& hi) {
        Vec v(lo.size());
        for (Eigen::Index i = 0; i < lo.size(); ++i) v(i) = uniform(lo(i), hi(i));
        return v;
    }
};

struct CertificateWitness {
    double par, t;
    Vec x, d;
    double lhs, rhs;
};

struct CertificateReport {
    int applicable = 0, satisfied = 0, not_applicable = 0;
    double fraction = 0.0;
    bool pass = false;
    std::vector<CertificateWitness> witnesses;
};

// Each sample is tested at the threshold parameter sigma(|(x,d)|) and at every
// grid parameter.
inline CertificateReport verify_certificate(const ContractionCertificate& cert,
                                            const GroupAction& a, const SampleBox& box,
                                            const std::vector<double>& p_grid, int n_samples,
                                            unsigned seed = 7) {
    CertificateReport r;
    BoxSampler s(seed);
    for (int i = 0; i < n_samples; ++i) {
        const double t = s.uniform(box.t_lo, box.t_hi);
        const Vec x = s.uniform(box.x_lo, box.x_hi);
        const Vec d = s.uniform(box.d_lo, box.d_hi);
        std::vector<double> pars = p_grid;
        pars.push_back(cert.sigma(stack(x, d).norm()));
        for (double par : pars) {
            const auto c = contraction_residual(cert, a, par, t, x, d);
            if (!c.applicable) { ++r.not_applicable; continue; }
            ++r.applicable;
            if (c.satisfied) ++r.satisfied;
            else if (r.witnesses.size() < 16) r.witnesses.push_back({par, t, x, d, c.lhs, c.rhs});
        }
    }
    r.fraction = r.applicable ? double(r.satisfied) / r.applicable : 0.0;
    r.pass = r.applicable > 0 && r.satisfied == r.applicable;
    return r;
}

struct DiagonalGroupReport {
    double identity = 0.0, composition = 0.0;
    bool monotone = true;
};

inline DiagonalGroupReport check_diagonal_group(const DiagonalGroup& g,
                                                const std::vector<double>& p_grid) {
    DiagonalGroupReport r;
    auto both = [&](double par) { return stack(g.gamma_x(par), g.gamma_d(par)); };
    const Vec e0 = both(0.0);
    r.identity = (e0 - Vec::Ones(e0.size())).cwiseAbs().maxCoeff();
    for (size_t i = 0; i < p_grid.size(); ++i) {
        for (size_t j = 0; j < p_grid.size(); ++j) {
            const Vec prod = both(p_grid[i]).cwiseProduct(both(p_grid[j]));
            const Vec sum = both(p_grid[i] + p_grid[j]);
            r.composition = std::max(
                r.composition, ((prod - sum).cwiseAbs().array() / sum.cwiseAbs().array().max(1.0)).maxCoeff());
            if (p_grid[i] <= p_grid[j] && (both(p_grid[i]).array() > both(p_grid[j]).array()).any())
                r.monotone = false;
        }
    }
    return r;
}

// Grid predicates for the comparison-function classes. Each samples 1000
// points on [0, s_max].
namespace classes {

inline std::vector<double> grid(double s_max, int n = 1000) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = s_max * i / (n - 1);
    return g;
}

inline bool strictly_increasing(const std::function<double(double)>& f, double s_max) {
    const auto g = grid(s_max);
    for (size_t i = 1; i < g.size(); ++i)
        if (!(f(g[i]) > f(g[i - 1]))) return false;
    return true;
}

inline bool is_K(const std::function<double(double)>& f, double s_max) {
    return std::abs(f(0.0)) < 1e-12 && strictly_increasing(f, s_max);
}

// Positive at zero and increasing.
inline bool is_K_plus(const std::function<double(double)>& f, double s_max) {
    return f(0.0) > 0.0 && strictly_increasing(f, s_max);
}

// Non-increasing and small at the end of the grid.
inline bool is_L(const std::function<double(double)>& f, double s_max, double tail = 1e-3) {
    const auto g = grid(s_max);
    for (size_t i = 1; i < g.size(); ++i)
        if (f(g[i]) > f(g[i - 1])) return false;
    return f(0.0) > 0.0 && f(s_max) < tail * f(0.0);
}

}  // namespace classes

}  // namespace symobs
