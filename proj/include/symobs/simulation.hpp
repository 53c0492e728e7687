#pragma once

#include "symobs/benchmarks.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <array>
#include <complex>

namespace symobs {

// ---------------------------------------------------------------------------
// Exponential fourth-order Runge-Kutta (Cox-Matthews) for u' = L u + N(s, u).
// With L = 0 the coefficients reduce exactly to classical RK4.

struct PhiCoefficients {
    Mat e, e_half, q_half, f1, f2, f3;
};

// Scalar phi_0..phi_3 by a Taylor series near zero and the recurrence
// phi_{k+1}(z) = (phi_k(z) - 1/k!) / z elsewhere.
inline std::array<std::complex<double>, 4> scalar_phi(std::complex<double> z) {
    using C = std::complex<double>;
    std::array<C, 4> out;
    if (std::abs(z) < 0.5) {
        for (int k = 0; k < 4; ++k) {
            C sum = 0.0, term = 1.0;
            double fact = 1.0;
            for (int i = 1; i <= k; ++i) fact *= i;
            term = 1.0 / fact;
            for (int j = 0; j < 25; ++j) {
                sum += term;
                term *= z / double(j + k + 1);
            }
            out[k] = sum;
        }
        return out;
    }
    out[0] = std::exp(z);
    out[1] = (out[0] - 1.0) / z;
    out[2] = (out[1] - 1.0) / z;
    out[3] = (out[2] - 0.5) / z;
    return out;
}

// phi_0..phi_3 of X. Diagonalizable X with well-conditioned eigenvectors go
// through the spectrum, which stays accurate for |X| far beyond what scaling
// and squaring tolerates. Otherwise one exponential of the augmented block
// matrix is used.
inline std::array<Mat, 4> phi_functions(const Mat& x) {
    const Eigen::Index q = x.rows();
    Eigen::ComplexEigenSolver<Mat> es(x);
    if (es.info() == Eigen::Success) {
        const Eigen::MatrixXcd v = es.eigenvectors();
        Eigen::PartialPivLU<Eigen::MatrixXcd> lu(v);
        const double cond = v.norm() * lu.inverse().norm();
        if (std::isfinite(cond) && cond < 1e6) {
            const Eigen::MatrixXcd vinv = lu.inverse();
            std::array<Mat, 4> out;
            std::array<Eigen::VectorXcd, 4> d;
            for (auto& di : d) di.resize(q);
            for (Eigen::Index i = 0; i < q; ++i) {
                const auto ph = scalar_phi(es.eigenvalues()(i));
                for (int k = 0; k < 4; ++k) d[k](i) = ph[k];
            }
            for (int k = 0; k < 4; ++k) out[k] = (v * d[k].asDiagonal() * vinv).real();
            return out;
        }
    }
    Mat aug = Mat::Zero(4 * q, 4 * q);
    aug.topLeftCorner(q, q) = x;
    for (int i = 0; i < 3; ++i) aug.block(i * q, (i + 1) * q, q, q) = Mat::Identity(q, q);
    const Mat ex = aug.exp();
    return {ex.block(0, 0, q, q), ex.block(0, q, q, q), ex.block(0, 2 * q, q, q), ex.block(0, 3 * q, q, q)};
}

inline PhiCoefficients etd_coefficients(const Mat& lin, double dt) {
    PhiCoefficients c;
    const auto full = phi_functions(lin * dt);
    const auto half = phi_functions(lin * (0.5 * dt));
    c.e = full[0];
    c.e_half = half[0];
    c.q_half = 0.5 * dt * half[1];
    c.f1 = dt * (full[1] - 3.0 * full[2] + 4.0 * full[3]);
    c.f2 = dt * (full[2] - 2.0 * full[3]);
    c.f3 = dt * (4.0 * full[3] - full[2]);
    return c;
}

using Nonlinear = std::function<Vec(double s, const Vec& u)>;

inline Vec etdrk4_step(const PhiCoefficients& c, const Nonlinear& n, double s, double ds, const Vec& u) {
    const Vec nu = n(s, u);
    const Vec a = c.e_half * u + c.q_half * nu;
    const Vec na = n(s + 0.5 * ds, a);
    const Vec b = c.e_half * u + c.q_half * na;
    const Vec nb = n(s + 0.5 * ds, b);
    const Vec cc = c.e_half * a + c.q_half * (2.0 * nb - nu);
    const Vec nc = n(s + ds, cc);
    return c.e * u + c.f1 * nu + 2.0 * c.f2 * (na + nb) + c.f3 * nc;
}

// Plain fixed-step RK4 for u' = f(t, u) on [t0, t1].
inline Vec integrate_ode(const std::function<Vec(double, const Vec&)>& f, const Vec& u0, double t0,
                         double t1, double h) {
    if (!(h > 0.0)) throw InvalidConfig("step must be positive");
    const int steps = std::max(1, int(std::ceil((t1 - t0) / h - 1e-9)));
    const double dt = (t1 - t0) / steps;
    const PhiCoefficients c = etd_coefficients(Mat::Zero(u0.size(), u0.size()), dt);
    Vec u = u0;
    for (int i = 0; i < steps; ++i) u = etdrk4_step(c, f, t0 + i * dt, dt, u);
    return u;
}

// ---------------------------------------------------------------------------
// Scenarios.

struct Scenario {
    std::string benchmark = "ex3";
    std::string observer = "semiglobal";
    std::string action;  // empty: benchmark default
    BenchmarkParams params;
    double epsilon = 0.1, n_bound = 1.0, p0 = 0.0;
    std::optional<double> p_fixed;
    double omega0 = 0.0;  // global observer; 0 selects it by tuning
    double omega1 = 1.0;
    std::vector<double> poles{-1.0, -2.0};
    double gamma = 5.0;
    Vec x0, chi0;
    double vhat0 = 0.0;
    std::string disturbance = "zero";
    double amplitude = 0.0, frequency = 2.0, phase = 0.0, noise_dt = 0.01;
    unsigned seed = 1;
    double t_end = 2.0, h0 = 1e-3;
    double blowup_time = 1.0;  // finite-time observer: T, with p = 1/T
    double blowup_guard = 1e-6;
    double tail_fraction = 0.2;
    double divergence_threshold = 1e9;
    int record_every = 1;
};

inline DisturbanceFn make_disturbance(const Scenario& sc, int m) {
    const double amp = sc.amplitude;
    if (sc.disturbance == "zero") return [m](double) { return Vec::Zero(m); };
    if (sc.disturbance == "constant") return [m, amp](double) { return Vec::Constant(m, amp); };
    if (sc.disturbance == "sinusoid") {
        const double w = sc.frequency, ph = sc.phase;
        return [m, amp, w, ph](double t) { return Vec::Constant(m, amp * std::sin(w * t + ph)); };
    }
    if (sc.disturbance == "noise") {
        if (!(sc.noise_dt > 0.0)) throw InvalidConfig("noise_dt must be positive");
        const double dt = sc.noise_dt;
        const unsigned seed = sc.seed;
        // Piecewise constant on buckets of width dt; each bucket has its own
        // deterministic stream so the value depends on t only.
        return [m, amp, dt, seed](double t) {
            const auto bucket = static_cast<unsigned long long>(std::max(0.0, std::floor(t / dt)));
            std::seed_seq seq{seed, static_cast<unsigned>(bucket & 0xffffffffu), static_cast<unsigned>(bucket >> 32)};
            std::mt19937_64 rng(seq);
            std::uniform_real_distribution<double> u(-amp, amp);
            Vec v(m);
            for (int i = 0; i < m; ++i) v(i) = u(rng);
            return v;
        };
    }
    throw InvalidConfig("unknown disturbance profile '" + sc.disturbance + "'");
}

inline double disturbance_sup(const Scenario& sc) {
    return sc.disturbance == "zero" ? 0.0 : std::abs(sc.amplitude);
}

namespace sim_detail {
inline std::string default_action(const std::string& bench, Variant v) {
    if (bench == "ex1") return v == Variant::Semiglobal ? "psi0" : "psi0_alt";
    return "";
}
}  // namespace sim_detail

// Builds the observer for a scenario, running the tuning where needed.
inline ObserverRig assemble_rig(const Scenario& sc) {
    if (!(sc.h0 > 0.0)) throw InvalidConfig("h0 must be positive");
    if (!(sc.t_end > 0.0)) throw InvalidConfig("horizon must be positive");
    ObserverRig r;
    r.variant = parse_variant(sc.observer);
    Benchmark b = make_benchmark(sc.benchmark, sc.params);
    if (r.variant == Variant::Global) {
        BenchmarkParams gp = sc.params;
        gp.cert.phi = b.global_phi;
        b = make_benchmark(sc.benchmark, gp);
    }
    r.map = b.map;
    r.chi = sc.chi0.size() ? sc.chi0 : Vec(Vec::Zero(b.map.n));
    if (r.chi.size() != b.map.n) throw InvalidConfig("chi0 has the wrong dimension");
    r.blowup_guard = sc.blowup_guard;

    if (r.variant == Variant::HGO || r.variant == Variant::SLO) {
        if (!(sc.gamma > 0.0)) throw InvalidConfig("gamma must be positive");
        r.gains = build_gains(b.map, sc.poles, sc.t_end);
        r.gamma = sc.gamma;
        r.n_sat = sc.n_bound;
        return r;
    }

    std::string label = sc.action.empty() ? sim_detail::default_action(sc.benchmark, r.variant) : sc.action;
    const SymmetryEntry& e = label.empty() ? b.actions.front() : b.entry(label);
    r.action = e.action;
    r.cert = e.cert;
    r.generator = e.generator;

    if (r.variant == Variant::AVS) {
        if (!b.asymptotic) throw InvalidConfig("benchmark " + b.name + " has no asymptotic pair");
        r.pair = b.asymptotic;
    }
    const SystemMap& model = r.variant == Variant::AVS ? r.pair->sigma_inf : b.map;
    r.gains = build_gains(model, sc.poles, sc.t_end);

    if (r.variant == Variant::FiniteTime) {
        if (!(sc.blowup_time > 0.0)) throw InvalidConfig("blow-up time must be positive");
        r.p_value = sc.p_fixed ? *sc.p_fixed : 1.0 / sc.blowup_time;
        r.tuning.p_star = r.p_value;
        r.tuning.pi1_0 = e.pi1 ? e.pi1(0.0) : 1.0;
        r.tuning.pi3 = e.pi3;
        r.tuning.epsilon = sc.epsilon;
        return r;
    }
    if (!r.cert) throw InvalidConfig("action '" + e.label + "' carries no certificate");

    auto pi1 = e.pi1 ? e.pi1 : ScalarFn([](double s) { return 1.0 + s; });
    auto pi2 = e.pi2 ? e.pi2 : ScalarFn([](double s) { return std::exp(-s); });
    TuningOptions opt;
    if (r.variant == Variant::AVS) {
        const auto pair = *r.pair;
        const auto cert = *r.cert;
        const double k = r.gains.sup_k;
        const int nm = model.n + model.m;
        opt.extra_phi = [pair, cert, k, nm](double par) { return (1.0 + k) * pair.lambda(nm * cert.mu(par), par); };
    }
    if (sc.p_fixed && r.variant != Variant::Global) {
        r.p_value = *sc.p_fixed;
        r.tuning.p_star = r.p_value;
        r.tuning.pi1_0 = pi1(0.0);
        r.tuning.epsilon = sc.epsilon;
        r.tuning.pi3 = e.pi3;
    } else {
        r.tuning = tune_p(*r.cert, r.gains, model, pi1, pi2, sc.epsilon, sc.n_bound, sc.p0, opt);
        r.tuning.pi3 = e.pi3 ? e.pi3 : r.tuning.pi3;
        r.p_value = r.tuning.p_star;
    }

    if (r.variant == Variant::Global) {
        if (!b.sine) throw InvalidConfig("benchmark " + b.name + " has no norm estimator");
        r.sine = b.sine;
        r.lambda = select_lambda(b.sine->alpha, sc.omega1);
        PSchedule ps;
        ps.sigma = r.cert->sigma;
        ps.omega0 = sc.omega0 > 0.0 ? sc.omega0 : r.tuning.omega;
        ps.n_bound = sc.n_bound;
        ps.beta1 = b.sine->beta1;
        ps.omega1 = sc.omega1;
        ps.vhat0 = sc.vhat0;
        r.schedule = ps;
        r.p_value = p_of_t(ps, sc.vhat0);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Trajectories.

struct TrajectoryRow {
    double t = 0.0;
    Vec x, xhat, chi;
    double p = 0.0, vhat = 0.0, err = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryRow> rows;
    bool diverged = false;
    std::string stop_reason = "horizon";
    double error_bound = kInf;
};

namespace sim_detail {

inline bool has_clock(Variant v) { return v != Variant::HGO && v != Variant::SLO; }

// Cubic Hermite interpolant of the plant over one step.
struct PlantStep {
    double t0 = 0.0, h = 0.0;
    Vec x0, x1, f0, f1;
    Vec at(double t) const {
        if (h == 0.0) return x0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * f0 + (-2 * s3 + 3 * s2) * x1 +
               (s3 - s2) * h * f1;
    }
};

}  // namespace sim_detail

// Integrates plant, observer and (for the global observer) the norm
// estimator. The plant does not depend on the observer, so it is stepped in
// physical time by RK4; the observer is stepped by ETDRK4 in its own clock
// t -> Psi^t_p(t) with the filter's A - KC as the exact linear part, reading
// the plant from a cubic Hermite interpolant of the current step.
inline Trajectory integrate(const Scenario& sc, ObserverRig& rig) {
    using namespace sim_detail;
    const SystemMap& plant = rig.map;
    const int n = plant.n, nc = int(rig.chi.size());
    const bool filter = rig.variant == Variant::Global;
    const int nw = nc + (filter ? 1 : 0);
    const DisturbanceFn dist = make_disturbance(sc, plant.m);
    if (sc.x0.size() != n) throw InvalidConfig("x0 has the wrong dimension");
    const bool clocked = has_clock(rig.variant);

    Mat lin = Mat::Zero(nw, nw);
    if (clocked) lin.topLeftCorner(nc, nc) = stiff_matrix(rig);
    const PhiCoefficients plant_coef = etd_coefficients(Mat::Zero(n, n), 1.0);

    auto parameter = [&](double vhat) {
        return rig.variant == Variant::Global ? global_parameter(rig, vhat) : rig.p_value;
    };
    auto plant_rhs = [&](double t, const Vec& x) { return Vec(plant.f(t, x, dist(t))); };

    // Observer right-hand side in physical time.
    auto observer_rhs = [&](double t, const Vec& x, const Vec& w, double par) {
        const Vec chi = w.head(nc);
        const Vec y = plant.h(t, x, dist(t));
        Vec dw(nw);
        switch (rig.variant) {
            case Variant::Semiglobal: dw.head(nc) = semiglobal_rhs(rig, par, t, chi, y).dchi; break;
            case Variant::PartialSI: dw.head(nc) = partial_rhs(rig, par, t, chi, y); break;
            case Variant::FiniteTime: dw.head(nc) = finite_time_rhs(rig, par, t, chi, y); break;
            case Variant::AVS: dw.head(nc) = avs_rhs(rig, par, t, chi, y).dchi; break;
            case Variant::HGO: dw.head(nc) = baseline_hgo_rhs(rig, t, chi, y); break;
            case Variant::SLO: dw.head(nc) = baseline_slo_rhs(rig, t, chi, y); break;
            case Variant::Global: {
                const double vhat = w(nc);
                const double dv = sine_filter_rhs(rig.lambda, *rig.sine, vhat, y.norm(), rig.schedule->n_bound);
                dw.head(nc) = global_rhs(rig, t, chi, y, vhat, dv, par).dchi;
                dw(nc) = dv;
                break;
            }
        }
        return dw;
    };

    Trajectory tr;
    auto record = [&](double t, const Vec& x, const Vec& w) {
        TrajectoryRow row;
        row.t = t;
        row.x = x;
        row.chi = w.head(nc);
        row.vhat = filter ? w(nc) : 0.0;
        row.p = clocked ? parameter(row.vhat) : 0.0;
        const Vec y = plant.h(t, x, dist(t));
        row.xhat = output_map(rig, row.p, t, row.chi, y);
        row.err = (row.x - row.xhat).norm();
        tr.rows.push_back(std::move(row));
    };

    Vec x = sc.x0;
    Vec w(nw);
    w.head(nc) = rig.chi;
    if (filter) w(nc) = sc.vhat0;

    double t_stop = sc.t_end;
    double dom = kInf;
    if (rig.variant == Variant::FiniteTime) {
        dom = rig.action->dom_plus_t(rig.p_value);
        t_stop = std::min(t_stop, dom - sc.blowup_guard);
    }

    double t = 0.0;
    record(t, x, w);
    PhiCoefficients coef;
    double cached_dtheta = std::numeric_limits<double>::quiet_NaN();
    int step = 0;
    auto stop = [&](std::string why) {
        tr.diverged = true;
        tr.stop_reason = std::move(why);
    };
    while (t < t_stop) {
        double h = std::min(sc.h0, t_stop - t);
        if (std::isfinite(dom)) h = std::min(h, 0.1 * (dom - t));
        if (t_stop - (t + h) < 1e-12 * std::max(1.0, t_stop)) h = t_stop - t;
        const double t_next = (h == t_stop - t) ? t_stop : t + h;
        h = t_next - t;

        // Plant step in physical time.
        PlantStep ps;
        ps.t0 = t;
        ps.h = h;
        ps.x0 = x;
        ps.f0 = plant_rhs(t, x);
        PhiCoefficients pc = plant_coef;
        pc.q_half *= h;
        pc.f1 *= h;
        pc.f2 *= h;
        pc.f3 *= h;
        ps.x1 = etdrk4_step(pc, plant_rhs, t, h, x);
        ps.f1 = plant_rhs(t_next, ps.x1);

        // Observer step in its own clock.
        const double par = clocked ? parameter(filter ? w(nc) : 0.0) : 0.0;
        std::function<double(double)> to_t = [](double s) { return s; };
        std::function<double(double)> rate = [](double) { return 1.0; };
        double theta0 = t, theta1 = t_next;
        if (clocked) {
            const GroupAction& a = *rig.action;
            theta0 = a.psi_t(par, t);
            theta1 = a.psi_t(par, t_next);
            // The end point is pinned to t_next so rounding never crosses the
            // blow-up guard.
            to_t = [&a, par, theta1, t_next](double s) { return s == theta1 ? t_next : a.psi_t(-par, s); };
            rate = [&a, par](double tt) { return time_jacobian(a, par, tt); };
        }
        const double dtheta = theta1 - theta0;
        if (!(dtheta > 0.0) || !std::isfinite(dtheta)) {
            stop("clock overflow at t=" + std::to_string(t));
            break;
        }
        if (dtheta != cached_dtheta) {
            coef = etd_coefficients(lin, dtheta);
            cached_dtheta = dtheta;
        }
        const Nonlinear nl = [&](double s, const Vec& u) {
            const double tt = std::clamp(to_t(s), t, t_next);
            return Vec(observer_rhs(tt, ps.at(tt), u, par) / rate(tt) - lin * u);
        };
        Vec w_next;
        try {
            w_next = etdrk4_step(coef, nl, theta0, dtheta, w);
        } catch (const DomainViolation& ex) {
            stop(ex.what());
            break;
        }
        const double thr = sc.divergence_threshold;
        if (!w_next.allFinite() || !ps.x1.allFinite() || w_next.lpNorm<Eigen::Infinity>() > thr ||
            ps.x1.lpNorm<Eigen::Infinity>() > thr) {
            stop("divergence at t=" + std::to_string(t_next));
            break;
        }
        x = ps.x1;
        w = w_next;
        t = t_next;
        ++step;
        if (step % std::max(1, sc.record_every) == 0 || t >= t_stop) {
            try {
                record(t, x, w);
            } catch (const Error& ex) {
                stop(ex.what());
                break;
            }
            if (!tr.rows.back().xhat.allFinite()) {
                stop("non-finite estimate at t=" + std::to_string(t));
                break;
            }
        }
    }
    rig.chi = w.head(nc);
    return tr;
}

// Steady-state error bound of a tuned rig for the scenario's disturbance
// level; 0 for the baselines, which carry no bound.
inline double scenario_error_bound(const ObserverRig& rig, const Scenario& sc) {
    if (rig.variant == Variant::HGO || rig.variant == Variant::SLO || !rig.tuning.pi3) return 0.0;
    GainSchedule g = rig.gains;
    if (rig.variant == Variant::PartialSI) g.sup_d = 0.0;
    return error_bound(g, rig.tuning.pi1_0, rig.tuning.pi3, disturbance_sup(sc), sc.epsilon);
}

inline Trajectory integrate(const Scenario& sc) {
    ObserverRig rig = assemble_rig(sc);
    Trajectory tr = integrate(sc, rig);
    tr.error_bound = scenario_error_bound(rig, sc);
    return tr;
}

// Max error over the final fraction of the time span.
inline double limsup_error(const Trajectory& tr, double tail_fraction = 0.2) {
    if (tr.rows.empty()) return kInf;
    const double t0 = tr.rows.front().t, t1 = tr.rows.back().t;
    const double from = t1 - tail_fraction * (t1 - t0);
    double worst = 0.0;
    for (const auto& r : tr.rows)
        if (r.t >= from - 1e-12 * std::max(1.0, std::abs(t1))) worst = std::max(worst, r.err);
    return worst;
}

struct EnvelopeReport {
    bool holds = true;
    double settle = 0.0;
    int violations = 0, pre_settle_violations = 0;
    std::optional<double> first_violation;
};

inline EnvelopeReport check_sine_envelope(const Trajectory& tr, const SineData& sine,
                                          const LambdaSelection& sel, double omega1) {
    EnvelopeReport rep;
    if (tr.rows.empty()) return rep;
    const auto& r0 = tr.rows.front();
    rep.settle = sel.lambda0 > 0.0 ? (sine.v(r0.t, r0.x) + omega1) / sel.lambda0 : kInf;
    for (const auto& r : tr.rows) {
        const bool ok = sine.v(r.t, r.x) <= r.vhat + omega1;
        if (ok) continue;
        if (r.t < rep.settle) {
            ++rep.pre_settle_violations;
            continue;
        }
        ++rep.violations;
        if (!rep.first_violation) rep.first_violation = r.t;
        rep.holds = false;
    }
    return rep;
}

}  // namespace symobs
