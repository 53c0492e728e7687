#pragma once

#include "symobs/simulation.hpp"

#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace symobs {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kCsvFormatVersion = 1;

// ---------------------------------------------------------------------------
// Verification suites.

enum class SuiteStatus { Pass, Fail, NotClaimed };

inline const char* to_string(SuiteStatus s) {
    switch (s) {
        case SuiteStatus::Pass: return "pass";
        case SuiteStatus::Fail: return "fail";
        default: return "not claimed";
    }
}

struct SuiteResult {
    std::string suite;
    std::string subject;
    SuiteStatus status = SuiteStatus::Pass;
    double metric = 0.0;
    double tolerance = 0.0;
    int samples = 0;
    std::string detail;
};

struct VerifyReport {
    std::string benchmark;
    std::vector<SuiteResult> suites;
    bool pass() const {
        for (const auto& s : suites)
            if (s.status == SuiteStatus::Fail) return false;
        return true;
    }
};

struct VerifyOptions {
    int samples = 100;
    unsigned seed = 7;
    double axiom_tol = 1e-8;
    double symmetry_tol = 1e-6;
    double generator_tol = 1e-5;
    double prolongation_tol = 1e-5;
    std::vector<double> p_grid{0.25, 0.5, 1.0, 2.0};
};

struct ManifoldSample {
    double t;
    Vec x, d;
};

inline std::vector<ManifoldSample> draw_samples(const SampleBox& box, int n, unsigned seed) {
    BoxSampler s(seed);
    std::vector<ManifoldSample> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double t = s.uniform(box.t_lo, box.t_hi);
        Vec x = s.uniform(box.x_lo, box.x_hi);
        Vec d = s.uniform(box.d_lo, box.d_hi);
        out.push_back({t, std::move(x), std::move(d)});
    }
    return out;
}

namespace verify_detail {

inline SuiteResult bounded(std::string suite, std::string subject, double metric, double tol, int n) {
    SuiteResult r{std::move(suite), std::move(subject), SuiteStatus::Pass, metric, tol, n, {}};
    r.status = (std::isfinite(metric) && metric < tol) ? SuiteStatus::Pass : SuiteStatus::Fail;
    return r;
}

inline double relative(double residual, double scale) { return residual / std::max(1.0, scale); }

}  // namespace verify_detail

// Finite-difference transport of a solution curve through the action,
// compared with the prolonged velocity. Returns the worst relative gap.
inline double prolongation_transport_gap(const SystemMap& s, const GroupAction& a, double par,
                                         const ManifoldSample& smp, double dt = 1e-3) {
    const Vec d = smp.d;
    auto f = [&](double t, const Vec& x) { return Vec(s.f(t, x, d)); };
    const Vec xp = integrate_ode(f, smp.x, smp.t, smp.t + dt, dt / 20.0);
    const Vec xm = integrate_ode(f, smp.x, smp.t, smp.t - dt, dt / 20.0);
    const double tp = a.psi_t(par, smp.t + dt), tm = a.psi_t(par, smp.t - dt);
    const Vec fd = (a.psi_x(par, smp.t + dt, xp) - a.psi_x(par, smp.t - dt, xm)) / (tp - tm);
    const Vec pv = prolong_point(a, par, smp.t, smp.x, s.f(smp.t, smp.x, d)).second;
    return (fd - pv).norm() / std::max(1.0, pv.norm());
}

inline VerifyReport verify_benchmark(const Benchmark& b, const VerifyOptions& opt = {}) {
    using namespace verify_detail;
    VerifyReport rep;
    rep.benchmark = b.name;
    const auto samples = draw_samples(b.box, opt.samples, opt.seed);
    const std::vector<std::pair<double, double>> pairs{{0.3, -0.1}, {0.5, 0.2}, {-0.2, 0.4}, {1.0, -0.5}};

    bool any_si = false, any_psi = false;
    for (const auto& e : b.actions) {
        const SystemMap& model = e.of_target ? b.asymptotic->sigma_inf : b.map;
        std::vector<Point> pts;
        for (const auto& smp : samples) pts.push_back({smp.t, smp.x, smp.d, model.h(smp.t, smp.x, smp.d)});

        const AxiomReport ax = check_group_axioms(e.action, pts, pairs, opt.axiom_tol);
        SuiteResult r = bounded("axioms", e.label, std::max({ax.identity, ax.inversion, ax.composition}),
                                opt.axiom_tol, ax.checked);
        if (ax.checked == 0) r.status = SuiteStatus::Fail;
        r.detail = std::to_string(ax.skipped) + " pairs outside the domain";
        rep.suites.push_back(r);

        rep.suites.push_back(bounded("generator", e.label, generator_consistency(e.action, e.generator, pts, 1e-5),
                                     opt.generator_tol, int(pts.size())));

        double lie = 0.0, push = 0.0, prol = 0.0;
        int n_push = 0, n_prol = 0, skipped = 0;
        for (const auto& smp : samples) {
            const Vec y = model.h(smp.t, smp.x, smp.d);
            lie = std::max(lie, relative(lie_symmetry_residual(model, e.generator, smp.t, smp.x, smp.d),
                                         stack(model.f(smp.t, smp.x, smp.d), y).norm()));
            for (double par : opt.p_grid) {
                if (!in_domain(e.action, par, Point{smp.t, smp.x, smp.d, y})) { ++skipped; continue; }
                const auto im = transform_manifold_point(model, e.action, par, smp.t, smp.x, smp.d);
                const double scale = stack(im.x1, im.y).norm();
                push = std::max(push, relative(pushforward_residual(model, e.action, par, smp.t, smp.x, smp.d), scale));
                ++n_push;
                const double dt = 1e-4;
                if (!in_domain(e.action, par, Point{smp.t + dt, smp.x, smp.d, y}) || smp.t - dt < b.box.t_lo)
                    continue;
                prol = std::max(prol, prolongation_transport_gap(model, e.action, par, smp, dt));
                ++n_prol;
            }
        }
        rep.suites.push_back(bounded("lie", e.label, lie, opt.symmetry_tol, int(samples.size())));
        auto pr = bounded("pushforward", e.label, push, opt.symmetry_tol, n_push);
        pr.detail = std::to_string(skipped) + " parameter/sample pairs outside the domain";
        rep.suites.push_back(pr);
        rep.suites.push_back(bounded("prolongation", e.label, prol, opt.prolongation_tol, n_prol));

        if (e.cert) {
            const bool si = e.cert->kind == CertKind::SI;
            any_si = any_si || si;
            any_psi = any_psi || !si;
            const auto cr = verify_certificate(*e.cert, e.action, b.box, opt.p_grid, opt.samples, opt.seed);
            SuiteResult c{si ? "contraction-SI" : "contraction-PSI", e.label,
                          cr.pass ? SuiteStatus::Pass : SuiteStatus::Fail, cr.fraction, 1.0, cr.applicable, {}};
            c.detail = std::to_string(cr.satisfied) + "/" + std::to_string(cr.applicable) + " applicable samples hold";
            rep.suites.push_back(c);
        }
    }
    if (!any_si) rep.suites.push_back({"contraction-SI", "-", SuiteStatus::NotClaimed, 0, 0, 0, "no SI certificate shipped"});
    if (!any_psi) rep.suites.push_back({"contraction-PSI", "-", SuiteStatus::NotClaimed, 0, 0, 0, "no PSI certificate shipped"});

    if (b.sine) {
        const SineData& sd = *b.sine;
        int bad_diss = 0, bad_bound = 0, bad_gain = 0;
        for (const auto& smp : samples) {
            const Vec y = b.map.h(smp.t, smp.x, smp.d);
            const double v = sd.v(smp.t, smp.x);
            const Mat grad = fd_jacobian([&](const Vec& z) { return Vec::Constant(1, sd.v(smp.t, z)); }, smp.x);
            const double vt = fd_derivative([&](double s) { return sd.v(s, smp.x); }, smp.t);
            const double dv = vt + (grad * b.map.f(smp.t, smp.x, smp.d))(0);
            const double in_norm = stack(y, smp.d).norm();
            const double slack = 1e-6 * std::max(1.0, std::abs(dv));
            if (dv > -sd.alpha(v) + sd.phi(in_norm) + slack) ++bad_diss;
            if (smp.x.norm() > sd.beta1(v) + sd.beta0 + 1e-9) ++bad_bound;
            if (sd.eta && sd.phi(in_norm) > sd.eta(stack(smp.x, smp.d).norm()) * (1.0 + 1e-9)) ++bad_gain;
        }
        const int n = int(samples.size());
        auto mk = [&](const char* name, int bad) {
            SuiteResult r{"sine", name, bad == 0 ? SuiteStatus::Pass : SuiteStatus::Fail, double(bad), 1.0, n, {}};
            r.detail = std::to_string(bad) + " violating samples";
            return r;
        };
        rep.suites.push_back(mk("dissipation", bad_diss));
        rep.suites.push_back(mk("state-bound", bad_bound));
        rep.suites.push_back(mk("gain-bound", bad_gain));
    }

    if (b.asymptotic) {
        for (const auto& e : b.actions) {
            if (!e.cert) continue;
            int n = 0, bad_a = 0, bad_v = 0;
            double worst_a = 0.0, worst_v = 0.0;
            for (const auto& smp : samples) {
                for (double par : opt.p_grid) {
                    const auto ar = asymptotic_residual(b.map, *b.asymptotic, e.action, *e.cert, par, smp.t, smp.x, smp.d);
                    const auto vr = variational_residual(b.map, *b.asymptotic, e.action, *e.cert, par, smp.t, smp.x, smp.d);
                    ++n;
                    if (!ar.holds()) ++bad_a;
                    if (!vr.holds()) ++bad_v;
                    worst_a = std::max(worst_a, ar.lhs / std::max(ar.rhs, 1e-300));
                    worst_v = std::max(worst_v, vr.lhs / std::max(vr.rhs, 1e-300));
                }
            }
            SuiteResult a{"asymptotic", e.label, bad_a ? SuiteStatus::Fail : SuiteStatus::Pass, worst_a, 1.0, n, {}};
            a.detail = std::to_string(bad_a) + " violations; metric is the worst residual/rate ratio";
            const bool ok_v = bad_v == 0 && b.rates_certified;
            SuiteResult v{"variational", e.label, ok_v ? SuiteStatus::Pass : SuiteStatus::Fail, worst_v, 1.0, n, {}};
            v.detail = std::to_string(bad_v) + " violations; metric is the worst residual/rate ratio";
            if (!b.rates_certified) v.detail += "; " + b.rates_note;
            rep.suites.push_back(a);
            rep.suites.push_back(v);
        }
    }
    return rep;
}

inline nlohmann::json to_json(const VerifyReport& r) {
    nlohmann::json j;
    j["benchmark"] = r.benchmark;
    j["pass"] = r.pass();
    j["suites"] = nlohmann::json::array();
    for (const auto& s : r.suites) {
        j["suites"].push_back({{"suite", s.suite},
                               {"subject", s.subject},
                               {"status", to_string(s.status)},
                               {"metric", s.metric},
                               {"tolerance", s.tolerance},
                               {"samples", s.samples},
                               {"detail", s.detail}});
    }
    return j;
}

// ---------------------------------------------------------------------------
// Scenario files: one "key = value" per line, '#' starts a comment. Vector
// values are comma separated.

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(item, &used);
        } catch (const std::exception&) {
            throw InvalidConfig("not a number: '" + item + "'");
        }
        if (used != item.size()) throw InvalidConfig("not a number: '" + item + "'");
        out.push_back(x);
    }
    return out;
}

inline double parse_number(const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 1) throw InvalidConfig("expected one number, got '" + v + "'");
    return l.front();
}

inline Vec to_vec(const std::vector<double>& v) {
    return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size()));
}

// Applies one key to a scenario. Unknown keys are configuration errors.
inline void set_scenario_key(Scenario& sc, const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (key == "benchmark") sc.benchmark = v;
    else if (key == "observer") sc.observer = v;
    else if (key == "action") sc.action = v;
    else if (key == "k") sc.params.k = int(parse_number(v));
    else if (key == "gt") sc.params.gt = parse_number(v);
    else if (key == "delta") sc.params.cert.delta = parse_number(v);
    else if (key == "r1") sc.params.ex5.r1 = parse_number(v);
    else if (key == "gamma_ex5") sc.params.ex5.gamma = parse_number(v);
    else if (key == "eps" || key == "epsilon") sc.epsilon = parse_number(v);
    else if (key == "N" || key == "n_bound") sc.n_bound = parse_number(v);
    else if (key == "p0") sc.p0 = parse_number(v);
    else if (key == "p") sc.p_fixed = parse_number(v);
    else if (key == "omega0") sc.omega0 = parse_number(v);
    else if (key == "omega1") sc.omega1 = parse_number(v);
    else if (key == "poles") sc.poles = parse_list(v);
    else if (key == "gamma") sc.gamma = parse_number(v);
    else if (key == "x0") sc.x0 = to_vec(parse_list(v));
    else if (key == "chi0") sc.chi0 = to_vec(parse_list(v));
    else if (key == "vhat0") sc.vhat0 = parse_number(v);
    else if (key == "d" || key == "disturbance") sc.disturbance = v;
    else if (key == "amplitude") sc.amplitude = parse_number(v);
    else if (key == "frequency") sc.frequency = parse_number(v);
    else if (key == "phase") sc.phase = parse_number(v);
    else if (key == "noise_dt") sc.noise_dt = parse_number(v);
    else if (key == "seed") sc.seed = unsigned(parse_number(v));
    else if (key == "t_end") sc.t_end = parse_number(v);
    else if (key == "h") sc.h0 = parse_number(v);
    else if (key == "T") sc.blowup_time = parse_number(v);
    else if (key == "guard") sc.blowup_guard = parse_number(v);
    else if (key == "tail_fraction") sc.tail_fraction = parse_number(v);
    else if (key == "record_every") sc.record_every = int(parse_number(v));
    else throw InvalidConfig("unknown scenario key '" + key + "'");
}

inline Scenario parse_scenario(std::istream& in, Scenario sc = {}) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidConfig("line " + std::to_string(lineno) + ": expected key = value");
        set_scenario_key(sc, trim(line.substr(0, eq)), line.substr(eq + 1));
    }
    return sc;
}

inline Scenario load_scenario(const std::string& path, Scenario sc = {}) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open scenario file '" + path + "'");
    return parse_scenario(in, std::move(sc));
}

// The plant needs an initial condition; the default is a fixed point of
// norm 0.5 so that runs without x0 are reproducible.
inline Scenario with_default_x0(Scenario sc) {
    if (sc.x0.size() == 0) {
        const int n = make_benchmark(sc.benchmark, sc.params).map.n;
        sc.x0 = Vec::Constant(n, 0.5 / std::sqrt(double(n)));
    }
    return sc;
}

inline nlohmann::json scenario_json(const Scenario& sc) {
    auto vec = [](const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    nlohmann::json j{{"benchmark", sc.benchmark},
                     {"observer", sc.observer},
                     {"action", sc.action},
                     {"k", sc.params.k},
                     {"gt", sc.params.gt},
                     {"delta", sc.params.cert.delta},
                     {"epsilon", sc.epsilon},
                     {"n_bound", sc.n_bound},
                     {"omega1", sc.omega1},
                     {"poles", sc.poles},
                     {"gamma", sc.gamma},
                     {"x0", vec(sc.x0)},
                     {"chi0", vec(sc.chi0)},
                     {"disturbance", sc.disturbance},
                     {"amplitude", sc.amplitude},
                     {"frequency", sc.frequency},
                     {"seed", sc.seed},
                     {"t_end", sc.t_end},
                     {"h", sc.h0},
                     {"T", sc.blowup_time}};
    if (sc.p_fixed) j["p"] = *sc.p_fixed;
    return j;
}

// ---------------------------------------------------------------------------
// Trajectory export.

inline std::vector<std::string> csv_columns(int n) {
    std::vector<std::string> c{"t"};
    for (const char* block : {"x", "xhat", "chi"})
        for (int i = 1; i <= n; ++i) c.push_back(block + std::to_string(i));
    c.insert(c.end(), {"p", "vhat", "err_norm"});
    return c;
}

// Shortest round-trip decimal form so identical runs give identical bytes.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const Trajectory& tr, int n) {
    const auto cols = csv_columns(n);
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << "\n";
    for (const auto& r : tr.rows) {
        out << format_number(r.t);
        for (const Vec* v : {&r.x, &r.xhat, &r.chi})
            for (Eigen::Index i = 0; i < v->size(); ++i) out << ',' << format_number((*v)(i));
        out << ',' << format_number(r.p) << ',' << format_number(r.vhat) << ',' << format_number(r.err) << "\n";
    }
}

struct RunSummary {
    double p = 0.0;
    double omega = 0.0;
    double error_bound = 0.0;
    double limsup_error = 0.0;
    bool within_bound = false;
    bool diverged = false;
    std::string stop_reason;
};

inline nlohmann::json to_json(const RunSummary& s) {
    return {{"p", s.p},
            {"omega", s.omega},
            {"error_bound", s.error_bound},
            {"limsup_error", s.limsup_error},
            {"within_bound", s.within_bound},
            {"diverged", s.diverged},
            {"stop_reason", s.stop_reason}};
}

inline nlohmann::json trajectory_json(const Scenario& sc, const RunSummary& s, const Trajectory& tr, int n) {
    nlohmann::json j;
    j["metadata"] = {{"tool", "symobs"},
                     {"version", kToolVersion},
                     {"format_version", kCsvFormatVersion},
                     {"config", scenario_json(sc)},
                     {"tuned", to_json(s)}};
    j["columns"] = csv_columns(n);
    j["rows"] = nlohmann::json::array();
    for (const auto& r : tr.rows) {
        std::vector<double> row{r.t};
        for (const Vec* v : {&r.x, &r.xhat, &r.chi}) row.insert(row.end(), v->data(), v->data() + v->size());
        row.insert(row.end(), {r.p, r.vhat, r.err});
        j["rows"].push_back(row);
    }
    return j;
}

// Absolute slack when comparing a finite-horizon tail against the
// asymptotic bound, which is 0 for a vanishing disturbance.
inline constexpr double kBoundSlack = 1e-3;

struct RunOutput {
    Trajectory trajectory;
    RunSummary summary;
    int n = 0;
};

inline RunOutput run_scenario(const Scenario& sc_in) {
    const Scenario sc = with_default_x0(sc_in);
    ObserverRig rig = assemble_rig(sc);
    RunOutput out;
    out.n = rig.map.n;
    const double p = rig.p_value;
    out.trajectory = integrate(sc, rig);
    out.trajectory.error_bound = scenario_error_bound(rig, sc);
    RunSummary& s = out.summary;
    s.p = p;
    s.omega = rig.tuning.omega;
    s.error_bound = out.trajectory.error_bound;
    s.limsup_error = out.trajectory.rows.empty() ? kInf : limsup_error(out.trajectory, sc.tail_fraction);
    s.diverged = out.trajectory.diverged;
    s.stop_reason = out.trajectory.stop_reason;
    s.within_bound = !s.diverged && s.limsup_error <= s.error_bound + kBoundSlack;
    return out;
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepRow {
    int index = 0;
    double value = 0.0;
    RunSummary summary;
};

inline void apply_axis(Scenario& sc, const std::string& axis, double v) {
    if (axis == "eps") sc.epsilon = v;
    else if (axis == "N") sc.n_bound = v;
    else if (axis == "amplitude") {
        sc.amplitude = v;
        if (sc.disturbance == "zero") sc.disturbance = "sinusoid";
    } else if (axis == "gamma") sc.gamma = v;
    else throw InvalidConfig("unknown sweep axis '" + axis + "' (eps, N, amplitude, gamma)");
}

inline std::vector<SweepRow> run_sweep(const Scenario& base, const std::string& axis, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidConfig("empty sweep grid");
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Scenario sc = base;
        apply_axis(sc, axis, grid[i]);
        rows.push_back({int(i), grid[i], run_scenario(sc).summary});
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& out, const std::string& axis, const std::vector<SweepRow>& rows) {
    out << "index," << axis << ",p,error_bound,limsup_error,within_bound,diverged\n";
    for (const auto& r : rows) {
        out << r.index << ',' << format_number(r.value) << ',' << format_number(r.summary.p) << ','
            << format_number(r.summary.error_bound) << ',' << format_number(r.summary.limsup_error) << ','
            << (r.summary.within_bound ? 1 : 0) << ',' << (r.summary.diverged ? 1 : 0) << "\n";
    }
}

// ---------------------------------------------------------------------------
// Listing.

inline nlohmann::json list_json() {
    nlohmann::json j;
    j["observers"] = {"semiglobal", "partial", "global", "finite-time", "avs", "hgo", "slo"};
    j["disturbances"] = {"zero", "constant", "sinusoid", "noise"};
    j["benchmarks"] = nlohmann::json::array();
    for (const auto& name : benchmark_names()) {
        const Benchmark b = make_benchmark(name);
        nlohmann::json e{{"name", name}, {"n", b.map.n}, {"m", b.map.m}, {"p", b.map.p},
                         {"norm_estimator", b.sine.has_value()}, {"asymptotic", b.asymptotic.has_value()}};
        e["actions"] = nlohmann::json::array();
        for (const auto& a : b.actions) {
            nlohmann::json ja{{"label", a.label}, {"time_scale", to_string(a.expected_class)}};
            if (a.cert) ja["certificate"] = a.cert->kind == CertKind::SI ? "SI" : "PSI";
            e["actions"].push_back(ja);
        }
        j["benchmarks"].push_back(e);
    }
    return j;
}

// Output directory: explicit flag, then SYMOBS_OUT_DIR, then ".".
inline std::string resolve_output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SYMOBS_OUT_DIR"); env && *env) return env;
    return ".";
}

}  // namespace symobs
