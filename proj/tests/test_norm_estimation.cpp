#include "catch_amalgamated.hpp"

#include "symobs/benchmarks.hpp"

using namespace symobs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("sine filter right-hand side", "[norm_estimation]") {
    SineData data;
    data.alpha = [](double v) { return v; };
    data.phi = [](double v) { return v; };
    const LambdaSelection sel{1.0, 0.5, 0.25};
    CHECK(sine_filter_rhs(sel, data, 4.0, 1.0, 1.0) == 0.0);
    CHECK(sine_filter_rhs(sel, data, 0.0, 1.0, 1.0) == 2.0);
    // Clamped at zero instead of going negative.
    CHECK(sine_filter_rhs(sel, data, 100.0, 0.0, 0.0) == 0.0);
}

TEST_CASE("lambda selection for a linear rate", "[norm_estimation]") {
    const ScalarFn alpha = [](double s) { return s; };
    const auto sel = select_lambda(alpha, 1.0);
    CHECK(sel.lambda1 == 0.9);
    CHECK_THAT(sel.lambda0, WithinAbs(0.5, 1e-12));
    CHECK(sel.lambda0 < alpha(sel.omega1));
}

TEST_CASE("lambda selection for a saturating rate", "[norm_estimation]") {
    const ScalarFn alpha = [](double s) { return s / (1.0 + s); };
    const auto sel = select_lambda(alpha, 1.0);
    CHECK(sel.lambda1 == 0.9);
    // Interior minimizer of (s+1)/(s+2) - 0.9 s/(1+s).
    const double r = std::sqrt(0.9);
    const double s_star = (2.0 * r - 1.0) / (1.0 - r);
    const double margin = (s_star + 1.0) / (s_star + 2.0) - 0.9 * s_star / (1.0 + s_star);
    CHECK_THAT(sel.lambda0, WithinAbs(0.5 * margin, 1e-6));
}

TEST_CASE("lambda selection rejects degenerate offsets", "[norm_estimation]") {
    const ScalarFn alpha = [](double s) { return s; };
    CHECK_THROWS_AS(select_lambda(alpha, 1e-9), NoFeasibleSelection);
    CHECK_THROWS_AS(select_lambda(alpha, 0.0), InvalidConfig);
    CHECK_THROWS_AS(select_lambda(alpha, -1.0), InvalidConfig);
}

TEST_CASE("settle time and parameter schedule", "[norm_estimation]") {
    const LambdaSelection sel{1.0, 0.5, 0.5};
    CHECK(settle_time(sel, 0.0) == 2.0);
    CHECK(settle_time(sel, 3.0) == 8.0);

    PSchedule ps;
    ps.sigma = [](double s) { return s; };
    ps.omega0 = 0.0;
    ps.n_bound = 0.0;
    ps.beta1 = [](double v) { return v; };
    ps.omega1 = 1.0;
    CHECK(p_of_t(ps, 0.0) == 1.0);
    CHECK_THAT(dp_dvhat(ps, 2.0), WithinAbs(1.0, 1e-8));

    ps.sigma = [](double s) { return s * s; };
    CHECK_THAT(dp_dvhat(ps, 1.0), WithinAbs(4.0, 1e-6));
}

TEST_CASE("Lyapunov equation", "[norm_estimation]") {
    Mat m(2, 2);
    m << 0.0, 1.0, -2.0, -3.0;
    const Mat r = Mat::Identity(2, 2);
    const Mat x = solve_lyapunov(m, r);
    CHECK((x * m + m.transpose() * x + r).norm() < 1e-12);
    CHECK((x - x.transpose()).norm() == 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> es(x);
    CHECK(es.eigenvalues().minCoeff() > 0.0);

    // Diagonal oracle: x_i = r_i / (2 |m_i|).
    Mat md = Mat::Zero(3, 3);
    md.diagonal() << -1.0, -2.0, -4.0;
    const Mat xd = solve_lyapunov(md, Mat::Identity(3, 3));
    CHECK_THAT(xd(0, 0), WithinAbs(0.5, 1e-12));
    CHECK_THAT(xd(1, 1), WithinAbs(0.25, 1e-12));
    CHECK_THAT(xd(2, 2), WithinAbs(0.125, 1e-12));
}

TEST_CASE("triangular norm estimator closed forms", "[norm_estimation]") {
    const ScalarFn tau = [](double v) { return v * v; };
    Mat q(2, 2);
    q << 2.0, 0.5, 0.5, 1.0;
    CHECK_THROWS_AS(build_sine_for_triangular(q, 0.0, 1.0, tau), InvalidBounds);
    CHECK_THROWS_AS(build_sine_for_triangular(q, 1.0, -1.0, tau), InvalidBounds);
    Mat bad = q;
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(build_sine_for_triangular(bad, 1.0, 1.0, tau), InvalidBounds);

    const SineData s = build_sine_for_triangular(q, 1.0, 2.0, tau);
    CHECK_THAT(s.alpha(1.0), WithinAbs(0.5, 1e-15));
    CHECK_THAT(s.phi(1.0), WithinAbs(2.0 * 2.0 * 2.0, 1e-15));
    CHECK(s.eta(0.0) == s.phi(0.0));
    BoxSampler smp(21);
    for (int i = 0; i < 200; ++i) {
        const Vec x = smp.uniform(Vec::Constant(2, -5.0), Vec::Constant(2, 5.0));
        CHECK(x.norm() <= s.beta1(s.v(0.0, x)) + s.beta0 + 1e-12);
        const double r = smp.uniform(0.0, 10.0);
        CHECK(s.eta(r) >= s.phi(r) - 1e-9);
    }
}

TEST_CASE("fitted dissipation gain covers its own samples", "[norm_estimation][property]") {
    const Benchmark b = bench_ex3(2);
    const auto w = [](const Vec& x) { return x.squaredNorm(); };
    const ScalarFn shape = [](double y) { return 1.0 + y * y; };
    const double ell1 = 0.5;
    const double g = fit_dissipation_gain(w, b.map, ell1, shape, b.box, 500, 3);
    CHECK(g >= 0.0);
    BoxSampler smp(3);
    for (int i = 0; i < 500; ++i) {
        const Vec x = smp.uniform(b.box.x_lo, b.box.x_hi);
        const Vec d = smp.uniform(b.box.d_lo, b.box.d_hi);
        const Vec y = b.map.h(0.0, x, d);
        const double dw = 2.0 * x.dot(b.map.f(0.0, x, d));
        CHECK(dw <= -ell1 * w(x) + g * shape(y.norm()) * (w(x) + d.squaredNorm() + y.squaredNorm()) + 1e-6);
    }
}
