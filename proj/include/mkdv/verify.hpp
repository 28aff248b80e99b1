#ifndef MKDV_VERIFY_HPP
#define MKDV_VERIFY_HPP

// Named check suites over the library's identity, order and trend properties.
// Each check carries its measured residual and threshold so reports can be
// emitted verbatim; the CLI and the acceptance runner both build on these.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "asymptotics.hpp"
#include "rhp.hpp"
#include "scattering.hpp"
#include "specfun.hpp"
#include "whitham.hpp"

namespace mkdv::verify {

struct Check {
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct Suite {
    std::string name;
    std::vector<Check> checks;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    void add(const std::string& n, double resid, double thresh) {
        checks.push_back({n, resid, thresh, resid < thresh});
    }
    // for checks whose measure must exceed a floor (slopes, ratios)
    void add_at_least(const std::string& n, double value, double floor) {
        checks.push_back({n, value, floor, value >= floor});
    }
};

namespace detail {

inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int n = static_cast<int>(x.size());
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace detail

// ---------------------------------------------------------------------------

inline Suite airy_suite() {
    using rhp::Matrix2;
    using cplx = std::complex<double>;
    Suite s{"airy"};
    // connection identity on a polar grid of the disk |zeta| <= 5
    double worst = 0.0;
    for (double r : {0.4, 1.0, 2.0, 3.5, 5.0})
        for (int i = 0; i < 24; ++i)
            worst = std::max(worst, std::abs(rhp::airy_connection_defect(
                                        std::polar(r, 2.0 * M_PI * i / 24.0))));
    s.add("connection identity on |zeta| <= 5", worst, 1e-12);

    // the four ray jumps
    const double r = 1.3;
    auto jump_dev = [&](cplx z, int plus, int minus, const Matrix2& J) {
        const Matrix2 Jm = rhp::airy_parametrix_sector(z, minus).inverse() *
                           rhp::airy_parametrix_sector(z, plus);
        return (Jm - J).max_abs();
    };
    double wj = 0.0;
    wj = std::max(wj, jump_dev(cplx(r), 0, 3, Matrix2{1.0, 0.0, 1.0, 1.0}));
    wj = std::max(wj, jump_dev(std::polar(r, 2.0 * M_PI / 3.0), 0, 1,
                               Matrix2{1.0, 1.0, 0.0, 1.0}));
    wj = std::max(wj, jump_dev(std::polar(r, -2.0 * M_PI / 3.0), 2, 3,
                               Matrix2{1.0, 1.0, 0.0, 1.0}));
    wj = std::max(wj, jump_dev(std::polar(r, M_PI), 1, 2, Matrix2{0.0, -1.0, 1.0, 0.0}));
    s.add("sector jumps", wj, 1e-10);

    // determinant constancy
    const cplx det_ref = rhp::airy_parametrix_sector(cplx(0.3, 0.2), 0).det();
    double wd = 0.0;
    for (const cplx z : {cplx(1.0, 1.0), cplx(-2.0, 0.5), cplx(0.1, -3.0), cplx(4.0, -0.2)})
        wd = std::max(wd, std::abs(rhp::airy_parametrix(z).det() - det_ref));
    s.add("determinant constancy", wd, 1e-11);

    // asymptotic correction matrix: remaining residual decays like zeta^{-3}
    const double inv_s2 = 1.0 / std::sqrt(2.0);
    const Matrix2 H{inv_s2, inv_s2, inv_s2, -inv_s2};
    const Matrix2 C{-1.0 / 48.0, -1.0 / 8.0, 1.0 / 8.0, 1.0 / 48.0};
    std::vector<double> lx, le;
    for (double rr : {10.0, 14.0, 20.0, 28.0}) {
        const cplx z = std::polar(rr, M_PI / 5.0);
        const cplx z32 = z * std::sqrt(z);
        const Matrix2 E = H * rhp::pow_sigma3(std::pow(z, 0.25)) * rhp::airy_parametrix(z) *
                          rhp::pow_sigma3(std::polar(1.0, -M_PI / 4.0)) *
                          rhp::pow_sigma3(std::exp(-2.0 / 3.0 * z32));
        Matrix2 resid = E - Matrix2::identity();
        const cplx zm = 1.0 / z32;
        resid = resid - Matrix2{C.m11 * zm, C.m12 * zm, C.m21 * zm, C.m22 * zm};
        lx.push_back(std::log(rr));
        le.push_back(std::log(resid.max_abs()));
    }
    s.add_at_least("asymptotic correction slope", -detail::fit_slope(lx, le), 2.8);
    return s;
}

inline Suite laguerre_suite(const std::vector<int>& degrees = {0, 1, 2, 5, 10}) {
    using rhp::Matrix2;
    using cplx = std::complex<double>;
    Suite s{"laguerre"};
    double wjump = 0.0, wdet = 0.0, wnorm = 0.0;
    for (int n : degrees) {
        for (double x : {1.2, 4.0, std::min(9.0 + 2.0 * n, 30.0)}) {
            auto at = [&](double eps) { return rhp::laguerre_matrix(n, cplx(x, eps)); };
            auto extrap = [&](double sign) {
                const double e0 = sign * 1e-3;
                const Matrix2 p1 = at(e0), p2 = at(e0 / 2.0), p3 = at(e0 / 4.0);
                auto comb = [](const Matrix2& a, const Matrix2& b, double ca, double cb) {
                    return Matrix2{ca * a.m11 + cb * b.m11, ca * a.m12 + cb * b.m12,
                                   ca * a.m21 + cb * b.m21, ca * a.m22 + cb * b.m22};
                };
                const Matrix2 q1 = comb(p2, p1, 2.0, -1.0);
                const Matrix2 q2 = comb(p3, p2, 2.0, -1.0);
                return comb(q2, q1, 4.0 / 3.0, -1.0 / 3.0);
            };
            const Matrix2 Lp = extrap(1.0), Lm = extrap(-1.0);
            const double scale = std::max(1.0, Lp.max_abs());
            wjump = std::max(wjump, (Lm - Lp * rhp::laguerre_jump(x)).max_abs() / scale);
        }
        const cplx z1(3.0 + n, 2.5), z2(-2.0, -4.0);
        wdet = std::max(wdet, std::abs(rhp::laguerre_matrix(n, z1).det() - 1.0));
        wdet = std::max(wdet, std::abs(rhp::laguerre_matrix(n, z2).det() - 1.0));
        // norms against Gamma(n + 3/2) n!
        specfun::QuadSpec spec;
        spec.a = 0.0;
        spec.b = std::sqrt(rhp::detail::smax_for(n));
        spec.tol = 1e-13;
        auto f = [&](cplx uc) {
            const double u = uc.real();
            const cplx p = rhp::laguerre_pi(n, cplx(u * u));
            return 2.0 * u * u * std::exp(-u * u) * p * p;
        };
        const double val = specfun::quad_singular(f, spec).real();
        wnorm = std::max(wnorm,
                         std::abs(val / std::exp(rhp::laguerre_log_norm(n)) - 1.0));
    }
    s.add("jump residual across the positive axis (relative)", wjump, 1e-6);
    s.add("determinant", wdet, 1e-10);
    s.add("orthogonality norms (relative)", wnorm, 1e-9);
    return s;
}

inline Suite whitham_suite(double c = 1.0) {
    Suite s{"whitham"};
    const auto top = whitham::solve_whitham(c * c / 3.0, c);
    s.add("edge solve: d -> c",
          std::abs(top.d - c) + std::abs(top.mu - c / std::sqrt(3.0)), 1e-10);
    const auto bot = whitham::solve_whitham(-0.5 * c * c, c);
    s.add("degenerate solve: d -> 0", std::abs(bot.d) + std::abs(bot.mu), 1e-10);
    s.add("band length vanishes at the edge", std::abs(whitham::big_B(c, c)), 1e-14);
    double worst_tau = -1e300;
    double prev_d = -1.0;
    double worst_resid = 0.0;
    bool monotone = true;
    for (int i = 1; i < 25; ++i) {
        const double xi = -0.5 * c * c + (c * c / 3.0 + 0.5 * c * c) * i / 25.0;
        const auto wp = whitham::solve_whitham(xi, c);
        worst_resid = std::max(
            worst_resid, std::abs(wp.mu * wp.mu + 0.5 * wp.d * wp.d - 0.5 * c * c - xi));
        if (wp.d <= prev_d) monotone = false;
        prev_d = wp.d;
        if (wp.d > 0.0 && wp.d < c)
            worst_tau = std::max(worst_tau, whitham::tau_of_d(wp.d, c));
    }
    s.add("implicit-relation residual", worst_resid, 1e-12);
    s.add("tau negative across the band", worst_tau, 0.0);
    s.checks.push_back({"d monotone in xi", monotone ? 0.0 : 1.0, 0.5, monotone});
    return s;
}

inline Suite series_suite(double c = 1.0) {
    Suite s{"series"};
    std::vector<double> le, lb, lt;
    for (double eta : {1e-4, 3e-4, 1e-3, 3e-3, 1e-2}) {
        const double d = c * (1.0 - eta);
        const double model = 8.0 * std::pow(c, 3) * eta *
                             (1.0 + eta * whitham::series_P(1, eta));
        le.push_back(std::log(eta));
        lb.push_back(std::log(std::abs(whitham::big_B(d, c) / M_PI - model)));
        lt.push_back(std::log(std::abs(whitham::tau_star_of_d(d, c) / 4.0 -
                                       std::log(eta / 8.0) - 0.5 * eta)));
    }
    s.add_at_least("band-integral expansion order", detail::fit_slope(le, lb), 2.5);
    s.add_at_least("period-ratio expansion order", detail::fit_slope(le, lt), 1.8);
    double prev = 1e300;
    bool shrinking = true;
    for (double eta : {1e-2, 1e-3, 1e-4}) {
        const double lhs = whitham::delta_of_d(c * (1.0 - eta), c) / M_PI + 0.5;
        const double rhs = std::log(4.0) / std::log(8.0 / eta);
        const double dev = std::abs(lhs - rhs);
        if (dev > prev) shrinking = false;
        prev = dev;
    }
    s.checks.push_back({"phase-shift limit approached", prev, 0.05, shrinking && prev < 0.05});
    return s;
}

inline Suite phases_suite(double c = 1.0, double h_star = 1.0) {
    Suite s{"phases"};
    const scattering::StepProblem prob(c, h_star);
    double w0 = 0.0;
    for (int n : {0, 1, 3, 7, 20})
        w0 = std::max(w0, std::abs(asympt::alpha_refined(n, 0.0, prob) -
                                   asympt::alpha_tilde(n, prob)));
    s.add("refined ladder reduces at v = 0", w0, 1e-12);
    double wn = 0.0;
    for (int n : {1, 2, 5, 10, 100, 1000, 10000})
        wn = std::max(wn, n * std::abs(asympt::alpha_curve(n, 1, 1e7, prob) -
                                       asympt::alpha_tilde(n, prob)));
    s.add("curve ladder within 1/n of the fixed ladder", wn, 2.0);
    double wq = 0.0;
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int n = 1; n <= 6; ++n) {
        const double t = std::pow(10.0, 1.0 + 3.0 * ur(rng));
        const double rho = 0.4 + 2.0 * ur(rng);
        const double a = rhp::q_inf_first(n - 1, t, rho, prob);
        const double b = rhp::q_inf_second(n, t, rho, prob);
        wq = std::max(wq, std::abs(a - b) / (1.0 + std::abs(a)));
    }
    s.add("amplitude shift identity between refinements", wq, 1e-12);
    return s;
}

inline Suite gmatrix_suite(int trials = 100) {
    using cplx = std::complex<double>;
    Suite s{"gmatrix"};
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    double wsys = 0.0, wsech = 0.0;
    const cplx iu(0.0, 1.0);
    for (int i = 0; i < trials; ++i) {
        const double c = 0.5 + 1.5 * ur(rng);
        const int n = int(6.0 * ur(rng));
        const double t = std::pow(10.0, 1.0 + 4.0 * ur(rng));
        const double rho = 0.3 + 2.7 * ur(rng);
        const scattering::StepProblem prob(c, 1.0);
        const auto rh = rhp::rhat_first(n, t, rho, prob);
        const double S = rhp::big_S(c, rho, t);
        const auto g = rhp::g_matrix_solve(rh.r1, rh.r1d, S, c);
        const double scale =
            std::max({std::abs(rh.r1d / S), std::abs(g.a), std::abs(g.b), 1e-30});
        const cplx e1 = g.a * rh.r1d / (-2.0 * iu * c * S) - iu * g.btilde + rh.r1d / S;
        const cplx e2 = g.b * rh.r1d / (2.0 * iu * c * S) + iu * g.atilde;
        const cplx e3 = g.atilde * rh.r1 / (2.0 * iu * c * S) + iu * g.b + rh.r1 / S;
        const cplx e4 = g.btilde * rh.r1 / (2.0 * iu * c * S) + iu * g.a;
        wsys = std::max(wsys, (std::abs(e1) + std::abs(e2) + std::abs(e3) + std::abs(e4)) /
                                  scale);
        const double u = rh.r1d / (2.0 * c * S);
        const double sech = 2.0 * c * 2.0 * u / (1.0 + u * u);
        wsech = std::max(wsech,
                         std::abs((2.0 * iu * g.b).real() - sech) / (1.0 + sech));
    }
    s.add("residue system satisfied", wsys, 1e-12);
    s.add("sech closed form of the amplitude", wsech, 1e-12);
    return s;
}

inline Suite audit_suite() {
    Suite s{"audit"};
    rhp::AuditParams p;
    p.mode = rhp::AuditMode::refined_first;
    p.rho = 1.45;
    p.ts = {1e2, 1e3, 1e4, 1e5};
    const auto rep1 = rhp::parametrix_jump_audit(p);
    const double dev1 = std::max(
        {std::abs(rep1.up12.fitted - rep1.up12.printed),
         std::abs(rep1.up21.fitted - rep1.up21.printed),
         std::abs(rep1.lo12.fitted - rep1.lo12.printed),
         std::abs(rep1.lo21.fitted - rep1.lo21.printed)});
    s.add("first refinement decay exponents", dev1, 0.15);
    s.add("identity jump inside the disk", rep1.segment_residual, 1e-8);

    p.mode = rhp::AuditMode::refined_second;
    p.rho = 1.05;   // fractional part in the upper window: n = floor + 1
    const auto rep2 = rhp::parametrix_jump_audit(p);
    const double dev2 = std::max(
        {std::abs(rep2.up12.fitted - rep2.up12.printed),
         std::abs(rep2.up21.fitted - rep2.up21.printed),
         std::abs(rep2.lo12.fitted - rep2.lo12.printed),
         std::abs(rep2.lo21.fitted - rep2.lo21.printed)});
    s.add("second refinement decay exponents", dev2, 0.15);

    p.mode = rhp::AuditMode::rough;
    p.rho = 1.75;     // half-integer count
    p.n_override = 1;
    const auto rep3 = rhp::parametrix_jump_audit(p);
    s.checks.push_back({"half-integer stall detected", rep3.nondecaying_offdiag ? 0.0 : 1.0,
                        0.5, rep3.nondecaying_offdiag});
    return s;
}

inline Suite mesoscopic_suite(double c = 1.0) {
    Suite s{"mesoscopic"};
    const scattering::StepProblem prob(c, 1.0);
    const double g = asympt::gamma_mesoscopic(1e5, 0.45, 0.5, 0, prob);
    s.add("count-equation residual",
          std::abs(asympt::count_balance(g, 1e5, 0.45, 0.5, 0, c)), 1e-12);
    double wres = 0.0;
    for (int i = 0; i < 6; ++i) {
        const std::complex<double> y = std::polar(0.05, 2.0 * M_PI * i / 6.0);
        wres = std::max(wres, asympt::conformal_map(y, 30, 1e5, 5e-3, 1, prob).residual);
    }
    s.add("normal-form residual on the disk", wres, 1e-10);
    // derivative against the printed expansion, error of second order
    double worst_scaled = 0.0;
    for (int n : {20, 40, 80}) {
        const auto cm = asympt::conformal_map(0.0, n, 1e6, 1e-3, 0, prob);
        const double printed =
            c * c * (16.0 + 8.0 * 1e-3 - (8.0 + 1e-3) / (2.0 + 1e-3) * n / (c * c * c * 1e6));
        worst_scaled = std::max(worst_scaled, std::abs(cm.ztilde_y - printed) /
                                                  std::pow(double(n) / 1e6, 2));
    }
    s.add("map derivative matches expansion to second order", worst_scaled, 5.0);
    return s;
}

inline Suite zlemma_suite(double c = 1.0) {
    Suite s{"zlemma"};
    double worst = 0.0;
    for (double t : {1e2, 1e3, 1e4, 1e5, 1e6})
        worst = std::max(worst, std::abs(whitham::z_lemma_check(t, 0.3, 1.0, c).value));
    s.add("phase-count diagnostic bounded on the curve", worst, 25.0);
    return s;
}

inline std::vector<Suite> all_suites() {
    return {airy_suite(),   laguerre_suite(), whitham_suite(), series_suite(),
            phases_suite(), gmatrix_suite(),  audit_suite(),   mesoscopic_suite(),
            zlemma_suite()};
}

} // namespace mkdv::verify

#endif
