// Acceptance runner: one pass/fail line per criterion at pinned tolerances.
// Usage: acceptance [--criterion N]
// Exit code: number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "mkdv/asymptotics.hpp"
#include "mkdv/pde.hpp"
#include "mkdv/verify.hpp"

using namespace mkdv;
using scattering::StepProblem;

namespace {

struct Line {
    bool pass;
    std::string text;
};

std::vector<Line> g_lines;

void detail_line(bool pass, const std::string& text) {
    g_lines.push_back({pass, text});
}

bool detail_check(const std::string& what, double resid, double thresh) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %.3e (threshold %.3e)", what.c_str(), resid,
                  thresh);
    const bool ok = resid < thresh;
    detail_line(ok, buf);
    return ok;
}

bool detail_at_least(const std::string& what, double value, double floor) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s: %.3f (needs >= %.3f)", what.c_str(), value,
                  floor);
    const bool ok = value >= floor;
    detail_line(ok, buf);
    return ok;
}

bool from_suite(const verify::Suite& s) {
    bool ok = true;
    for (const auto& c : s.checks) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s: %.3e vs %.3e", c.name.c_str(), c.residual,
                      c.threshold);
        detail_line(c.pass, buf);
        ok = ok && c.pass;
    }
    return ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --------------------------------------------------------------------------

bool criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = from_suite(verify::laguerre_suite({0, 1, 2, 5, 10}));
    ok = detail_check("runtime (s)", seconds_since(t0), 30.0) && ok;
    return ok;
}

bool criterion_2() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = from_suite(verify::airy_suite());
    ok = detail_check("runtime (s)", seconds_since(t0), 10.0) && ok;
    return ok;
}

bool criterion_3() {
    bool ok = true;
    for (double c : {1.0, 1.7}) {
        const auto top = whitham::solve_whitham(c * c / 3.0, c);
        ok = detail_check("edge solve d -> c",
                          std::abs(top.d - c) + std::abs(top.mu - c / std::sqrt(3.0)),
                          1e-10) && ok;
        const auto bot = whitham::solve_whitham(-0.5 * c * c, c);
        ok = detail_check("degenerate solve d -> 0", std::abs(bot.d) + std::abs(bot.mu),
                          1e-10) && ok;
        ok = detail_check("band integral vanishes at the edge",
                          std::abs(whitham::big_B(c, c)), 1e-14) && ok;
        double worst_tau = -1e300;
        for (double d : {0.05, 0.3, 0.55, 0.8, 0.97})
            worst_tau = std::max(worst_tau, whitham::tau_of_d(d * c, c));
        ok = detail_check("tau < 0 across the band", worst_tau, 0.0) && ok;
    }
    return ok;
}

bool criterion_4() {
    return from_suite(verify::series_suite());
}

bool criterion_5() {
    const StepProblem prob(1.0, 1.0);
    bool ok = true;
    double w0 = 0.0;
    for (int n = 0; n <= 50; ++n)
        w0 = std::max(w0, std::abs(asympt::alpha_refined(n, 0.0, prob) -
                                   asympt::alpha_tilde(n, prob)));
    ok = detail_check("refined ladder at v=0 equals the fixed ladder", w0, 1e-12) && ok;
    double wn = 0.0;
    for (int n = 1; n <= 10000; ++n)
        wn = std::max(wn, n * std::abs(asympt::alpha_curve(n, 1, 1e7, prob) -
                                       asympt::alpha_tilde(n, prob)));
    ok = detail_check("n |curve phase - ladder phase| bounded (n <= 1e4)", wn, 2.0) && ok;
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    double wq = 0.0;
    for (int n = 1; n <= 8; ++n) {
        const double t = std::pow(10.0, 1.0 + 3.0 * ur(rng));
        const double rho = 0.4 + 2.0 * ur(rng);
        const double a = rhp::q_inf_first(n - 1, t, rho, prob);
        const double b = rhp::q_inf_second(n, t, rho, prob);
        wq = std::max(wq, std::abs(a - b) / (1.0 + a));
    }
    ok = detail_check("amplitude shift identity", wq, 1e-12) && ok;
    return ok;
}

bool criterion_6() {
    return from_suite(verify::gmatrix_suite(100));
}

bool criterion_7() {
    // The pointwise ratio swings with the position inside the oscillation
    // window, so the constant is fitted per decade as a maximum over samples
    // covering different window positions.
    const StepProblem prob(1.0, 1.0);
    const double sigma = 0.3, beta = 1.0;
    std::vector<double> decade_max;
    for (double T : {1e3, 1e4, 1e5, 1e6}) {
        double mx = 0.0;
        for (int j = 0; j < 6; ++j) {
            const double t = T * (1.0 + 0.15 * j);
            const double x = 4.0 * t - beta * std::pow(t, sigma) * std::log(t);
            const double qe = asympt::q_ell(x, t, prob);
            const auto sf = asympt::q_ell_soliton_form(x, t, prob);
            const double v = beta * std::pow(t, sigma) * std::log(t) / (4.0 * t);
            const double eta = whitham::solve_whitham((1.0 - v) / 3.0, 1.0).eta;
            mx = std::max(mx, std::abs(qe - sf.q) / eta);
        }
        char buf[128];
        std::snprintf(buf, sizeof buf, "decade starting t = %.0e: fitted C = %.3f", T, mx);
        detail_line(true, buf);
        decade_max.push_back(mx);
    }
    double mx = 0.0, mn = 1e300;
    for (double r : decade_max) {
        mx = std::max(mx, r);
        mn = std::min(mn, r);
    }
    bool ok = detail_check("uniform bound on C", mx, 1.0);
    char buf[128];
    std::snprintf(buf, sizeof buf, "decade-max stability over [1e3, 1e6]: max/min = %.2f",
                  mx / std::max(mn, 1e-300));
    const bool stable = mx / std::max(mn, 1e-300) < 10.0;
    detail_line(stable, buf);
    return ok && stable;
}

bool criterion_8() {
    bool ok = true;
    {
        rhp::AuditParams p;
        p.mode = rhp::AuditMode::refined_first;
        p.rho = 1.45;
        p.ts = {1e2, 1e3, 1e4, 1e5};
        const auto rep = rhp::parametrix_jump_audit(p);
        const double dev = std::max({std::abs(rep.up12.fitted - rep.up12.printed),
                                     std::abs(rep.up21.fitted - rep.up21.printed),
                                     std::abs(rep.lo12.fitted - rep.lo12.printed),
                                     std::abs(rep.lo21.fitted - rep.lo21.printed)});
        ok = detail_check("first refinement exponent deviation", dev, 0.15) && ok;
        ok = detail_check("correction matrix bounded", rep.max_correction_dev, 100.0) && ok;
        ok = detail_check("identity jump inside the disk", rep.segment_residual, 1e-8) && ok;
    }
    {
        rhp::AuditParams p;
        p.mode = rhp::AuditMode::refined_second;
        p.rho = 1.05;
        p.ts = {1e2, 1e3, 1e4, 1e5};
        const auto rep = rhp::parametrix_jump_audit(p);
        const double dev = std::max({std::abs(rep.up12.fitted - rep.up12.printed),
                                     std::abs(rep.up21.fitted - rep.up21.printed),
                                     std::abs(rep.lo12.fitted - rep.lo12.printed),
                                     std::abs(rep.lo21.fitted - rep.lo21.printed)});
        ok = detail_check("second refinement exponent deviation", dev, 0.15) && ok;
    }
    {
        rhp::AuditParams p;
        p.mode = rhp::AuditMode::rough;
        p.rho = 1.75;   // half-integer count parameter
        p.n_override = 1;
        p.ts = {1e2, 1e3, 1e4, 1e5};
        const auto rep = rhp::parametrix_jump_audit(p);
        detail_line(rep.nondecaying_offdiag,
                    "half-integer mismatch: non-decaying off-diagonal detected");
        ok = ok && rep.nondecaying_offdiag;
    }
    return ok;
}

bool criterion_9() {
    const StepProblem prob(1.0, 1.0);
    bool ok = true;
    double worst = 0.0;
    for (double t : {1e3, 1e5}) {
        const double g = asympt::gamma_mesoscopic(t, 0.45, 0.5, 0, prob);
        worst = std::max(worst, std::abs(asympt::count_balance(g, t, 0.45, 0.5, 0, 1.0)));
    }
    ok = detail_check("count-equation residual", worst, 1e-12) && ok;

    const double g6 = asympt::gamma_mesoscopic(1e6, 0.3, 1.0, 0, prob);
    const double ratio = g6 * (1.0 - 0.3) / std::pow(1e6, 0.3);
    ok = detail_check("|gamma (1-sigma)/(beta t^sigma) - 1| at t = 1e6",
                      std::abs(ratio - 1.0), 0.05) && ok;

    double wres = 0.0;
    for (int i = 0; i < 6; ++i) {
        const std::complex<double> y = std::polar(0.05, 2.0 * M_PI * i / 6.0);
        wres = std::max(wres, asympt::conformal_map(y, 30, 1e5, 5e-3, 1, prob).residual);
    }
    ok = detail_check("normal-form residual", wres, 1e-10) && ok;

    double worst_scaled = 0.0;
    for (int n : {20, 40, 80}) {
        const double h = 1e-5;
        const auto st = asympt::conformal_map(std::complex<double>(h), n, 1e6, 1e-3, 0, prob);
        const auto sm = asympt::conformal_map(std::complex<double>(-h), n, 1e6, 1e-3, 0, prob);
        const double fd = ((st.ztilde - sm.ztilde) / (2.0 * h)).real();
        const double printed = 16.0 + 8.0 * 1e-3 - (8.0 + 1e-3) / (2.0 + 1e-3) * n / 1e6;
        worst_scaled = std::max(worst_scaled,
                                std::abs(fd - printed) / std::pow(double(n) / 1e6, 2));
    }
    ok = detail_check("map derivative vs expansion, scaled by (n/t)^-2", worst_scaled,
                      5.0) && ok;
    return ok;
}

bool criterion_10() {
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = true;
    {   // constant background
        pde::SimConfig cfg;
        cfg.c = 0.7;
        cfg.left = -40.0;
        cfg.right = 40.0;
        cfg.dx = 0.1;
        cfg.T = 0.5;
        cfg.ic = [](double) { return 0.7; };
        cfg.q_left = 0.7;
        cfg.q_right = 0.7;
        cfg.snapshot_times = {0.5};
        const auto res = pde::simulate(cfg);
        double dev = 0.0;
        for (double v : res.snapshots.back().q) dev = std::max(dev, std::abs(v - 0.7));
        ok = detail_check("constant solution stationary", dev, 1e-12) && ok;
    }
    auto soliton = [](double x, double t, double kappa) {
        const double e = std::exp(-std::abs(kappa * (x - kappa * kappa * t)));
        return kappa * 2.0 * e / (1.0 + e * e);
    };
    auto soliton_err = [&](double dx, double T) {
        pde::SimConfig cfg;
        cfg.c = 1.0;
        cfg.left = -14.0;
        cfg.right = 4.0 * T + 14.0;
        cfg.dx = dx;
        cfg.T = T;
        cfg.q_left = 0.0;
        cfg.q_right = 0.0;
        cfg.amp_limit = 2.5;
        cfg.ic = [&](double x) { return soliton(x, 0.0, 2.0); };
        cfg.snapshot_times = {T};
        const auto res = pde::simulate(cfg);
        const auto& s = res.snapshots.back();
        double err = 0.0;
        for (std::size_t i = 0; i < s.q.size(); ++i)
            err = std::max(err, std::abs(s.q[i] - soliton(s.x(i), T, 2.0)));
        return err;
    };
    ok = detail_check("soliton max error (dx = 0.02, t <= 5)", soliton_err(0.02, 5.0),
                      1e-3) && ok;
    const double coarse = soliton_err(0.08, 0.5);
    const double fine = soliton_err(0.04, 0.5);
    ok = detail_at_least("refinement gain per dx halving", coarse / fine, 8.0) && ok;
    ok = detail_check("runtime (s)", seconds_since(t0), 300.0) && ok;
    return ok;
}

bool criterion_11() {
    const auto t0 = std::chrono::steady_clock::now();
    const StepProblem prob(1.0, 1.0);
    pde::SimConfig cfg;
    cfg.c = 1.0;
    cfg.w = 1.0;
    cfg.dx = 0.047;   // finest spacing that keeps the run inside the cap here
    cfg.T = 80.0;
    cfg.left = -520.0;
    cfg.right = 360.0;
    cfg.domain_margin = 40.0;
    cfg.snapshot_times = {20.0, 40.0, 80.0};
    const auto res = pde::simulate(cfg);
    bool ok = true;
    double prev_err = 1e300, prev_gap = 1e300;
    bool err_decreasing = true, gap_decreasing = true;
    double final_height = 0.0;
    for (const auto& s : res.snapshots) {
        const auto err = pde::region_error(s, -0.3, 0.25, [&](double x, double t) {
            return asympt::q_ell(x, t, prob);
        });
        const auto peaks = pde::extract_peaks(s, 1.0);
        const double line = asympt::peak_position(0, s.t, prob);
        double lead_x = 0.0, lead_h = 0.0;
        if (!peaks.empty()) {
            lead_x = peaks.back().x;
            lead_h = peaks.back().height;
        }
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "t=%2.0f: elliptic rel Linf %.4f, lead peak x=%.2f h=%.3f, "
                      "predicted line %.2f",
                      s.t, err.linf_rel, lead_x, lead_h, line);
        detail_line(true, buf);
        if (err.linf_rel >= prev_err) err_decreasing = false;
        prev_err = err.linf_rel;
        const double gap = std::abs(lead_x - line);
        if (gap >= prev_gap) gap_decreasing = false;
        prev_gap = gap;
        final_height = lead_h;
    }
    detail_line(err_decreasing, "elliptic-region relative error strictly decreasing");
    ok = ok && err_decreasing;
    ok = detail_check("leading peak height within 10% of 2c at t = 80",
                      std::abs(final_height - 2.0) / 2.0, 0.10) && ok;
    detail_line(gap_decreasing, "gap to the predicted first-peak line decreasing");
    ok = ok && gap_decreasing;
    ok = detail_check("runtime (s)", seconds_since(t0), 1800.0) && ok;
    return ok;
}

bool criterion_12() {
    return from_suite(verify::zlemma_suite());
}

struct CriterionDef {
    int id;
    const char* label;
    std::function<bool()> run;
};

} // namespace

int main(int argc, char** argv) {
    int only = -1;
    for (int i = 1; i < argc; ++i)
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) only = std::atoi(argv[i + 1]);

    const std::vector<CriterionDef> defs = {
        {1, "Laguerre matrix: jumps, determinant, norms", criterion_1},
        {2, "Airy parametrix: connection, jumps, expansion order", criterion_2},
        {3, "modulation solve at the region endpoints", criterion_3},
        {4, "near-edge series orders", criterion_4},
        {5, "phase ladder chain", criterion_5},
        {6, "pole-removal linear system", criterion_6},
        {7, "elliptic wave vs soliton form along the curve", criterion_7},
        {8, "error-jump decay exponents", criterion_8},
        {9, "mesoscopic count and normal form", criterion_9},
        {10, "direct solver: soliton, refinement, constancy", criterion_10},
        {11, "end-to-end solver vs elliptic wave and peak line", criterion_11},
        {12, "phase-count boundedness diagnostic", criterion_12},
    };

    int failures = 0;
    for (const auto& d : defs) {
        if (only > 0 && d.id != only) continue;
        g_lines.clear();
        bool pass = false;
        std::string err;
        try {
            pass = d.run();
        } catch (const std::exception& e) {
            err = e.what();
        }
        std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", d.id, d.label);
        for (const auto& l : g_lines)
            std::printf("    %s %s\n", l.pass ? "ok " : "BAD", l.text.c_str());
        if (!err.empty()) std::printf("    BAD exception: %s\n", err.c_str());
        if (!pass) ++failures;
        std::fflush(stdout);
    }
    return failures;
}
