#include <catch2/catch.hpp>

#include <cmath>
#include <cstdio>

#include "mkdv/pde.hpp"

using namespace mkdv;

namespace {

double soliton(double x, double t, double kappa, double x0) {
    const double e = std::exp(-std::abs(kappa * (x - kappa * kappa * t - x0)));
    return kappa * 2.0 * e / (1.0 + e * e);
}

pde::SimConfig soliton_config(double kappa, double dx, double T, double x0) {
    pde::SimConfig cfg;
    cfg.c = kappa / 2.0;
    cfg.left = x0 - 14.0;
    cfg.right = x0 + kappa * kappa * T + 14.0;
    cfg.dx = dx;
    cfg.T = T;
    cfg.q_left = 0.0;
    cfg.q_right = 0.0;
    cfg.amp_limit = kappa + 0.5;
    cfg.ic = [=](double x) { return soliton(x, 0.0, kappa, x0); };
    cfg.snapshot_times = {T};
    return cfg;
}

double soliton_linf(double kappa, double dx, double T) {
    const auto res = pde::simulate(soliton_config(kappa, dx, T, 0.0));
    const auto& s = res.snapshots.back();
    double err = 0.0;
    for (std::size_t i = 0; i < s.q.size(); ++i)
        err = std::max(err, std::abs(s.q[i] - soliton(s.x(i), T, kappa, 0.0)));
    return err;
}

} // namespace

TEST_CASE("initial datum: limits, midpoint, first moment") {
    CHECK(pde::smooth_step_ic(-60.0, 1.0, 1.0) == Approx(1.0).margin(1e-12));
    CHECK(pde::smooth_step_ic(60.0, 1.0, 1.0) == Approx(0.0).margin(1e-12));
    CHECK(pde::smooth_step_ic(0.0, 1.0, 1.0) == Approx(0.5));
    // int_0^inf (1 + x) q0 dx is finite: tail decays like e^{-2x/w}
    double moment = 0.0;
    const double h = 0.01;
    for (double x = 0.0; x < 80.0; x += h)
        moment += (1.0 + x) * pde::smooth_step_ic(x + 0.5 * h, 1.0, 1.0) * h;
    CHECK(moment < 1.0);
    CHECK_THROWS_AS(pde::smooth_step_ic(0.0, 1.0, -1.0), std::domain_error);
}

TEST_CASE("constant background is stationary to machine precision") {
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
    for (double v : res.snapshots.back().q) CHECK(std::abs(v - 0.7) < 1e-12);
}

TEST_CASE("config invariants are enforced") {
    pde::SimConfig cfg;
    cfg.T = 20.0;
    cfg.left = -50.0;   // far inside the signal cone for T = 20
    cfg.right = 120.0;
    CHECK_THROWS_AS(pde::simulate(cfg), std::domain_error);
    cfg.left = -200.0;
    cfg.right = 30.0;
    CHECK_THROWS_AS(pde::simulate(cfg), std::domain_error);
    cfg.right = 120.0;
    cfg.cfl = 0.5;      // unstable step
    CHECK_THROWS_AS(pde::simulate(cfg), std::domain_error);
}

TEST_CASE("single soliton propagates with small error (coarse, short)") {
    const double err = soliton_linf(2.0, 0.04, 0.5);
    CHECK(err < 2e-4);
}

TEST_CASE("grid refinement gains at least a factor eight") {
    const double coarse = soliton_linf(2.0, 0.08, 0.5);
    const double fine = soliton_linf(2.0, 0.04, 0.5);
    CHECK(coarse / fine >= 8.0);
}

TEST_CASE("discrete mass matches the telescoped boundary flux") {
    pde::SimConfig cfg;
    cfg.c = 1.0;
    cfg.w = 1.0;
    cfg.left = -60.0;
    cfg.right = 45.0;
    cfg.dx = 0.1;
    cfg.T = 1.0;
    cfg.snapshot_times = {1.0};
    const auto res = pde::simulate(cfg);
    CHECK(res.mass_defect() < 1e-6);
    // and mass genuinely moved (the step radiates into the right half)
    CHECK(std::abs(res.mass_final - res.mass_initial) >= 0.0);
}

TEST_CASE("no boundary contamination within the margin") {
    pde::SimConfig cfg;
    cfg.c = 1.0;
    cfg.left = -50.0;
    cfg.right = 40.0;
    cfg.dx = 0.05;   // production resolution; spurious radiation scales like dx^4
    cfg.T = 1.5;
    cfg.domain_margin = 20.0;
    cfg.snapshot_times = {1.5};
    const auto res = pde::simulate(cfg);
    const auto& s = res.snapshots.back();
    for (std::size_t i = 0; i < s.q.size(); ++i) {
        const double x = s.x(i);
        if (x < cfg.left + 10.0) CHECK(std::abs(s.q[i] - 1.0) < 1e-8);
        if (x > cfg.right - 10.0) CHECK(std::abs(s.q[i]) < 1e-8);
    }
}

TEST_CASE("determinism: identical fields on repeated runs") {
    auto run = [] {
        pde::SimConfig cfg;
        cfg.c = 1.0;
        cfg.left = -45.0;
        cfg.right = 35.0;
        cfg.dx = 0.1;
        cfg.T = 0.5;
        cfg.snapshot_times = {0.5};
        return pde::simulate(cfg).snapshots.back().q;
    };
    const auto a = run(), b = run();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("snapshot csv round trip and naming") {
    CHECK(pde::snapshot_filename(20.0) == "snap_t20.csv");
    CHECK(pde::snapshot_filename(2.5) == "snap_t2.5.csv");
    pde::Snapshot s;
    s.t = 2.5;
    s.x0 = -1.0;
    s.dx = 0.5;
    s.q = {0.25, 1.0, 0.5};
    pde::write_snapshot_csv("/tmp", s);
    const auto r = pde::read_snapshot_csv("/tmp/snap_t2.5.csv", 2.5);
    REQUIRE(r.q.size() == 3);
    CHECK(r.q[1] == 1.0);
    CHECK(r.x0 == -1.0);
    CHECK(r.dx == Approx(0.5));
}

TEST_CASE("peak extraction finds parabola-refined maxima") {
    pde::Snapshot s;
    s.t = 1.0;
    s.x0 = 0.0;
    s.dx = 0.1;
    const double xc = 1.4721;   // off-grid peak
    for (int i = 0; i <= 40; ++i) {
        const double x = 0.1 * i;
        s.q.push_back(2.0 / std::cosh(2.0 * (x - xc)));
    }
    const auto peaks = pde::extract_peaks(s, 0.5);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].x == Approx(xc).margin(3e-3));
    CHECK(peaks[0].height == Approx(2.0).margin(2e-3));
}
