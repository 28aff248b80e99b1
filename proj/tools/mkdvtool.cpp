// Command-line surface: evaluate the closed-form profiles, run the direct
// solver, compare the two, and emit verification reports.
//
//   mkdvtool whitham   --c 1 --xi-min -0.45 --xi-max 0.33 --n 40
//   mkdvtool profile   --mode elliptic --t 50 --x-min -100 --x-max 90
//   mkdvtool simulate  --T 20 --snap 5,10,20 --out runs/step
//   mkdvtool compare   --snapdir runs/step --snaps 5,10,20 --xi-min -0.3 --xi-max 0.25
//   mkdvtool verify    --suite airy
//
// CSV goes to --out files (or stdout); reports are JSON with the parameter
// set and library version embedded.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mkdv/asymptotics.hpp"
#include "mkdv/pde.hpp"
#include "mkdv/verify.hpp"
#include "mkdv/version.hpp"

using json = nlohmann::ordered_json;
using mkdv::scattering::StepProblem;
namespace asympt = mkdv::asympt;
namespace pde = mkdv::pde;
namespace whith = mkdv::whitham;

namespace {

std::FILE* open_or_stdout(const std::string& dir, const std::string& name) {
    if (dir.empty()) return stdout;
    const std::string path = dir + "/" + name;
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw std::runtime_error("cannot open " + path);
    return f;
}

void close_if_file(std::FILE* f) {
    if (f != stdout) std::fclose(f);
}

json meta(const std::string& command, const json& params) {
    json j;
    j["schema_version"] = 1;
    j["library_version"] = MKDV_VERSION;
    j["command"] = command;
    j["params"] = params;
    return j;
}

std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < csv.size()) {
        std::size_t next = csv.find(',', pos);
        if (next == std::string::npos) next = csv.size();
        out.push_back(std::stod(csv.substr(pos, next - pos)));
        pos = next + 1;
    }
    return out;
}

int cmd_whitham(double c, double xi_min, double xi_max, int n, const std::string& out) {
    std::FILE* f = open_or_stdout(out, "whitham.csv");
    std::fputs("xi,d,mu,eta,B,tau,Delta,tau_star\n", f);
    for (int i = 0; i < n; ++i) {
        const double xi = xi_min + (xi_max - xi_min) * (n == 1 ? 0.0 : double(i) / (n - 1));
        if (!(xi >= -0.5 * c * c && xi <= c * c / 3.0)) {
            // out-of-region rows are flagged by nan fields, not fatal
            std::fprintf(f, "%.17g,nan,nan,nan,nan,nan,nan,nan\n", xi);
            continue;
        }
        const auto wp = whith::solve_whitham(xi, c);
        if (wp.d <= 0.0 || wp.d >= c) {
            std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,nan,nan,nan\n", xi, wp.d,
                         wp.mu, wp.eta, wp.d >= c ? 0.0 : std::nan(""));
            continue;
        }
        const auto ed = whith::elliptic_data(wp.d, c);
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", xi, wp.d,
                     wp.mu, wp.eta, ed.B, ed.tau, ed.delta, ed.tau_star);
    }
    close_if_file(f);
    return 0;
}

struct ProfileRow {
    double x, t, q;
    long n;
    double phase;
};

int cmd_profile(const std::string& mode, const StepProblem& prob, double t, double x_min,
                double x_max, int nx, double sigma, double beta, int M, int K, int N,
                double t_min, double t_max, int nt, const std::string& out) {
    std::vector<ProfileRow> rows;
    const double c = prob.c;
    if (mode == "elliptic") {
        for (int i = 0; i < nx; ++i) {
            const double x = x_min + (x_max - x_min) * (nx == 1 ? 0.0 : double(i) / (nx - 1));
            const double q = asympt::q_ell(x, t, prob);
            const auto sf = asympt::q_ell_soliton_form(x, t, prob);
            rows.push_back({x, t, q, sf.n, 0.25 * sf.tau_star * (sf.z - 2.0 * sf.n - 1.0)});
        }
    } else if (mode == "train") {
        for (int i = 0; i < nx; ++i) {
            const double x = x_min + (x_max - x_min) * (nx == 1 ? 0.0 : double(i) / (nx - 1));
            const double q = asympt::soliton_train(x, t, N, prob);
            // index and phase of the nearest ladder rung
            long best = 0;
            double bphase = 1e300;
            for (int n = 0; n < N; ++n) {
                const double arg = 2.0 * c * (x - 4.0 * c * c * t) +
                                   (2.0 * n + 1.5) * std::log(t) +
                                   asympt::alpha_tilde(n, prob);
                if (std::abs(arg) < std::abs(bphase)) {
                    bphase = arg;
                    best = n;
                }
            }
            rows.push_back({x, t, q, best, bphase});
        }
    } else if (mode == "corollary") {
        for (int i = 0; i < nt; ++i) {
            const double tt =
                t_min * std::pow(t_max / t_min, nt == 1 ? 0.0 : double(i) / (nt - 1));
            const auto p = asympt::corollary_profile(tt, sigma, beta, M, prob);
            rows.push_back({p.x, tt, p.q, p.n, p.phase});
        }
    } else if (mode == "mesoscopic") {
        for (int i = 0; i < nt; ++i) {
            const double tt =
                t_min * std::pow(t_max / t_min, nt == 1 ? 0.0 : double(i) / (nt - 1));
            const auto p = asympt::q_mesoscopic(tt, sigma, beta, K, prob);
            rows.push_back({p.x, tt, p.q, p.n, p.phase});
        }
    } else {
        std::fprintf(stderr, "profile: unknown mode '%s'\n", mode.c_str());
        return 2;
    }
    std::FILE* f = open_or_stdout(out, "profile_" + mode + ".csv");
    std::fputs("x,t,q_pred,n,phase\n", f);
    for (const auto& r : rows)
        std::fprintf(f, "%.17g,%.17g,%.17g,%ld,%.17g\n", r.x, r.t, r.q, r.n, r.phase);
    close_if_file(f);
    return 0;
}

int cmd_simulate(const pde::SimConfig& cfg, const std::string& out) {
    const auto res = pde::simulate(cfg);
    for (const auto& s : res.snapshots) pde::write_snapshot_csv(out.empty() ? "." : out, s);
    json j = meta("simulate", {{"c", cfg.c},
                               {"w", cfg.w},
                               {"dx", cfg.dx},
                               {"T", cfg.T},
                               {"left", cfg.left},
                               {"right", cfg.right}});
    j["steps"] = res.steps;
    j["mass_defect"] = res.mass_defect();
    j["snapshots"] = json::array();
    for (const auto& s : res.snapshots) j["snapshots"].push_back(pde::snapshot_filename(s.t));
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
}

int cmd_compare(const std::string& snapdir, const std::string& snaps_csv,
                const StepProblem& prob, double xi_min, double xi_max,
                const std::string& out) {
    const std::vector<double> times = parse_list(snaps_csv);
    json report = meta("compare", {{"c", prob.c},
                                   {"hstar", prob.h_star},
                                   {"xi_min", xi_min},
                                   {"xi_max", xi_max},
                                   {"snapdir", snapdir}});
    report["snapshots"] = json::array();
    bool decreasing = true;
    double prev = 1e300;
    for (double t : times) {
        const auto s = pde::read_snapshot_csv(snapdir + "/" + pde::snapshot_filename(t), t);
        const auto err = pde::region_error(
            s, xi_min, xi_max, [&](double x, double tt) { return asympt::q_ell(x, tt, prob); });
        const auto peaks = pde::extract_peaks(s, prob.c);
        json js;
        js["t"] = t;
        js["elliptic_linf_rel"] = err.linf_rel;
        js["elliptic_l2_rel"] = err.l2_rel;
        if (!peaks.empty()) {
            const auto& lead = peaks.back();
            js["lead_peak_x"] = lead.x;
            js["lead_peak_height"] = lead.height;
            js["lead_peak_line"] = asympt::peak_position(0, t, prob);
            js["lead_peak_gap"] = std::abs(lead.x - asympt::peak_position(0, t, prob));
        }
        if (err.linf_rel >= prev) decreasing = false;
        prev = err.linf_rel;
        report["snapshots"].push_back(js);
    }
    report["elliptic_error_decreasing"] = decreasing;
    std::FILE* f = open_or_stdout(out, "compare.json");
    std::fprintf(f, "%s\n", report.dump(2).c_str());
    close_if_file(f);
    return 0;
}

int cmd_verify(const std::string& suite_name, const std::string& out) {
    std::vector<mkdv::verify::Suite> suites;
    if (suite_name == "all") {
        suites = mkdv::verify::all_suites();
    } else if (suite_name == "airy") {
        suites = {mkdv::verify::airy_suite()};
    } else if (suite_name == "laguerre") {
        suites = {mkdv::verify::laguerre_suite()};
    } else if (suite_name == "whitham") {
        suites = {mkdv::verify::whitham_suite()};
    } else if (suite_name == "series") {
        suites = {mkdv::verify::series_suite()};
    } else if (suite_name == "phases") {
        suites = {mkdv::verify::phases_suite()};
    } else if (suite_name == "gmatrix") {
        suites = {mkdv::verify::gmatrix_suite()};
    } else if (suite_name == "audit") {
        suites = {mkdv::verify::audit_suite()};
    } else if (suite_name == "mesoscopic") {
        suites = {mkdv::verify::mesoscopic_suite()};
    } else if (suite_name == "zlemma") {
        suites = {mkdv::verify::zlemma_suite()};
    } else {
        std::fprintf(stderr, "verify: unknown suite '%s'\n", suite_name.c_str());
        return 2;
    }
    json report = meta("verify", {{"suite", suite_name}});
    report["suites"] = json::array();
    bool pass = true;
    for (const auto& s : suites) {
        json js;
        js["name"] = s.name;
        js["pass"] = s.pass();
        js["checks"] = json::array();
        for (const auto& c : s.checks)
            js["checks"].push_back({{"name", c.name},
                                    {"residual", c.residual},
                                    {"threshold", c.threshold},
                                    {"pass", c.pass}});
        report["suites"].push_back(js);
        pass = pass && s.pass();
    }
    report["pass"] = pass;
    std::FILE* f = open_or_stdout(out, "verify_" + suite_name + ".json");
    std::fprintf(f, "%s\n", report.dump(2).c_str());
    close_if_file(f);
    return pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"step-background mKdV asymptotics toolkit"};
    app.set_config("--config", "", "flat key=value configuration file");
    app.fallthrough();   // global flags may follow the subcommand

    double c = 1.0, hstar = 1.0, tol = 1e-10;
    std::string out;
    app.add_option("--c", c, "background amplitude");
    app.add_option("--hstar", hstar, "edge-singularity constant");
    app.add_option("--out", out, "output directory (default: stdout)");
    app.add_option("--tol", tol, "generic tolerance knob");

    auto* w = app.add_subcommand("whitham", "modulation parameters over a xi grid");
    double xi_min = -0.45, xi_max = 1.0 / 3.0 - 1e-6;
    int n_grid = 30;
    w->add_option("--xi-min", xi_min);
    w->add_option("--xi-max", xi_max);
    w->add_option("--n", n_grid, "grid size");

    auto* p = app.add_subcommand("profile", "closed-form wave profiles");
    std::string mode = "elliptic";
    double t = 50.0, x_min = -100.0, x_max = 90.0, sigma = 0.3, beta = 1.0;
    double t_min = 1e2, t_max = 1e5;
    int nx = 200, nt = 20, M = 1, K = 0, N = 3;
    p->add_option("--mode", mode, "elliptic | train | corollary | mesoscopic");
    p->add_option("--t", t);
    p->add_option("--x-min", x_min);
    p->add_option("--x-max", x_max);
    p->add_option("--nx", nx);
    p->add_option("--sigma", sigma);
    p->add_option("--beta", beta);
    p->add_option("--M", M);
    p->add_option("--K", K);
    p->add_option("--N", N);
    p->add_option("--t-min", t_min);
    p->add_option("--t-max", t_max);
    p->add_option("--nt", nt);

    auto* sim = app.add_subcommand("simulate", "direct solver with CSV snapshots");
    pde::SimConfig scfg;
    std::string snap_csv = "5,10,20";
    sim->add_option("--T", scfg.T);
    sim->add_option("--dx", scfg.dx);
    sim->add_option("--w", scfg.w);
    sim->add_option("--left", scfg.left);
    sim->add_option("--right", scfg.right);
    sim->add_option("--snap", snap_csv, "comma-separated snapshot times");
    sim->add_option("--cfl", scfg.cfl);

    auto* cmp = app.add_subcommand("compare", "snapshots against the elliptic profile");
    std::string snapdir = ".", snaps = "5,10,20";
    double cxi_min = -0.3, cxi_max = 0.25;
    cmp->add_option("--snapdir", snapdir);
    cmp->add_option("--snaps", snaps, "comma-separated snapshot times");
    cmp->add_option("--xi-min", cxi_min);
    cmp->add_option("--xi-max", cxi_max);

    auto* ver = app.add_subcommand("verify", "identity and order check suites");
    std::string suite = "all";
    ver->add_option("--suite", suite,
                    "all | airy | laguerre | whitham | series | phases | gmatrix | "
                    "audit | mesoscopic | zlemma");

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        const StepProblem prob(c, hstar);
        if (app.got_subcommand(w)) return cmd_whitham(c, xi_min, xi_max, n_grid, out);
        if (app.got_subcommand(p))
            return cmd_profile(mode, prob, t, x_min, x_max, nx, sigma, beta, M, K, N,
                               t_min, t_max, nt, out);
        if (app.got_subcommand(sim)) {
            scfg.c = c;
            scfg.snapshot_times = parse_list(snap_csv);
            return cmd_simulate(scfg, out);
        }
        if (app.got_subcommand(cmp))
            return cmd_compare(snapdir, snaps, prob, cxi_min, cxi_max, out);
        if (app.got_subcommand(ver)) return cmd_verify(suite, out);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
