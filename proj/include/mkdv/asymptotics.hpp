#ifndef MKDV_ASYMPTOTICS_HPP
#define MKDV_ASYMPTOTICS_HPP

// Closed-form large-time profiles: the modulated elliptic wave, its
// soliton-shaped near-edge form, finite soliton trains with their phase
// ladders, the transition-curve profile driven by the series inversion, and
// the mesoscopic profile driven by the count equation and the conformal
// normal form.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "errors.hpp"
#include "rhp.hpp"
#include "scattering.hpp"
#include "specfun.hpp"
#include "whitham.hpp"

namespace mkdv::asympt {

using cplx = std::complex<double>;
using scattering::StepProblem;

namespace detail {

inline double sech_stable(double x) {
    const double e = std::exp(-std::abs(x));
    return 2.0 * e / (1.0 + e * e);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Modulated elliptic wave
// ---------------------------------------------------------------------------

inline double q_ell(double x, double t, const StepProblem& prob) {
    const double c = prob.c;
    const double xi = x / (12.0 * t);
    if (!(xi > -0.5 * c * c && xi <= c * c / 3.0))
        throw std::domain_error("q_ell: xi outside the elliptic region");
    const auto wp = whitham::solve_whitham(xi, c);
    if (wp.d >= c) return 0.0;   // vanishing amplitude at the leading edge
    const double B = whitham::big_B(wp.d, c);
    const double tau = whitham::tau_of_d(wp.d, c);
    const double delta = whitham::delta_of_d(wp.d, c);
    const cplx zarg(0.0, t * B + delta);
    const cplx num = specfun::theta(cplx(0.0, M_PI) + zarg, cplx(tau));
    const cplx den = specfun::theta(zarg, cplx(tau));
    const cplx val = std::sqrt((c - wp.d) * (c + wp.d)) * num / den;
    if (std::abs(val.imag()) > 1e-10 * (1.0 + std::abs(val.real())))
        throw accuracy_error("q_ell: nonreal theta ratio", val, std::abs(val.imag()));
    return val.real();
}

// Near-edge soliton-shaped form: 2c / cosh(tau*/4 (z - 2n - 1)), z the phase
// count, n its even window index.
struct SolitonFormPoint {
    double q;
    double z;
    int n;
    double tau_star;
};

inline SolitonFormPoint q_ell_soliton_form(double x, double t, const StepProblem& prob) {
    const double c = prob.c;
    const double xi = x / (12.0 * t);
    const auto wp = whitham::solve_whitham(xi, c);
    const double B = whitham::big_B(wp.d, c);
    const double delta = whitham::delta_of_d(wp.d, c);
    const double tau_star = whitham::tau_star_of_d(wp.d, c);
    const double z = (t * B + delta) / M_PI;
    const int n = static_cast<int>(std::floor(0.5 * z));
    const double q = 2.0 * c * detail::sech_stable(0.25 * tau_star * (z - 2.0 * n - 1.0));
    return {q, z, n, tau_star};
}

// ---------------------------------------------------------------------------
// Soliton trains near the leading edge
// ---------------------------------------------------------------------------

// ladder phase of the n-th asymptotic soliton
inline double alpha_tilde(int n, const StepProblem& prob) {
    const double c = prob.c;
    return std::log(M_PI) + 2.0 * std::log(std::abs(prob.h_star)) - std::log(2.0) -
           std::lgamma(n + 1.0) - std::lgamma(n + 1.5) +
           (2.0 * n + 1.5) * std::log(32.0 * c * c * c);
}

// refinement carrying the slow coordinate v = 1 - x/(4c^2 t)
inline double alpha_refined(int n, double v, const StepProblem& prob) {
    const double c = prob.c;
    return std::log(M_PI) + 2.0 * std::log(std::abs(prob.h_star)) - std::log(2.0) -
           std::lgamma(n + 1.0) - std::lgamma(n + 1.5) +
           (2.0 * n + 1.5) * std::log(16.0 * c * c * c * (2.0 + v));
}

inline double soliton_train(double x, double t, int N, const StepProblem& prob) {
    if (N < 1) throw std::domain_error("soliton_train: need N >= 1");
    const double c = prob.c;
    double q = 0.0;
    for (int n = 0; n < N; ++n) {
        const double arg = 2.0 * c * (x - 4.0 * c * c * t) +
                           (2.0 * n + 1.5) * std::log(t) + alpha_tilde(n, prob);
        q += 2.0 * c * detail::sech_stable(arg);
    }
    return q;
}

// refined train using alpha_n(x/t)
inline double soliton_train_refined(double x, double t, int N, const StepProblem& prob) {
    const double c = prob.c;
    const double v = 1.0 - x / (4.0 * c * c * t);
    double q = 0.0;
    for (int n = 0; n < N; ++n) {
        const double arg = 2.0 * c * (x - 4.0 * c * c * t) +
                           (2.0 * n + 1.5) * std::log(t) + alpha_refined(n, v, prob);
        q += 2.0 * c * detail::sech_stable(arg);
    }
    return q;
}

// center line of the n-th peak
inline double peak_position(int n, double t, const StepProblem& prob) {
    const double c = prob.c;
    return 4.0 * c * c * t -
           ((2.0 * n + 1.5) * std::log(t) + alpha_tilde(n, prob)) / (2.0 * c);
}

// ---------------------------------------------------------------------------
// Transition-curve profile (x = 4c^2 t - beta t^sigma ln t)
// ---------------------------------------------------------------------------

// ladder phases of the series-inversion route, orders M = 1, 2, 3
inline double alpha_curve(int n, int M, double t, const StepProblem& prob) {
    if (n < 1) throw std::domain_error("alpha_curve: index must be >= 1 on the curve");
    const double c = prob.c;
    const double c3 = c * c * c;
    double a = (2.0 * n + 1.5) * std::log(32.0 * c3 / n) + 2.0 * n -
               std::log(4.0 / (prob.h_star * prob.h_star));
    if (M >= 2) a += double(n) * n / (4.0 * c3 * t) * std::log(32.0 * c3 * t / (M_E * M_E * n));
    if (M >= 3) {
        const double L = std::log(32.0 * c3 * M_E * t / n);
        a += double(n) * n * n / (64.0 * c3 * c3 * t * t) * (-31.0 + 12.5 * L - L * L);
    }
    if (M > 3 || M < 1) throw std::domain_error("alpha_curve: order must be 1, 2, or 3");
    return a;
}

struct CurvePoint {
    double x;
    double v;
    double eta;      // series-inverted small parameter
    double z_tilde;  // phase count along the curve
    int n;
    double phase;    // full cosh argument
    double q;
};

inline CurvePoint corollary_profile(double t, double sigma, double beta, int M,
                                    const StepProblem& prob) {
    if (!(M >= 1 && M <= 3)) throw std::domain_error("corollary_profile: M in {1,2,3}");
    if (!(sigma > 0.0 && sigma < double(M) / (M + 1.0)))
        throw std::domain_error("corollary_profile: sigma outside (0, M/(M+1))");
    const double c = prob.c;
    const double x = 4.0 * c * c * t - beta * std::pow(t, sigma) * std::log(t);
    const double v = beta * std::pow(t, sigma) * std::log(t) / (4.0 * c * c * t);
    const double eta = whitham::eta_from_v(v, M);
    double corr = 1.0;
    for (int j = 1; j < M; ++j) corr += std::pow(eta, j) * whitham::series_P(j, eta);
    const double z_tilde = 8.0 * c * c * c * t * eta * corr - 0.5;
    const int n = static_cast<int>(std::floor(0.5 * z_tilde));
    const double alpha = alpha_curve(n, M, t, prob);
    const double phase =
        2.0 * c * (x - 4.0 * c * c * t) + (2.0 * n + 1.5) * std::log(t) + alpha;
    return {x, v, eta, z_tilde, n, phase, 2.0 * c * detail::sech_stable(phase)};
}

// ---------------------------------------------------------------------------
// Count equation of the mesoscopic regime
// ---------------------------------------------------------------------------

// shift constant at expansion order K (K = 0, 1, 2 tabulated)
inline double q_shift_expansion(double gamma_or_n, double t, double v, int K, double c) {
    const double c3 = c * c * c;
    double Q = std::log(16.0 * c3 * (2.0 + v));
    const double r = gamma_or_n / (c3 * t);
    if (K >= 1) Q -= 3.0 * (8.0 + v) / (16.0 * (2.0 + v) * (2.0 + v)) * r;
    if (K >= 2)
        Q -= (400.0 + 48.0 * v + 5.0 * v * v) /
             (128.0 * std::pow(2.0 + v, 4)) * r * r;
    if (K > 2) throw std::domain_error("q_shift_expansion: K in {0,1,2} tabulated");
    return Q;
}

// log of the balance condition whose root is the count parameter
inline double count_balance(double gamma, double t, double sigma, double beta, int K,
                            double c) {
    const double lnt = std::log(t);
    const double v = beta * std::pow(t, sigma) * lnt / (4.0 * c * c * t);
    const double Q = q_shift_expansion(gamma, t, v, K, c);
    return 2.0 * c * beta * std::pow(t, sigma) * lnt +
           (2.0 * gamma + 0.5) * std::log(gamma) - 2.0 * gamma * (Q + 1.0) -
           (2.0 * gamma + 0.5) * lnt;
}

inline double gamma_mesoscopic(double t, double sigma, double beta, int K,
                               const StepProblem& prob) {
    if (!(t > 1.0)) throw std::domain_error("gamma_mesoscopic: need t > 1");
    if (!(sigma >= 0.0 && sigma < 1.0))
        throw std::domain_error("gamma_mesoscopic: sigma in [0,1)");
    const double c = prob.c;
    auto W = [&](double g) { return count_balance(g, t, sigma, beta, K, c); };
    // bracket around the seed, expanding geometrically
    const double seed = beta * std::pow(t, sigma) / (1.0 - sigma);
    double lo = seed, hi = seed;
    double flo = W(lo), fhi = flo;
    for (int it = 0; it < 80 && (flo > 0.0) == (fhi > 0.0); ++it) {
        lo = std::max(lo / 1.7, 1e-12);
        hi *= 1.7;
        flo = W(lo);
        fhi = W(hi);
    }
    if ((flo > 0.0) == (fhi > 0.0))
        throw solver_error("gamma_mesoscopic: no sign change in the bracket");
    // bisection with Newton polish (finite-difference slope)
    double g = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = W(g);
        if (std::abs(f) < 1e-13 * (1.0 + std::abs(2.0 * c * beta * std::pow(t, sigma) *
                                                  std::log(t))))
            break;
        if ((f > 0.0) == (fhi > 0.0)) {
            hi = g;
            fhi = f;
        } else {
            lo = g;
            flo = f;
        }
        const double h = 1e-7 * g;
        const double slope = (W(g + h) - W(g - h)) / (2.0 * h);
        double next = g - f / slope;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        g = next;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Conformal normal form near the edge
// ---------------------------------------------------------------------------

struct ConformalMapData {
    cplx ztilde;                 // mapped value at the requested point
    double Q;                    // shift constant (exactly matched)
    double ztilde_y;             // derivative of the map at the origin
    std::vector<cplx> A;         // pole-cancelling coefficients (size K)
    std::vector<double> b;       // Laurent coefficients b_j entering the tail
    double residual;             // |normal-form identity| at the point
};

namespace detail {

struct ConformalState {
    std::vector<cplx> u;   // map coefficients: ztilde = sum u_i y^{i+1}
    std::vector<cplx> A;
    cplx Q = 0.0;
    double eps = 0.0;      // 2n/t
    double c = 1.0;
    double v = 0.0;
    double S1 = 0.0;       // 8 c^2 (2+v)
    std::vector<double> beta_tail;  // b_j (4n/t)^j
    int K = 0;
};

inline cplx map_poly(const ConformalState& st, cplx y) {
    cplx acc = 0.0;
    for (int i = static_cast<int>(st.u.size()) - 1; i >= 0; --i) acc = acc * y + st.u[i];
    return acc * y;
}

inline cplx cubic_z(const ConformalState& st, cplx y) {
    return (st.S1 - 24.0 * st.c * y + 8.0 * y * y) * y;
}

// normal-form identity, combined so the logarithms cancel at the origin:
// z(y) - zt + eps ln((2c-y) zt / y) - eps Q - eps sum b_j (4n/t)^j zt^{-j}
//      + eps sum A_j i(c-y) / (y(2c-y))^j
inline cplx residual_at(const ConformalState& st, cplx y, cplx zt) {
    const cplx two_c_my = 2.0 * st.c - y;
    cplx r = cubic_z(st, y) - zt + st.eps * std::log(two_c_my * zt / y) -
             st.eps * st.Q;
    cplx zp = 1.0;
    for (int j = 1; j <= st.K; ++j) {
        zp /= zt;
        r -= st.eps * st.beta_tail[j - 1] * zp;
    }
    cplx pp = 1.0;
    for (int j = 1; j <= st.K; ++j) {
        pp /= y * two_c_my;
        r += st.eps * st.A[j - 1] * cplx(0.0, 1.0) * (st.c - y) * pp;
    }
    return r;
}

// Laurent coefficients of the residual on |y| = r0, orders -K .. m+1
inline std::vector<cplx> residual_coeffs(const ConformalState& st, double r0, int m,
                                         int nsamp) {
    std::vector<cplx> vals(nsamp);
    for (int k = 0; k < nsamp; ++k) {
        const double th = 2.0 * M_PI * k / nsamp;
        const cplx y = std::polar(r0, th);
        vals[k] = residual_at(st, y, map_poly(st, y));
    }
    std::vector<cplx> coeffs;
    for (int order = -st.K; order <= m + 1; ++order) {
        cplx acc = 0.0;
        for (int k = 0; k < nsamp; ++k) {
            const double th = 2.0 * M_PI * k / nsamp;
            acc += vals[k] * std::polar(1.0, -order * th);
        }
        coeffs.push_back(acc / (double(nsamp) * std::pow(r0, order)));
    }
    return coeffs;
}

// dense complex linear solve (partial pivoting); systems here are tiny
inline std::vector<cplx> solve_dense(std::vector<std::vector<cplx>> Amat,
                                     std::vector<cplx> rhs) {
    const int n = static_cast<int>(rhs.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(Amat[r][col]) > std::abs(Amat[piv][col])) piv = r;
        std::swap(Amat[piv], Amat[col]);
        std::swap(rhs[piv], rhs[col]);
        if (std::abs(Amat[col][col]) < 1e-300)
            throw solver_error("conformal map: singular Jacobian");
        for (int r = col + 1; r < n; ++r) {
            const cplx f = Amat[r][col] / Amat[col][col];
            for (int cc = col; cc < n; ++cc) Amat[r][cc] -= f * Amat[col][cc];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<cplx> x(n);
    for (int r = n - 1; r >= 0; --r) {
        cplx acc = rhs[r];
        for (int cc = r + 1; cc < n; ++cc) acc -= Amat[r][cc] * x[cc];
        x[r] = acc / Amat[r][r];
    }
    return x;
}

inline ConformalState solve_conformal(int n, double t, double v, int K, double c) {
    ConformalState st;
    st.eps = 2.0 * n / t;
    st.c = c;
    st.v = v;
    st.S1 = 8.0 * c * c * (2.0 + v);
    st.K = K;
    for (int j = 1; j <= K; ++j)
        st.beta_tail.push_back(rhp::b_coeff(j) * std::pow(4.0 * n / t, j));
    // beyond the cubic the true coefficients are O(2n/t); a short series at a
    // moderate radius keeps the Laurent extraction well conditioned
    const int m = 8;
    st.u.assign(m + 1, cplx(0.0));
    st.u[0] = st.S1;
    st.u[1] = -24.0 * c;
    st.u[2] = 8.0;
    st.A.assign(K, cplx(0.0));
    st.Q = cplx(std::log(16.0 * c * c * c * (2.0 + v)));
    if (st.eps == 0.0) return st;   // the map is the cubic itself

    const double r0 = 0.18 * c;
    const int nsamp = 96;
    const int nunk = (m + 1) + K + 1;

    auto pack = [&](const ConformalState& s) {
        std::vector<cplx> th(s.u);
        th.insert(th.end(), s.A.begin(), s.A.end());
        th.push_back(cplx(s.Q));
        return th;
    };
    auto unpack = [&](ConformalState& s, const std::vector<cplx>& th) {
        for (int i = 0; i <= m; ++i) s.u[i] = th[i];
        for (int j = 0; j < K; ++j) s.A[j] = th[m + 1 + j];
        s.Q = th[m + 1 + K];
    };

    std::vector<cplx> theta = pack(st);
    for (int iter = 0; iter < 40; ++iter) {
        unpack(st, theta);
        std::vector<cplx> F = residual_coeffs(st, r0, m, nsamp);
        double fn = 0.0;
        for (const cplx& f : F) fn = std::max(fn, std::abs(f));
        if (fn < 1e-13 * st.S1) break;
        // finite-difference Jacobian in the complex unknowns
        std::vector<std::vector<cplx>> J(F.size(), std::vector<cplx>(nunk));
        for (int uix = 0; uix < nunk; ++uix) {
            const double step = 1e-6 * (1.0 + std::abs(theta[uix]));
            std::vector<cplx> tp = theta;
            tp[uix] += step;
            ConformalState sp = st;
            unpack(sp, tp);
            const std::vector<cplx> Fp = residual_coeffs(sp, r0, m, nsamp);
            for (std::size_t r = 0; r < F.size(); ++r)
                J[r][uix] = (Fp[r] - F[r]) / step;
        }
        std::vector<cplx> delta = solve_dense(J, F);
        for (int uix = 0; uix < nunk; ++uix) theta[uix] -= delta[uix];
    }
    unpack(st, theta);
    return st;
}

} // namespace detail

inline ConformalMapData conformal_map(cplx y, int n, double t, double v, int K,
                                      const StepProblem& prob) {
    if (n < 0) throw std::domain_error("conformal_map: index must be nonnegative");
    if (K < 0 || K > 8) throw std::domain_error("conformal_map: tail order out of range");
    const double c = prob.c;
    const auto st = detail::solve_conformal(n, t, v, K, c);
    ConformalMapData out;
    out.Q = st.Q.real();
    out.ztilde_y = st.u[0].real();
    out.A = st.A;
    for (int j = 1; j <= K; ++j) out.b.push_back(rhp::b_coeff(j));
    if (std::abs(y) == 0.0) {
        out.ztilde = 0.0;
        out.residual = 0.0;
        return out;
    }
    // pointwise Newton on the normal-form identity, seeded by the series
    cplx zt = detail::map_poly(st, y);
    if (st.eps > 0.0) {
        for (int it = 0; it < 60; ++it) {
            const cplx r = detail::residual_at(st, y, zt);
            cplx dr = -1.0 + st.eps / zt;
            cplx zp = 1.0;
            for (int j = 1; j <= st.K; ++j) {
                zp /= zt;
                dr += st.eps * st.beta_tail[j - 1] * double(j) * zp / zt;
            }
            const cplx step = r / dr;
            zt -= step;
            if (std::abs(step) < 1e-15 * std::abs(zt)) break;
        }
    }
    out.ztilde = zt;
    out.residual = std::abs(detail::residual_at(st, y, zt));
    return out;
}

// ---------------------------------------------------------------------------
// Mesoscopic profile on the curve x = 4c^2 t - beta t^sigma ln t
// ---------------------------------------------------------------------------

struct MesoscopicPoint {
    double x;
    double v;
    double gamma;
    int n;
    double Q;
    double ztilde_y;
    double phase;
    double q;
};

inline MesoscopicPoint q_mesoscopic(double t, double sigma, double beta, int K,
                                    const StepProblem& prob) {
    const double c = prob.c;
    const double lnt = std::log(t);
    const double x = 4.0 * c * c * t - beta * std::pow(t, sigma) * lnt;
    const double v = beta * std::pow(t, sigma) * lnt / (4.0 * c * c * t);
    const double gamma = gamma_mesoscopic(t, sigma, beta, K, prob);
    const int n = rhp::soliton_index(gamma);
    const auto st = detail::solve_conformal(n, t, v, K, c);
    const double Q = st.Q.real();
    const double zy = st.u[0].real();
    const double phase = 2.0 * c * (x - 4.0 * c * c * t) + (2.0 * n + 1.5) * lnt +
                         2.0 * n * Q + 1.5 * std::log(2.0 * c * zy) -
                         std::lgamma(n + 1.0) - std::lgamma(n + 1.5) +
                         std::log(2.0 * M_PI) -
                         std::log(4.0 / (prob.h_star * prob.h_star));
    return {x, v, gamma, n, Q, zy, phase, 2.0 * c * detail::sech_stable(phase)};
}

} // namespace mkdv::asympt

#endif
