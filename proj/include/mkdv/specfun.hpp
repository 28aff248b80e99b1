#ifndef MKDV_SPECFUN_HPP
#define MKDV_SPECFUN_HPP

// Special functions and quadrature underpinning the rest of the library:
//   * theta         -- one-dimensional theta series with Re(tau) < 0
//   * quad_singular -- adaptive Gauss--Kronrod on a straight segment with
//                      declared algebraic endpoint singularities
//   * airy_ai       -- Airy function of a complex argument, with derivative

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>
#include <vector>

#include "errors.hpp"

namespace mkdv::specfun {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Theta series  Theta(z, tau) = sum_m exp(tau m^2 / 2 + z m),  Re tau < 0.
// ---------------------------------------------------------------------------

struct ThetaArgs {
    cplx z;
    cplx tau;
    double tol = 1e-12;
};

// Truncation order M such that exp(Re(tau) M^2/2 + |Re z| M) < tol.
inline int theta_truncation_order(const ThetaArgs& a) {
    const double r = -a.tau.real();       // > 0
    const double s = std::abs(a.z.real());
    const double L = std::log(1.0 / a.tol) + 4.0; // margin for summing the tail
    double M = (s + std::sqrt(s * s + 2.0 * r * L)) / r;
    return static_cast<int>(std::ceil(M)) + 2;
}

inline cplx theta(const ThetaArgs& a) {
    if (!(a.tau.real() < 0.0))
        throw std::domain_error("theta: series requires Re(tau) < 0");
    const int M = theta_truncation_order(a);
    if (M > 20'000'000)
        throw std::domain_error("theta: truncation order exceeds budget (tau too close to 0)");
    cplx sum = 1.0;
    for (int m = 1; m <= M; ++m) {
        const cplx q = 0.5 * a.tau * static_cast<double>(m) * static_cast<double>(m);
        sum += std::exp(q + a.z * static_cast<double>(m));
        sum += std::exp(q - a.z * static_cast<double>(m));
    }
    return sum;
}

inline cplx theta(cplx z, cplx tau, double tol = 1e-12) {
    return theta(ThetaArgs{z, tau, tol});
}

// ---------------------------------------------------------------------------
// Adaptive Gauss--Kronrod quadrature with endpoint singularity removal.
//
// Integrates f along the straight segment [a, b] (complex endpoints allowed).
// The integrand may behave like (x-a)^alpha near a and (b-x)^beta near b,
// alpha, beta > -1; the substitution u = s^p removes the declared power so
// the transformed integrand is regular there.  Logarithmic factors on top of
// the algebraic ones are absorbed by bisection.
// ---------------------------------------------------------------------------

struct QuadSpec {
    cplx a = 0.0;
    cplx b = 1.0;
    double alpha = 0.0;   // endpoint exponent at a
    double beta = 0.0;    // endpoint exponent at b
    double tol = 1e-12;   // absolute tolerance
    int max_depth = 52;
};

namespace detail {

// 15-point Kronrod / 7-point Gauss pair (QUADPACK constants).
inline constexpr double gk_x[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
inline constexpr double gk_wk[8] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
inline constexpr double gk_wg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
    0.4179591836734694};

template <class F>
inline void gk15(const F& f, double lo, double hi, cplx& kronrod, double& err) {
    const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    cplx g = 0.0, k = 0.0;
    for (int i = 0; i < 8; ++i) {
        if (i == 7) {
            const cplx v = f(c);
            k += gk_wk[i] * v;
            g += gk_wg[3] * v;
        } else {
            const cplx v = f(c - h * gk_x[i]) + f(c + h * gk_x[i]);
            k += gk_wk[i] * v;
            if (i % 2 == 1) g += gk_wg[i / 2] * v;
        }
    }
    kronrod = h * k;
    err = std::abs(h * (k - g));
}

struct QuadCell {
    double lo, hi;
    cplx val;
    double err;
    int depth;
};

// Adaptive bisection driven by the Kronrod-minus-Gauss estimate.  The target
// is absolute, with a floor at machine-relative level of the running sum.
template <class F>
inline cplx adaptive_gk(const F& f, double lo, double hi, double tol, int max_depth) {
    auto by_err = [](const QuadCell& a, const QuadCell& b) { return a.err < b.err; };
    cplx v0;
    double e0;
    gk15(f, lo, hi, v0, e0);
    std::vector<QuadCell> cells{{lo, hi, v0, e0, 0}};
    double total_err = e0;
    double total_mag = std::abs(v0);
    for (;;) {
        if (total_err <= tol || total_err <= 4e-16 * total_mag) break;
        std::pop_heap(cells.begin(), cells.end(), by_err);
        QuadCell cell = cells.back();
        cells.pop_back();
        if (cell.depth >= max_depth || cells.size() > 200000) {
            cells.push_back(cell);
            cplx val = 0.0;
            for (const auto& c : cells) val += c.val;
            throw accuracy_error("quad_singular: refinement depth exhausted", val, total_err);
        }
        const double mid = 0.5 * (cell.lo + cell.hi);
        QuadCell left{cell.lo, mid, 0.0, 0.0, cell.depth + 1};
        QuadCell right{mid, cell.hi, 0.0, 0.0, cell.depth + 1};
        gk15(f, left.lo, left.hi, left.val, left.err);
        gk15(f, right.lo, right.hi, right.val, right.err);
        total_err += left.err + right.err - cell.err;
        total_mag += std::abs(left.val) + std::abs(right.val) - std::abs(cell.val);
        cells.push_back(left);
        std::push_heap(cells.begin(), cells.end(), by_err);
        cells.push_back(right);
        std::push_heap(cells.begin(), cells.end(), by_err);
    }
    cplx val = 0.0;
    for (const auto& c : cells) val += c.val;
    return val;
}

// Power p of the substitution u = s^p flattening u^alpha du at u = 0.
inline double sub_power(double alpha) {
    const double two_ap1 = 2.0 * (alpha + 1.0);
    if (std::abs(two_ap1 - std::round(two_ap1)) < 1e-12) return 2.0; // half-integer family
    return 2.0 / (alpha + 1.0);
}

} // namespace detail

// The integrand is called either as f(x) or, when it accepts two arguments,
// as f(oa, ob) with the exact offsets oa = x - a and ob = b - x along the
// segment.  The offset form lets integrands with endpoint singularities avoid
// re-deriving tiny distances by cancellation.
template <class F>
inline cplx quad_singular(const F& f, const QuadSpec& spec) {
    if (!(spec.tol > 0.0)) throw std::domain_error("quad_singular: tolerance must be positive");
    if (!(spec.alpha > -1.0) || !(spec.beta > -1.0))
        throw std::domain_error("quad_singular: endpoint exponents must exceed -1");

    const cplx d = spec.b - spec.a;
    const double pa = detail::sub_power(spec.alpha);
    const double pb = detail::sub_power(spec.beta);
    const double half_tol = 0.5 * spec.tol;

    auto eval = [&](double u_from_a, double u_from_b) -> cplx {
        if constexpr (std::is_invocable_v<const F&, cplx, cplx>) {
            return f(d * u_from_a, d * u_from_b);
        } else {
            // evaluate from whichever endpoint is nearer to keep the offset exact
            return (u_from_a <= u_from_b) ? f(spec.a + d * u_from_a)
                                          : f(spec.b - d * u_from_b);
        }
    };

    // left half: u = (1/2) s^pa; right half: 1 - u = (1/2) s^pb.
    // GK nodes are strictly interior, so s = 0 (the singular endpoint) is
    // never evaluated.
    auto left = [&](double s) -> cplx {
        const double u = 0.5 * std::pow(s, pa);
        return eval(u, 1.0 - u) * d * (0.5 * pa * std::pow(s, pa - 1.0));
    };
    auto right = [&](double s) -> cplx {
        const double h = 0.5 * std::pow(s, pb);
        return eval(1.0 - h, h) * d * (0.5 * pb * std::pow(s, pb - 1.0));
    };

    cplx vl = 0.0, vr = 0.0;
    double achieved = 0.0;
    bool exhausted = false;
    try {
        vl = detail::adaptive_gk(left, 0.0, 1.0, half_tol, spec.max_depth);
    } catch (const accuracy_error& e) {
        vl = e.estimate();
        achieved += e.achieved();
        exhausted = true;
    }
    try {
        vr = detail::adaptive_gk(right, 0.0, 1.0, half_tol, spec.max_depth);
    } catch (const accuracy_error& e) {
        vr = e.estimate();
        achieved += e.achieved();
        exhausted = true;
    }
    if (exhausted)
        throw accuracy_error("quad_singular: refinement depth exhausted", vl + vr, achieved);
    return vl + vr;
}

// ---------------------------------------------------------------------------
// Airy function Ai(z) and Ai'(z) for complex z.
//
// |z| <= airy_split: Maclaurin series in extended precision (the series is
// cancellation-limited on the positive real side).  Beyond: the asymptotic
// expansion, rotated into its sector of validity through the connection
// identity v0 - i v1 + i v_{-1} = 0.
// ---------------------------------------------------------------------------

struct AiryValue {
    cplx ai;
    cplx aip;
};

inline constexpr double airy_split = 8.0;

namespace detail {

using lcplx = std::complex<long double>;

inline void airy_series_ld(lcplx z, lcplx& ai_out, lcplx& aip_out) {
    static const long double c1 = 0.35502805388781723926L;  // Ai(0)
    static const long double c2 = 0.25881940379280679841L;  // -Ai'(0)
    const lcplx z2 = z * z;
    const lcplx z3 = z2 * z;

    // f  = sum f_k z^{3k},   f_k = f_{k-1} / ((3k)(3k-1))
    // g  = sum g_k z^{3k+1}, g_k = g_{k-1} / ((3k+1)(3k))
    // f' = sum 3k f_k z^{3k-1},  g' = sum (3k+1) g_k z^{3k}
    lcplx f = 1.0L, g = z, fp = 0.0L, gp = 1.0L;
    long double cf = 1.0L, cg = 1.0L;
    lcplx zp = 1.0L;  // z^{3(k-1)} entering iteration k
    for (int k = 1; k <= 400; ++k) {
        const long double a = 3.0L * k;
        cf /= a * (a - 1.0L);
        cg /= a * (a + 1.0L);
        const lcplx z3k_m1 = zp * z2;   // z^{3k-1}
        const lcplx z3k = z3k_m1 * z;   // z^{3k}
        const lcplx tf = cf * z3k;
        const lcplx tg = cg * z3k * z;  // z^{3k+1}
        f += tf;
        g += tg;
        fp += cf * a * z3k_m1;
        gp += cg * (a + 1.0L) * z3k;
        zp *= z3;
        if (std::abs(tf) + std::abs(tg) < 1e-42L * (std::abs(f) + std::abs(g)) && k > 3)
            break;
    }
    ai_out = c1 * f - c2 * g;
    aip_out = c1 * fp - c2 * gp;
}

inline AiryValue airy_series(cplx zz) {
    lcplx ai, aip;
    airy_series_ld(lcplx(zz.real(), zz.imag()), ai, aip);
    return {cplx(static_cast<double>(ai.real()), static_cast<double>(ai.imag())),
            cplx(static_cast<double>(aip.real()), static_cast<double>(aip.imag()))};
}

// Asymptotic expansion; accurate for |arg z| <= 2*pi/3 once |z| > airy_split.
inline AiryValue airy_asymptotic(cplx z) {
    static const double sqrt_pi = 1.7724538509055160273;
    const cplx z14 = std::pow(z, 0.25);
    const cplx zeta = (2.0 / 3.0) * z * std::sqrt(z);
    cplx su = 1.0, sv = 1.0;
    double uk = 1.0;
    cplx pw = 1.0;
    double prev = std::numeric_limits<double>::max();
    for (int k = 1; k <= 60; ++k) {
        uk *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
              (k * 216.0 * (2.0 * k - 1.0));
        const double vk = uk * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        pw /= -zeta;
        const double mag = uk * std::abs(pw);
        if (mag > prev) break; // stop at the smallest term
        prev = mag;
        su += uk * pw;
        sv += vk * pw;
        if (mag < 1e-18) break;
    }
    const cplx e = std::exp(-zeta);
    return {e / (2.0 * sqrt_pi * z14) * su, -z14 * e / (2.0 * sqrt_pi) * sv};
}

} // namespace detail

inline AiryValue airy_ai(cplx z) {
    if (std::abs(z) <= airy_split) return detail::airy_series(z);
    const double arg = std::arg(z);
    if (std::abs(arg) <= 2.0 * M_PI / 3.0) return detail::airy_asymptotic(z);
    // connection: Ai(z) = i e^{-i pi/6} Ai(z w) - i e^{i pi/6} Ai(z / w),  w = e^{-2 pi i/3}
    const cplx w1 = std::polar(1.0, -2.0 * M_PI / 3.0);
    const cplx w2 = std::polar(1.0, 2.0 * M_PI / 3.0);
    const specfun::AiryValue m = detail::airy_asymptotic(z * w1);
    const specfun::AiryValue p = detail::airy_asymptotic(z * w2);
    const cplx i(0.0, 1.0);
    const cplx e1 = std::polar(1.0, -M_PI / 6.0), e2 = std::polar(1.0, M_PI / 6.0);
    return {i * e1 * m.ai - i * e2 * p.ai,
            i * e1 * w1 * m.aip - i * e2 * w2 * p.aip};
}

} // namespace mkdv::specfun

#endif
