#ifndef MKDV_WHITHAM_HPP
#define MKDV_WHITHAM_HPP

// Modulation parameters of the elliptic wave region.  The pair (d, mu) solves
// the two implicit relations
//     int_0^1 (mu^2 - l^2 d^2) sqrt((1-l^2)/(c^2 - l^2 d^2)) dl = 0,
//     c^2/2 + xi = mu^2 + d^2/2,
// and the derived elliptic data (B, tau, Delta) are contour integrals over
// the bands [id, ic] and [0, id], reduced here to real integrals on the
// imaginary axis.  Sign conventions are fixed by requiring B >= 0 and
// tau < 0.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include "scattering.hpp"
#include "specfun.hpp"

namespace mkdv::whitham {

using cplx = std::complex<double>;

struct WhithamPoint {
    double d;
    double mu;
    double eta;   // 1 - d/c
};

struct EllipticData {
    double B;
    double tau;
    double delta;
    double tau_star;   // 4 pi^2 / tau
};

namespace detail {

// moments I_j = int_0^1 l^{2j} sqrt((1-l^2)/(c^2-l^2 d^2)) dl, j = 0, 1,
// integrated in w = 1 - l so every factor is cancellation-free:
// 1 - l^2 = w(2-w),  c^2 - l^2 d^2 = (c^2-d^2) + d^2 w(2-w).
inline void mu_moments(double d, double c, double& I0, double& I2) {
    const double gap = (c - d) * (c + d);
    specfun::QuadSpec spec;
    spec.alpha = 0.5;        // sqrt(w) vanishing at l = 1
    spec.beta = 0.0;
    spec.tol = 3e-14 / c;
    auto weight = [&](double w) {
        const double om = w * (2.0 - w);
        return std::sqrt(om / (gap + d * d * om));
    };
    I0 = specfun::quad_singular([&](cplx oa, cplx) { return cplx(weight(oa.real())); },
                                spec).real();
    I2 = specfun::quad_singular([&](cplx oa, cplx ob) {
             const double l = ob.real();     // 1 - w, exact near the smooth end
             return cplx(l * l * weight(oa.real()));
         }, spec).real();
}

} // namespace detail

// The unique nonnegative root mu of the first modulation relation.
inline double mu_of_d(double d, double c) {
    if (!(d >= 0.0 && d <= c)) throw std::domain_error("mu_of_d: need 0 <= d <= c");
    if (d == 0.0) return 0.0;
    double I0, I2;
    detail::mu_moments(d, c, I0, I2);
    return d * std::sqrt(I2 / I0);
}

inline double xi_of_d(double d, double c) {
    const double mu = mu_of_d(d, c);
    return mu * mu + 0.5 * d * d - 0.5 * c * c;
}

// Invert xi = xi(d) on [0, c]: bisection bracketed by monotonicity of xi(d),
// then a safeguarded secant polish.
inline WhithamPoint solve_whitham(double xi, double c) {
    const double xi_lo = -0.5 * c * c, xi_hi = c * c / 3.0;
    if (!(xi >= xi_lo && xi <= xi_hi))
        throw std::domain_error("solve_whitham: xi outside the elliptic region");
    if (xi == xi_hi) return {c, c / std::sqrt(3.0), 0.0};
    if (xi == xi_lo) return {0.0, 0.0, 1.0};

    double lo = 0.0, hi = c;
    double flo = xi_lo - xi, fhi = xi_hi - xi;  // exact endpoint residuals
    for (int it = 0; it < 70; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = xi_of_d(mid, c) - xi;
        if (fm == 0.0) { lo = hi = mid; break; }
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo < 1e-15 * c) break;
        // secant polish once the bracket is tight
        if (hi - lo < 1e-6 * c && std::abs(fhi - flo) > 0.0) {
            const double ds = lo - flo * (hi - lo) / (fhi - flo);
            if (ds > lo && ds < hi) {
                const double fs = xi_of_d(ds, c) - xi;
                if (std::abs(fs) < 1e-13 * c * c) { lo = hi = ds; break; }
                if ((fs > 0.0) == (fhi > 0.0)) {
                    hi = ds;
                    fhi = fs;
                } else {
                    lo = ds;
                    flo = fs;
                }
            }
        }
    }
    const double d = 0.5 * (lo + hi);
    return {d, mu_of_d(d, c), 1.0 - d / c};
}

// B(d) = 24 int_d^c (s^2 - mu^2) sqrt(s^2-d^2)/sqrt(c^2-s^2) ds  (>= 0),
// integrated in w = c - s:
//   c^2 - s^2 = w(2c-w),  s^2 - d^2 = ((c-d)-w)((c+d)-w).
inline double big_B(double d, double c) {
    if (!(d > 0.0 && d <= c)) throw std::domain_error("big_B: need 0 < d <= c");
    if (d == c) return 0.0;
    const double mu = mu_of_d(d, c);
    specfun::QuadSpec spec;
    spec.a = 0.0;
    spec.b = c - d;
    spec.alpha = -0.5;
    spec.beta = 0.5;
    spec.tol = 1e-13 * std::max(1.0, c * c * c);
    auto f = [&](cplx oa, cplx ob) {
        const double w = oa.real();          // distance below the edge c
        const double rem = ob.real();        // distance above d, = (c-d) - w
        const double s = c - w;
        const double band = rem * ((c + d) - w);
        return cplx(24.0 * (s * s - mu * mu) * std::sqrt(band / (w * (2.0 * c - w))));
    };
    return specfun::quad_singular(f, spec).real();
}

namespace detail {

// J1 = int_d^c ds / sqrt((c^2-s^2)(s^2-d^2)), in w = c - s
inline double band_J1(double d, double c, double tol) {
    specfun::QuadSpec spec;
    spec.a = 0.0;
    spec.b = c - d;
    spec.alpha = -0.5;
    spec.beta = -0.5;
    spec.tol = tol;
    auto f = [&](cplx oa, cplx ob) {
        const double w = oa.real();
        return cplx(1.0 / std::sqrt(w * (2.0 * c - w) * ob.real() * ((c + d) - w)));
    };
    return specfun::quad_singular(f, spec).real();
}

// J0 = int_0^d ds / sqrt((c^2-s^2)(d^2-s^2)), in w = d - s
inline double gap_J0(double d, double c, double tol) {
    specfun::QuadSpec spec;
    spec.a = 0.0;
    spec.b = d;
    spec.alpha = -0.5;
    spec.beta = 0.0;
    spec.tol = tol;
    auto f = [&](cplx oa, cplx) {
        const double w = oa.real();
        return cplx(1.0 / std::sqrt(w * (2.0 * d - w) * ((c - d) + w) * ((c + d) - w)));
    };
    return specfun::quad_singular(f, spec).real();
}

} // namespace detail

inline double tau_of_d(double d, double c) {
    if (!(d > 0.0 && d < c)) throw std::domain_error("tau_of_d: need 0 < d < c");
    const double J1 = detail::band_J1(d, c, 1e-13 * std::max(1.0, 1.0 / c));
    const double J0 = detail::gap_J0(d, c, 1e-13 * std::max(1.0, 1.0 / c));
    return -M_PI * J1 / J0;
}

inline double tau_star_of_d(double d, double c) {
    return 4.0 * M_PI * M_PI / tau_of_d(d, c);
}

// log of the boundary product a_+ a_- on the band, from the scattering
// module; parametrized by the distance w = c - s to the upper edge, where the
// product carries its quarter-root singularity.
inline cplx log_a_product_pure_step(double w, double c) {
    const cplx p =
        scattering::a_from_gamma(
            scattering::gamma_quartic_boundary_edge(w, c, scattering::Side::right)) *
        scattering::a_from_gamma(
            scattering::gamma_quartic_boundary_edge(w, c, scattering::Side::left));
    return std::log(p);
}

// Delta(d) with a caller-supplied boundary product (pure step by default).
// The hook receives w = c - s.
inline double delta_of_d(double d, double c,
                         const std::function<cplx(double)>& log_aprod_edge = {}) {
    if (!(d > 0.0 && d < c)) throw std::domain_error("delta_of_d: need 0 < d < c");
    auto lap = log_aprod_edge
                   ? log_aprod_edge
                   : std::function<cplx(double)>(
                         [c](double w) { return log_a_product_pure_step(w, c); });
    specfun::QuadSpec spec;
    spec.a = 0.0;
    spec.b = c - d;
    spec.alpha = -0.5;   // w^{-1/2} at the edge, plus the log from the product
    spec.beta = -0.5;
    spec.tol = 1e-11;
    auto f = [&](cplx oa, cplx ob) {
        const double w = oa.real();
        const double den = std::sqrt(w * (2.0 * c - w) * ob.real() * ((c + d) - w));
        return lap(w) / den;
    };
    const cplx IL = specfun::quad_singular(f, spec);
    const double J0 = detail::gap_J0(d, c, 1e-12);
    return -(IL / J0).real();
}

inline EllipticData elliptic_data(double d, double c) {
    const double tau = tau_of_d(d, c);
    return {big_B(d, c), tau, delta_of_d(d, c), 4.0 * M_PI * M_PI / tau};
}

// ---------------------------------------------------------------------------
// Small-eta series for B and v, and the inversion eta(v).
// ---------------------------------------------------------------------------

// P_j: B/pi = 8 c^3 eta (1 + sum_j eta^j P_j(eta) + ...)
inline double series_P(int j, double eta) {
    const double L = std::log(eta);
    const double l2 = std::log(2.0);
    switch (j) {
        case 1:
            return -(2.0 + 0.5 * std::log(eta / 8.0));
        case 2:
            return (13.0 - 42.0 * l2 + 36.0 * l2 * l2 +
                    2.0 * L * (7.0 - 12.0 * l2 + 2.0 * L)) / 16.0;
        default:
            throw std::domain_error("series_P: only j = 1, 2 are tabulated");
    }
}

// Q_j: v = eta ln(8e/eta) + sum_{j>=2} eta^j Q_j(eta) + ...
inline double series_Q(int j, double eta) {
    const double L = std::log(eta);
    const double l2 = std::log(2.0);
    switch (j) {
        case 2:
            return 0.5 * (-2.0 - 9.0 * l2 + 9.0 * l2 * l2 +
                          (3.0 + std::log(eta / 64.0)) * L);
        case 3:
            return (9.0 - 6.0 * l2 + 18.0 * l2 * l2 * (-5.0 + 6.0 * l2)) / 16.0 +
                   (L / 8.0) * (1.0 + 30.0 * l2 - 54.0 * l2 * l2) +
                   (L * L / 8.0) * (-5.0 + 18.0 * l2) - L * L * L / 4.0;
        default:
            throw std::domain_error("series_Q: only j = 2, 3 are tabulated");
    }
}

inline double v_of_eta(double eta, int M) {
    if (!(M >= 1 && M <= 3)) throw std::domain_error("v_of_eta: M must be 1, 2, or 3");
    if (eta == 0.0) return 0.0;
    double v = eta * std::log(8.0 * M_E / eta);
    for (int j = 2; j <= M; ++j) v += std::pow(eta, j) * series_Q(j, eta);
    return v;
}

// Unique small root of v = v_of_eta(eta, M); safeguarded Newton seeded at
// v / ln(1/v).
inline double eta_from_v(double v, int M) {
    if (v == 0.0) return 0.0;
    if (!(v > 0.0 && v <= 0.2))
        throw std::domain_error("eta_from_v: v outside the series regime (0, 0.2]");
    double lo = 0.0, hi = v;              // v_of_eta(v) > v for v < 1, root below v
    double eta = v / std::log(1.0 / v);
    if (!(eta > lo && eta < hi)) eta = 0.5 * v;
    for (int it = 0; it < 100; ++it) {
        const double fv = v_of_eta(eta, M) - v;
        if (std::abs(fv) < 1e-15 * (1.0 + v)) break;
        if (fv > 0.0) hi = eta; else lo = eta;
        // Newton step on the M = 1 part dominates; add series derivative terms
        double dv = std::log(8.0 / eta);  // d/deta [eta ln(8e/eta)]
        for (int j = 2; j <= M; ++j) {
            const double h = 1e-6 * eta;
            dv += (std::pow(eta + h, j) * series_Q(j, eta + h) -
                   std::pow(eta - h, j) * series_Q(j, eta - h)) / (2.0 * h);
        }
        double next = eta - fv / dv;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        eta = next;
    }
    return eta;
}

// ---------------------------------------------------------------------------
// Boundedness diagnostic for the phase-count relation along the curve
// x = 4 c^2 t - beta t^sigma ln t.
// ---------------------------------------------------------------------------

struct ZLemmaResult {
    double value;      // 8 c^3 v t + (z + 1/2)(ln(z/2t) - (Qhat + 1))
    double z;
    double qhat_p1;    // ln(B/2pi) + 8 c^3 v pi / B
};

inline ZLemmaResult z_lemma_check(double t, double sigma, double beta, double c) {
    const double v = beta * std::pow(t, sigma) * std::log(t) / (4.0 * c * c * t);
    const double xi = c * c * (1.0 - v) / 3.0;
    const WhithamPoint wp = solve_whitham(xi, c);
    const double B = big_B(wp.d, c);
    const double delta = delta_of_d(wp.d, c);
    const double z = (t * B + delta) / M_PI;
    const double qhat_p1 = std::log(B / (2.0 * M_PI)) + 8.0 * c * c * c * v * M_PI / B;
    const double val = 8.0 * c * c * c * v * t +
                       (z + 0.5) * (std::log(z / (2.0 * t)) - qhat_p1);
    return {val, z, qhat_p1};
}

} // namespace mkdv::whitham

#endif
