#ifndef MKDV_SCATTERING_HPP
#define MKDV_SCATTERING_HPP

// Scattering data of the pure-step background and the cubic phase driving
// every jump matrix.  The transmission-related coefficient a and reflection
// coefficient r are explicit; their branch cut is exactly the segment
// [-ic, ic] and a -> 1 at infinity.

#include <cmath>
#include <complex>
#include <stdexcept>

namespace mkdv::scattering {

using cplx = std::complex<double>;

// Side from which a boundary value on the cut [-ic, ic] is taken.
enum class Side { right, left };   // right: Re k > 0, left: Re k < 0

// Step problem parameters and self-similar coordinates.
struct StepProblem {
    double c = 1.0;        // left background amplitude
    double h_star = 1.0;   // edge-singularity constant (1 for the pure step)
    double x = 0.0;
    double t = 1.0;

    StepProblem() = default;
    StepProblem(double c_, double h_star_ = 1.0, double x_ = 0.0, double t_ = 1.0)
        : c(c_), h_star(h_star_), x(x_), t(t_) {
        if (!(c > 0.0)) throw std::domain_error("StepProblem: c must be positive");
        if (h_star == 0.0) throw std::domain_error("StepProblem: h* must be nonzero");
    }

    double xi() const { return x / (12.0 * t); }
    double v() const { return 1.0 - 3.0 * xi() / (c * c); }
};

// Quartic root gamma(k) = ((k - ic)/(k + ic))^{1/4}, cut on [-ic, ic],
// gamma -> 1 at infinity.  The Moebius map sends the segment onto the
// negative real axis, so the principal branch gives exactly this cut.
inline cplx gamma_quartic(cplx k, double c) {
    const cplx ic(0.0, c);
    return std::exp(0.25 * std::log((k - ic) / (k + ic)));
}

// Boundary value of gamma on the cut at k = i s, |s| < c.
inline cplx gamma_quartic_boundary(double s, double c, Side side) {
    if (!(std::abs(s) < c)) throw std::domain_error("gamma boundary: |s| must be < c");
    const double mod = std::pow((c - s) / (c + s), 0.25);
    const double ph = (side == Side::left) ? M_PI / 4.0 : -M_PI / 4.0;
    return std::polar(mod, ph);
}

// Boundary value near the upper edge, parametrized by the distance w = c - s.
// Keeping w explicit preserves accuracy where s would round onto the edge.
inline cplx gamma_quartic_boundary_edge(double w, double c, Side side) {
    if (!(w > 0.0 && w < 2.0 * c)) throw std::domain_error("gamma edge: need 0 < w < 2c");
    const double mod = std::pow(w / (2.0 * c - w), 0.25);
    const double ph = (side == Side::left) ? M_PI / 4.0 : -M_PI / 4.0;
    return std::polar(mod, ph);
}

inline cplx a_from_gamma(cplx g) { return 0.5 * (g + 1.0 / g); }
inline cplx b_from_gamma(cplx g) { return 0.5 * (g - 1.0 / g); }

inline cplx a_pure(cplx k, double c) { return a_from_gamma(gamma_quartic(k, c)); }
inline cplx b_pure(cplx k, double c) { return b_from_gamma(gamma_quartic(k, c)); }

inline cplx a_pure_boundary(double s, double c, Side side) {
    return a_from_gamma(gamma_quartic_boundary(s, c, side));
}
inline cplx b_pure_boundary(double s, double c, Side side) {
    return b_from_gamma(gamma_quartic_boundary(s, c, side));
}

inline cplx r_pure(cplx k, double c) {
    const cplx g = gamma_quartic(k, c);
    const cplx den = g + 1.0 / g;
    if (std::abs(den) < 1e-300) throw std::domain_error("r_pure: evaluation at a zero of a");
    return (g - 1.0 / g) / den;
}

// sqrt(k^2 + c^2) with cut [-ic, ic], asymptotic to k at infinity.
inline cplx sqrt_kc(cplx k, double c) {
    return k * std::sqrt(1.0 + c * c / (k * k));
}

inline cplx f_pure(cplx k, double c) {
    return cplx(0.0, 2.0 / c) * sqrt_kc(k, c);
}

// On-cut value at k = i s (the limit from Re k > 0).
inline cplx f_pure_boundary(double s, double c) {
    return cplx(0.0, 2.0 / c) * std::sqrt(c * c - s * s);
}

// Cubic phase: theta(k, xi) = 4 k^3 + 12 xi k.
inline cplx phase_theta(cplx k, double xi) {
    return 4.0 * k * k * k + 12.0 * xi * k;
}

} // namespace mkdv::scattering

#endif
