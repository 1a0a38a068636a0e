#pragma once

// Complex error function, Faddeeva function, and the sine/cosine integrals
// ci(z) = -∫_z^∞ cos(u)/u du and si(z) = -∫_z^∞ sin(u)/u du = Si(z) - π/2.
//
// Accuracy targets (double precision):
//   faddeeva      relative 1e-12 on |Re z|, |Im z| <= 10
//   erf_complex   relative 1e-12 on |z| <= 10 away from the complex zeros
//   cosint/sinint relative 1e-11 on 1e-3 <= |z| <= 1e3
// All functions are pure and thread-safe.

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "qbm/error.hpp"

namespace qbm::specialfn {

using complex = std::complex<double>;

/// Auxiliary functions of the sine/cosine integrals:
///   ci(z) =  f(z) sin z - g(z) cos z
///   si(z) = -f(z) cos z - g(z) sin z
/// Both are O(1/|z|) in the right half plane and carry none of the
/// e^{|Im z|} growth of ci and si themselves.
struct CiSiAux {
    complex f;
    complex g;
};

namespace detail {

inline constexpr double pi = std::numbers::pi;
inline constexpr double euler_gamma = std::numbers::egamma;
inline constexpr double two_over_sqrt_pi = 2.0 * std::numbers::inv_sqrtpi;

// |z| below which ci/si use their Maclaurin series.
inline constexpr double cisi_series_radius = 4.0;

inline void require_finite(complex v, const char* what)
{
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw overflow_error(std::string(what) + ": result not representable");
    }
}

inline complex erf_series(complex z)
{
    const complex z2 = z * z;
    complex term = z;
    complex sum = z;
    for (int n = 1; n < 400; ++n) {
        term *= -z2 / static_cast<double>(n);
        const complex add = term / static_cast<double>(2 * n + 1);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// Sum_{k>=1} (-z^2)^k / (2k (2k)!), the entire part of Ci.
inline complex ci_entire_part(complex z)
{
    const complex mz2 = -z * z;
    complex term = 1.0;
    complex sum = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= mz2 / static_cast<double>((2 * k - 1) * (2 * k));
        const complex add = term / static_cast<double>(2 * k);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

// Si(z) = Sum_{k>=0} (-1)^k z^{2k+1} / ((2k+1)(2k+1)!)
inline complex si_entire_series(complex z)
{
    const complex mz2 = -z * z;
    complex term = z;
    complex sum = z;
    for (int k = 1; k < 200; ++k) {
        term *= mz2 / static_cast<double>((2 * k) * (2 * k + 1));
        const complex add = term / static_cast<double>(2 * k + 1);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return sum;
}

inline complex ci_series(complex z)
{
    return euler_gamma + std::log(z) + ci_entire_part(z);
}

inline complex e1_series(complex zeta)
{
    // E1(ζ) = -γ - ln ζ - Σ_{k>=1} (-ζ)^k / (k k!)
    const complex mz = -zeta;
    complex term = 1.0;
    complex sum = 0.0;
    for (int k = 1; k < 500; ++k) {
        term *= mz / static_cast<double>(k);
        const complex add = term / static_cast<double>(k);
        sum += add;
        if (std::abs(add) <= 1e-17 * std::abs(sum)) break;
    }
    return -euler_gamma - std::log(zeta) - sum;
}

/// e^ζ E1(ζ) on the principal branch; on the negative real axis the value
/// is the limit from the side selected by the sign of Im ζ (signed zero).
inline complex e1_scaled(complex zeta)
{
    const double mag = std::abs(zeta);
    if (mag == 0.0) throw branch_cut_error("E1: pole at 0");

    const bool near_negative_axis = zeta.real() < -2.0 * std::abs(zeta.imag());
    const bool left = zeta.real() < 0.0;

    if (left && (mag <= 5.0 || (near_negative_axis && mag < 40.0))) {
        return std::exp(zeta) * e1_series(zeta);
    }
    if (near_negative_axis) {
        // |ζ| >= 40: asymptotic series plus the subdominant Stokes term.
        complex term = 1.0 / zeta;
        complex sum = term;
        double last = std::abs(term);
        for (int k = 1; k < 200; ++k) {
            const complex next = term * (-static_cast<double>(k) / zeta);
            const double mag_next = std::abs(next);
            if (mag_next > last) break;
            term = next;
            sum += term;
            last = mag_next;
            if (mag_next <= 1e-17 * std::abs(sum)) break;
        }
        const double side = std::signbit(zeta.imag()) ? 1.0 : -1.0;
        return sum + complex(0.0, side * pi) * std::exp(zeta);
    }

    // Continued fraction, modified Lentz.
    constexpr double tiny = 1e-300;
    complex b = zeta + 1.0;
    complex c = 1.0 / tiny;
    complex d = 1.0 / b;
    complex h = d;
    for (int i = 1; i < 20000; ++i) {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const complex del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h;
    }
    throw numeric_error("E1: continued fraction did not converge");
}

// f and g for z in the closed first quadrant, |z| large enough that the
// exponential-integral route is accurate.
inline CiSiAux cisi_aux_first_quadrant(complex z)
{
    // iz = -y + ix is built explicitly so that Im(iz) = +0 on the imaginary axis.
    const complex iz(-z.imag(), z.real());
    const complex miz(z.imag(), -z.real());
    const complex ep = e1_scaled(iz);
    const complex em = e1_scaled(miz);
    return {complex(0.0, 0.5) * (ep - em), 0.5 * (ep + em)};
}

inline CiSiAux cisi_aux_asymptotic(complex z)
{
    if (z.imag() >= 0.0) return cisi_aux_first_quadrant(z);
    const CiSiAux up = cisi_aux_first_quadrant(std::conj(z));
    return {std::conj(up.f), std::conj(up.g)};
}

inline complex ci_asymptotic(complex z)
{
    const CiSiAux a = cisi_aux_asymptotic(z);
    return a.f * std::sin(z) - a.g * std::cos(z);
}

inline complex si_asymptotic(complex z)
{
    const CiSiAux a = cisi_aux_asymptotic(z);
    return -a.f * std::cos(z) - a.g * std::sin(z);
}

}  // namespace detail

/// Faddeeva function w(z) = e^{-z²} erfc(-iz).
///
/// Upper half plane by the Gautschi / Poppe–Wijers scheme (Taylor series
/// near the origin, truncated Laplace continued fraction with the Gautschi
/// summation parameter elsewhere); lower half plane by
/// w(z) = 2 e^{-z²} - w(-z).
inline complex faddeeva(complex z)
{
    constexpr double factor = detail::two_over_sqrt_pi;
    const double xi = z.real();
    const double yi = z.imag();
    const double xabs = std::abs(xi);
    const double yabs = std::abs(yi);
    const double x = xabs / 6.3;
    const double y = yabs / 4.4;

    double qrho = x * x + y * y;
    double xquad = xabs * xabs - yabs * yabs;
    const double yquad = 2.0 * xabs * yabs;
    const bool taylor = qrho < 0.085264;

    double u = 0.0, v = 0.0, u2 = 0.0, v2 = 0.0;
    if (taylor) {
        qrho = (1.0 - 0.85 * y) * std::sqrt(qrho);
        const int n = static_cast<int>(std::lround(6.0 + 72.0 * qrho));
        int j = 2 * n + 1;
        double xsum = 1.0 / j;
        double ysum = 0.0;
        for (int i = n; i >= 1; --i) {
            j -= 2;
            const double xaux = (xsum * xquad - ysum * yquad) / i;
            ysum = (xsum * yquad + ysum * xquad) / i;
            xsum = xaux + 1.0 / j;
        }
        const double u1 = -factor * (xsum * yabs + ysum * xabs) + 1.0;
        const double v1 = factor * (xsum * xabs - ysum * yabs);
        const double daux = std::exp(-xquad);
        u2 = daux * std::cos(yquad);
        v2 = -daux * std::sin(yquad);
        u = u1 * u2 - v1 * v2;
        v = u1 * v2 + v1 * u2;
    } else {
        double h = 0.0;
        double h2 = 0.0;
        double qlambda = 0.0;
        int kapn = 0;
        int nu = 0;
        if (qrho > 1.0) {
            qrho = std::sqrt(qrho);
            nu = static_cast<int>(3.0 + 1442.0 / (26.0 * qrho + 77.0));
        } else {
            qrho = (1.0 - y) * std::sqrt(1.0 - qrho);
            h = 1.88 * qrho;
            h2 = 2.0 * h;
            kapn = static_cast<int>(std::lround(7.0 + 34.0 * qrho));
            nu = static_cast<int>(std::lround(16.0 + 26.0 * qrho));
        }
        const bool summed = h > 0.0;
        if (summed) qlambda = std::pow(h2, kapn);

        double rx = 0.0, ry = 0.0, sx = 0.0, sy = 0.0;
        for (int n = nu; n >= 0; --n) {
            const double np1 = n + 1.0;
            double tx = yabs + h + np1 * rx;
            const double ty = xabs - np1 * ry;
            const double c = 0.5 / (tx * tx + ty * ty);
            rx = c * tx;
            ry = c * ty;
            if (summed && n <= kapn) {
                tx = qlambda + sx;
                sx = rx * tx - ry * sy;
                sy = ry * tx + rx * sy;
                qlambda /= h2;
            }
        }
        if (summed) {
            u = factor * sx;
            v = factor * sy;
        } else {
            u = factor * rx;
            v = factor * ry;
        }
        if (yabs == 0.0) u = std::exp(-xabs * xabs);
    }

    if (yi < 0.0) {
        if (taylor) {
            u2 *= 2.0;
            v2 *= 2.0;
        } else {
            xquad = -xquad;
            if (xquad > 708.0) throw overflow_error("faddeeva: e^{-z^2} overflows in the lower half plane");
            const double w1 = 2.0 * std::exp(xquad);
            u2 = w1 * std::cos(yquad);
            v2 = -w1 * std::sin(yquad);
        }
        u = u2 - u;
        v = v2 - v;
        if (xi > 0.0) v = -v;
    } else if (xi < 0.0) {
        v = -v;
    }
    const complex result(u, v);
    detail::require_finite(result, "faddeeva");
    return result;
}

/// Error function at complex argument, erf(z) = 2/√π ∫_0^z e^{-t²} dt.
///
/// Throws overflow_error when e^{(Im z)² - (Re z)²} leaves the double range.
/// For |z| >= 1e6 close to the real direction the saturated value ±1 is
/// returned.
inline complex erf_complex(complex z)
{
    const double mag = std::abs(z);
    if (mag >= 1e6) {
        if (std::abs(z.imag()) < std::abs(z.real()) &&
            (z.real() * z.real() - z.imag() * z.imag()) > 750.0) {
            return z.real() > 0.0 ? complex(1.0, 0.0) : complex(-1.0, 0.0);
        }
        throw overflow_error("erf_complex: |z| >= 1e6 off the real direction");
    }
    if (mag < 2.0) return detail::erf_series(z);

    const double growth = z.imag() * z.imag() - z.real() * z.real();
    if (growth > 708.0) throw overflow_error("erf_complex: e^{-z^2} overflows; use faddeeva");

    // erf z = 1 - e^{-z²} w(iz) for Re z >= 0, odd extension otherwise.
    const bool flip = z.real() < 0.0;
    const complex zz = flip ? -z : z;
    const complex iz(-zz.imag(), zz.real());
    const complex value = 1.0 - std::exp(-zz * zz) * faddeeva(iz);
    detail::require_finite(value, "erf_complex");
    return flip ? -value : value;
}

/// Auxiliary f, g of the sine/cosine integrals (see CiSiAux), Re z >= 0, z != 0.
inline CiSiAux cisi_aux(complex z)
{
    if (z.real() < 0.0) throw domain_error("cisi_aux: requires Re z >= 0");
    if (z == complex(0.0, 0.0)) throw branch_cut_error("cisi_aux: pole at z = 0");
    if (std::abs(z) >= detail::cisi_series_radius) return detail::cisi_aux_asymptotic(z);

    const complex c = detail::ci_series(z);
    const complex s = detail::si_entire_series(z) - detail::pi / 2.0;
    const complex sn = std::sin(z);
    const complex cs = std::cos(z);
    return {c * sn - s * cs, -c * cs - s * sn};
}

/// Cosine integral ci(z) = γ + ln z + ∫_0^z (cos u - 1)/u du, principal branch,
/// cut along the negative real axis.
inline complex cosint(complex z)
{
    if (z == complex(0.0, 0.0)) throw branch_cut_error("cosint: pole at z = 0");
    if (z.imag() == 0.0 && z.real() < 0.0) throw branch_cut_error("cosint: z on the negative real axis");

    complex value;
    if (std::abs(z) < detail::cisi_series_radius) {
        value = detail::ci_series(z);
    } else if (z.real() >= 0.0) {
        value = detail::ci_asymptotic(z);
    } else {
        // ln z = ln(-z) ± iπ for Im z ≷ 0; the entire part is even.
        const double side = z.imag() > 0.0 ? 1.0 : -1.0;
        value = detail::ci_asymptotic(-z) + complex(0.0, side * detail::pi);
    }
    detail::require_finite(value, "cosint");
    return value;
}

/// Sine integral in the convention si(z) = Si(z) - π/2 (so si(x) → 0 as x → ∞).
inline complex sinint(complex z)
{
    complex value;
    if (std::abs(z) < detail::cisi_series_radius) {
        value = detail::si_entire_series(z) - detail::pi / 2.0;
    } else if (z.real() >= 0.0) {
        value = detail::si_asymptotic(z);
    } else {
        value = -detail::si_asymptotic(-z) - detail::pi;
    }
    detail::require_finite(value, "sinint");
    return value;
}

/// The entire sine integral Si(z) = ∫_0^z sin(u)/u du.
inline complex sine_integral(complex z)
{
    if (std::abs(z) < detail::cisi_series_radius) return detail::si_entire_series(z);
    return sinint(z) + detail::pi / 2.0;
}

/// cos(a) ci(u) + sin(a) si(u), evaluated without the e^{|Im a|} and
/// e^{|Im u|} cancellations of the direct form. Used for closed forms where
/// u - a is real and a is far off the real axis.
inline complex shifted_cisi(complex u, complex a)
{
    if (u.real() >= 0.0) {
        if (u == complex(0.0, 0.0)) throw branch_cut_error("shifted_cisi: pole at u = 0");
        const CiSiAux aux = cisi_aux(u);
        const complex d = u - a;
        return aux.f * std::sin(d) - aux.g * std::cos(d);
    }
    if (u.imag() == 0.0) throw branch_cut_error("shifted_cisi: u on the negative real axis");
    // Reflection: ci(u) = ci(-u) + iπσ, si(u) = -si(-u) - π, σ = sign Im u.
    const double sigma = u.imag() > 0.0 ? 1.0 : -1.0;
    return shifted_cisi(-u, -a) + complex(0.0, sigma * detail::pi) * std::exp(complex(0.0, sigma) * a);
}

}  // namespace qbm::specialfn
