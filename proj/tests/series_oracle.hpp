#pragma once

// Independent Maclaurin-series evaluations in binary128 arithmetic. Used as
// oracles for the double-precision special functions on |z| <= 5, where the
// alternating series lose up to ~11 digits to cancellation.

#include <cmath>
#include <complex>

namespace oracle {

using f128 = __float128;

struct c128 {
    f128 re = 0, im = 0;
    c128() = default;
    c128(f128 r, f128 i = 0) : re(r), im(i) {}
    explicit c128(std::complex<double> z) : re(z.real()), im(z.imag()) {}
    std::complex<double> to_double() const { return {static_cast<double>(re), static_cast<double>(im)}; }
    friend c128 operator+(c128 a, c128 b) { return {a.re + b.re, a.im + b.im}; }
    friend c128 operator-(c128 a, c128 b) { return {a.re - b.re, a.im - b.im}; }
    friend c128 operator*(c128 a, c128 b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
    friend c128 operator/(c128 a, f128 d) { return {a.re / d, a.im / d}; }
    f128 abs2() const { return re * re + im * im; }
};

inline double magnitude(c128 a) { return std::sqrt(static_cast<double>(a.abs2())); }

// π, √π and Euler's constant to 36 digits.
inline const f128 pi_q = 3.14159265358979323846264338327950288Q;
inline const f128 sqrt_pi_q = 1.77245385090551602729816748334114518Q;
inline const f128 euler_q = 0.577215664901532860606512090082402431Q;

/// Σ (-1)^n z^{2n+1} / (n! (2n+1)) · 2/√π, summed until terms drop below 1e-32 of the sum.
inline std::complex<double> erf_series(std::complex<double> zd)
{
    const c128 z(zd);
    const c128 mz2 = c128(0) - z * z;
    c128 term = z, sum = z;
    for (int n = 1; n < 1000; ++n) {
        term = term * mz2 / static_cast<f128>(n);
        const c128 add = term / static_cast<f128>(2 * n + 1);
        sum = sum + add;
        if (n > 5 && add.abs2() < 1e-64Q * sum.abs2()) break;
    }
    return (sum * c128(2 / sqrt_pi_q)).to_double();
}

/// Si(z) = Σ (-1)^n z^{2n+1} / ((2n+1)(2n+1)!)
inline c128 si_entire_q(std::complex<double> zd)
{
    const c128 z(zd);
    const c128 mz2 = c128(0) - z * z;
    c128 term = z, sum = z;
    for (int n = 1; n < 1000; ++n) {
        term = term * mz2 / static_cast<f128>((2 * n) * (2 * n + 1));
        const c128 add = term / static_cast<f128>(2 * n + 1);
        sum = sum + add;
        if (n > 5 && add.abs2() < 1e-64Q * sum.abs2()) break;
    }
    return sum;
}

inline std::complex<double> sine_integral_series(std::complex<double> z) { return si_entire_q(z).to_double(); }

/// si(z) = Si(z) - π/2
inline std::complex<double> sinint_series(std::complex<double> z)
{
    return (si_entire_q(z) - c128(pi_q / 2)).to_double();
}

/// ci(z) = γ + ln z + Σ_{k>=1} (-z²)^k / (2k (2k)!), principal logarithm.
inline std::complex<double> cosint_series(std::complex<double> zd)
{
    const c128 z(zd);
    const c128 mz2 = c128(0) - z * z;
    c128 term(1), sum(0);
    for (int k = 1; k < 1000; ++k) {
        term = term * mz2 / static_cast<f128>((2 * k - 1) * (2 * k));
        const c128 add = term / static_cast<f128>(2 * k);
        sum = sum + add;
        if (k > 5 && add.abs2() < 1e-64Q * (sum.abs2() + 1)) break;
    }
    // ln z has no cancellation; long double keeps it well below 1e-16.
    const std::complex<long double> lz = std::log(std::complex<long double>(zd.real(), zd.imag()));
    const c128 total = sum + c128(euler_q) + c128(static_cast<f128>(lz.real()), static_cast<f128>(lz.imag()));
    return total.to_double();
}

/// w(z) = e^{-z²}(1 - erf(-iz)) from the erf series; only for modest |z|.
inline std::complex<double> faddeeva_series(std::complex<double> zd)
{
    const std::complex<double> miz(zd.imag(), -zd.real());
    const c128 e(erf_series(miz));  // rounded to double, adequate for |z| <= 2
    const std::complex<long double> z2 = std::complex<long double>(zd) * std::complex<long double>(zd);
    const std::complex<long double> ex = std::exp(-z2);
    const c128 exq(static_cast<f128>(ex.real()), static_cast<f128>(ex.imag()));
    return (exq * (c128(1) - e)).to_double();
}

}  // namespace oracle
