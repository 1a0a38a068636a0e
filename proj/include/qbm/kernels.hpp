#pragma once

// Time-dependent master-equation coefficients
//   Δ(t) = 2∫_0^t dt' ∫ dω I(ω) cos(ωt') cos(t')
//   γ(t) = 2∫_0^t dt' ∫ dω (J(ω)/2) sin(ωt') sin(t')
// via the reduced single-frequency integral (t' done analytically), the
// literal nested integral, and closed forms for the high-temperature limit.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/error.hpp"
#include "qbm/parallel.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/specialfn.hpp"
#include "qbm/spectral.hpp"

namespace qbm {

struct Rates {
    double delta = 0.0;
    double gamma = 0.0;
    double delta_error = 0.0;
    double gamma_error = 0.0;
};

struct RateTrace {
    std::vector<double> times;
    std::vector<double> delta;
    std::vector<double> gamma;
    std::vector<double> lambda_up;    // Δ - γ
    std::vector<double> lambda_down;  // Δ + γ
};

namespace kernels_detail {

inline constexpr double pi = std::numbers::pi;

inline void check_tol(double tol)
{
    if (!(tol >= 1e-12 && tol <= 1e-4)) throw domain_error("tol must lie in [1e-12, 1e-4]");
}

inline void check_time(double t)
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("t must be finite and >= 0");
}

/// sin(x t)/x with its limit t at x = 0.
inline double sinc_t(double x, double t)
{
    const double xt = x * t;
    if (std::abs(xt) < 1e-3) {
        const double q = xt * xt;
        return t * (1.0 - q / 6.0 * (1.0 - q / 20.0));
    }
    return std::sin(xt) / x;
}

/// sin((ω-1)t)/(ω-1) - sin((ω+1)t)/(ω+1) for ω >= 0. Both terms are O(t) and
/// their difference O(t³), so small (ω+1)t uses the series
/// -4ω Σ_k (-1)^k t^{2k+1}/(2k+1)! Σ_{i<k} (ω+1)^{2i}(ω-1)^{2(k-1-i)}.
inline double sinc_difference(double w, double t)
{
    const double a2 = (w + 1.0) * (w + 1.0);
    if (a2 * t * t >= 0.25) return sinc_t(w - 1.0, t) - std::sin((w + 1.0) * t) / (w + 1.0);
    const double b2 = (w - 1.0) * (w - 1.0);
    const double t2 = t * t;
    double coeff = t * t2 / 6.0;  // t^{2k+1}/(2k+1)! at k = 1
    double pk = 1.0, b2k = b2;    // P_1 and (ω-1)^{2k}
    double sum = 0.0;
    for (int k = 1; k < 40; ++k) {
        const double term = coeff * pk;
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term <= 1e-17 * std::abs(sum)) break;
        pk = a2 * pk + b2k;
        b2k *= b2;
        coeff *= t2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return 4.0 * w * sum;
}

/// One term c·ω^e·e^{-ω/r} of an envelope dominating the integrand amplitude.
struct PowerTerm {
    double c;
    double e;
};

// Upper bound on Γ(a, x) for x > max(a - 1, 0).
inline double upper_gamma_bound(double a, double x)
{
    const double lead = std::exp((a - 1.0) * std::log(x) - x);
    if (a <= 1.0) return lead;
    return lead / (1.0 - (a - 1.0) / x);
}

// Envelope of I(ω) and J(ω)/2 in a given regime.
inline std::vector<PowerTerm> envelope(const SpectrumParams& p, const TemperatureRegime& temp)
{
    const double a2 = p.alpha() * p.alpha();
    const double pref = a2 * std::pow(p.r(), 1.0 - p.s());
    std::vector<PowerTerm> terms{{0.5 * pref, p.s()}};
    if (temp.mode() != TemperatureMode::Zero) terms.push_back({pref * temp.theta(), p.s() - 1.0});
    return terms;
}

inline double envelope_mass(const std::vector<PowerTerm>& terms, double r)
{
    double m = 0.0;
    for (const auto& pt : terms) m += pt.c * std::pow(r, pt.e + 1.0) * std::tgamma(pt.e + 1.0);
    return m;
}

inline double envelope_tail(const std::vector<PowerTerm>& terms, double r, double w)
{
    double m = 0.0;
    for (const auto& pt : terms) m += pt.c * std::pow(r, pt.e + 1.0) * upper_gamma_bound(pt.e + 1.0, w / r);
    return m;
}

/// Smallest frequency W (on a coarse ladder in units of r) whose tail mass,
/// weighted by kernel_bound(W), falls below target.
template <class KernelBound>
inline double trimmed_cutoff(const std::vector<PowerTerm>& terms, double r, double target, KernelBound kernel_bound,
                             double* tail = nullptr)
{
    double emax = 0.0;
    for (const auto& pt : terms) emax = std::max(emax, pt.e);
    double x = std::max(30.0, emax + 2.0);
    for (int iter = 0; iter < 400; ++iter, x += 5.0) {
        const double w = std::max(r * x, 3.0);
        const double bound = kernel_bound(w) * envelope_tail(terms, r, w);
        if (bound <= target || iter == 399) {
            if (tail) *tail = bound;
            return w;
        }
    }
    return r * x;
}

/// Exponent of the leading ω → 0 power of the Δ integrand.
inline double leading_exponent(const SpectrumParams& p, const TemperatureRegime& temp)
{
    return temp.mode() == TemperatureMode::Zero ? p.s() : p.s() - 1.0;
}

/// Power m of the substitution ω = ω1·v^m on the first panel that makes
/// ω^e·dω smooth enough for Gauss–Kronrod.
inline int first_panel_power(double e)
{
    if (e >= 0.0 && e == std::floor(e)) return 1;
    return std::max(2, static_cast<int>(std::ceil(1.0 / (e + 1.0))));
}

/// Frequency integrand amplitudes, avoiding the ω = 0 singular evaluations.
struct Amplitudes {
    const SpectrumParams& p;
    const TemperatureRegime& temp;

    double distribution(double w) const { return spectral_distribution(w, p, temp); }
    double half_density(double w) const { return 0.5 * spectral_density(w, p); }
};

/// Breakpoints on [0, W] aligned with 1 + k·h, first point 0, last W.
inline std::vector<double> aligned_breaks(double h, double w_end)
{
    std::vector<double> br{0.0};
    for (double k = std::ceil(-1.0 / h);; k += 1.0) {
        const double x = 1.0 + k * h;
        if (x >= w_end) break;
        if (x <= 0.0 || (br.size() == 1 && x < 0.5 * h)) continue;
        br.push_back(x);
    }
    if (br.size() > 1 && w_end - br.back() < 0.25 * h) br.back() = w_end;
    else br.push_back(w_end);
    return br;
}

/// ∫_0^W over breaks of g(ω), with the first panel [0, b1] mapped by ω = b1·v^m.
/// Returns a result whose panels are expressed in a shifted variable.
template <std::size_t N, class G>
quad::Result<N> integrate_frequency(G&& g, const std::vector<double>& breaks, int m, const quad::Options& opt)
{
    const double b1 = breaks[1];
    auto mapped = [&](double u) -> quad::vec<N> {
        if (u < 1.0) {
            const double vm1 = m == 1 ? 1.0 : std::pow(u, m - 1);
            const double w = b1 * vm1 * u;
            const double jac = m * b1 * vm1;
            quad::vec<N> v = g(w);
            for (auto& x : v) x *= jac;
            return v;
        }
        return g(b1 + (u - 1.0));
    };
    std::vector<double> ub;
    ub.reserve(breaks.size());
    ub.push_back(0.0);
    for (std::size_t i = 1; i < breaks.size(); ++i) ub.push_back(1.0 + (breaks[i] - b1));
    return quad::integrate<N>(mapped, std::span<const double>(ub), opt);
}

}  // namespace kernels_detail

/// Δ(t) and γ(t) together from the reduced single-frequency integrals
///   Δ(t) = ∫ I(ω)[sin((ω-1)t)/(ω-1) + sin((ω+1)t)/(ω+1)] dω
///   γ(t) = ∫ (J(ω)/2)[sin((ω-1)t)/(ω-1) - sin((ω+1)t)/(ω+1)] dω
/// with relative tolerance tol (absolute floor tol·10⁻³ of the integrand's L1 norm).
inline Rates rates_reduced(double t, const SpectrumParams& p, const TemperatureRegime& temp, double tol)
{
    using namespace kernels_detail;
    check_time(t);
    check_tol(tol);
    if (t == 0.0 || p.alpha() == 0.0) return {};

    const double r = p.r();
    auto terms = envelope(p, temp);
    const double mass = envelope_mass(terms, r);
    const double scale = mass * std::min(2.0 * t, 2.0 / (1.0 + r));
    double tail = 0.0;
    const double w_end = trimmed_cutoff(
        terms, r, 1e-3 * tol * scale, [t](double w) { return std::min(2.0 * t, 2.0 / (w - 1.0)); }, &tail);

    const double h = std::min(4.0 * pi / t, 0.5 * r);
    const std::vector<double> breaks = aligned_breaks(h, w_end);
    const int m = first_panel_power(leading_exponent(p, temp));

    const Amplitudes amp{p, temp};
    auto integrand = [&](double w) -> quad::vec<2> {
        if (w <= 0.0) return {0.0, 0.0};
        const double km = sinc_t(w - 1.0, t);
        const double kp = std::sin((w + 1.0) * t) / (w + 1.0);
        return {amp.distribution(w) * (km + kp), amp.half_density(w) * sinc_difference(w, t)};
    };

    quad::Options opt;
    opt.rel_tol = tol;
    opt.l1_tol = 1e-3 * tol;
    const auto res = integrate_frequency<2>(integrand, breaks, m, opt);
    return {res.value[0], res.value[1], res.error[0] + tail, res.error[1] + tail};
}

inline double delta_reduced(double t, const SpectrumParams& p, const TemperatureRegime& temp, double tol = 1e-10)
{
    return rates_reduced(t, p, temp, tol).delta;
}

/// γ(t) does not depend on temperature.
inline double gamma_reduced(double t, const SpectrumParams& p, double tol = 1e-10)
{
    return rates_reduced(t, p, TemperatureRegime::zero(), tol).gamma;
}

/// The literal nested integrals: outer t' on [0, t], inner ω on [0, ω_max],
/// ω_max = max(50r, 50) trimmed where the discarded exponential tail is
/// provably below the tolerance; the tail bound enters the error estimate.
inline Rates rates_oracle_2d(double t, const SpectrumParams& p, const TemperatureRegime& temp, double tol = 1e-9)
{
    using namespace kernels_detail;
    check_time(t);
    if (t > 50.0) throw domain_error("rates_oracle_2d: t must be <= 50");
    if (!(tol >= 1e-9 && tol <= 1e-4)) throw domain_error("rates_oracle_2d: tol must lie in [1e-9, 1e-4]");
    if (t == 0.0 || p.alpha() == 0.0) return {};

    const double r = p.r();
    auto terms = envelope(p, temp);
    const double mass = envelope_mass(terms, r);
    const double w_max = std::max(50.0 * r, 50.0);
    // Inner tail, per unit outer length: |cos|,|sin| <= 1, outer weight 2.
    double tail_inner = 0.0;
    const double w_trim = trimmed_cutoff(terms, r, 1e-3 * tol * mass, [](double) { return 1.0; }, &tail_inner);
    const double w_end = std::min(w_max, w_trim);
    if (w_end == w_max) tail_inner = envelope_tail(terms, r, w_max);
    const double tail = 2.0 * t * tail_inner;
    if (tail > tol * mass) throw numeric_error("rates_oracle_2d: frequency tail exceeds tolerance", tail);

    const int m = first_panel_power(leading_exponent(p, temp));
    const Amplitudes amp{p, temp};

    quad::Options inner_opt;
    inner_opt.rel_tol = 0.1 * tol;
    inner_opt.l1_tol = 1e-3 * tol;

    // C(t') = ∫ I cos(ωt'), D(t') = ∫ (J/2) sin(ωt').
    auto correlations = [&](double tp) -> quad::vec<2> {
        const double h = tp > 0.0 ? std::min(4.0 * pi / tp, 0.5 * r) : 0.5 * r;
        std::vector<double> breaks{0.0};
        for (double x = h; x < w_end; x += h) {
            if (w_end - x > 0.25 * h) breaks.push_back(x);
        }
        breaks.push_back(w_end);
        auto g = [&](double w) -> quad::vec<2> {
            if (w <= 0.0) return {0.0, 0.0};
            return {amp.distribution(w) * std::cos(w * tp), amp.half_density(w) * std::sin(w * tp)};
        };
        return integrate_frequency<2>(g, breaks, m, inner_opt).value;
    };

    auto outer = [&](double tp) -> quad::vec<2> {
        const auto cd = correlations(tp);
        return {2.0 * std::cos(tp) * cd[0], 2.0 * std::sin(tp) * cd[1]};
    };

    const double step = std::min(1.0, 1.0 / r);
    std::vector<double> breaks{0.0};
    for (double x = step; x < t - 0.25 * step; x += step) breaks.push_back(x);
    breaks.push_back(t);

    quad::Options outer_opt;
    outer_opt.rel_tol = 0.5 * tol;
    outer_opt.l1_tol = 1e-3 * tol;
    const auto res = quad::integrate<2>(outer, std::span<const double>(breaks), outer_opt);
    return {res.value[0], res.value[1], res.error[0] + tail, res.error[1] + tail};
}

namespace kernels_detail {

// Closed forms return Δ/(α²θ) as a complex number (imaginary part ~ 0).
inline std::complex<double> closed_ohmic(double tau, double r)
{
    using specialfn::shifted_cisi;
    const std::complex<double> a(0.0, 1.0 / r);
    const std::complex<double> u1 = std::complex<double>(-tau, 1.0) / r;
    const std::complex<double> u2 = std::complex<double>(tau, 1.0) / r;
    return std::complex<double>(0.0, -1.0) * (shifted_cisi(u1, a) - shifted_cisi(u2, a));
}

inline std::complex<double> closed_super_ohmic(double tau, double r)
{
    const double q = 1.0 + tau * tau;
    return 4.0 * tau * std::cos(tau / r) / (q * q) - 2.0 * std::sin(tau / r) / (r * q) +
           closed_ohmic(tau, r) / (r * r);
}

inline std::complex<double> closed_sub_ohmic(double tau, double r)
{
    using C = std::complex<double>;
    using specialfn::faddeeva;
    const C i(0.0, 1.0);
    const double spr = std::sqrt(pi * r);
    const C y = std::sqrt(C(1.0, -tau) / r);
    const C yt = std::sqrt(C(1.0, tau) / r);
    const C y0(1.0 / std::sqrt(r), 0.0);
    const C ep = std::exp(C(0.0, tau / r));
    const C em = std::conj(ep);

    const C k = i * spr * (faddeeva(i * y0) - ep * faddeeva(i * y));
    const C l = -spr * (em * faddeeva(-y) - faddeeva(-y0));
    const C kt = -spr * (ep * faddeeva(yt) - faddeeva(y0));
    const C lt = i * spr * (em * faddeeva(i * yt) - faddeeva(i * y0));
    return 0.5 * std::sqrt(pi) * (k + l + kt + lt);
}

}  // namespace kernels_detail

/// Closed-form high-temperature Δ(t) for s ∈ {1/2, 1, 3}; t is ω₀t and the
/// formulas run on τ = r·t.
inline double delta_closed_highT(double t, const SpectrumParams& p, double theta)
{
    using namespace kernels_detail;
    check_time(t);
    if (!(theta >= 0.0)) throw domain_error("theta must be >= 0");
    const double s = p.s();
    if (s != 0.5 && s != 1.0 && s != 3.0) throw domain_error("delta_closed_highT: s must be 1/2, 1 or 3");
    if (t == 0.0) return 0.0;

    const double tau = p.r() * t;
    std::complex<double> v;
    if (s == 1.0) v = closed_ohmic(tau, p.r());
    else if (s == 3.0) v = closed_super_ohmic(tau, p.r());
    else v = closed_sub_ohmic(tau, p.r());

    if (std::abs(v.imag()) > 1e-9 * std::abs(v.real()) + 1e-12) {
        std::ostringstream os;
        os << "delta_closed_highT: imaginary residue " << v.imag() << " at t=" << t;
        throw numeric_error(os.str(), std::abs(v.imag()));
    }
    return p.alpha() * p.alpha() * theta * v.real();
}

/// Uniform grid of n_points on [0, t_max]; grid points are evaluated in parallel.
inline RateTrace rate_trace(const SpectrumParams& p, const TemperatureRegime& temp, double t_max, int n_points,
                            double tol = 1e-10, std::size_t workers = default_workers())
{
    if (n_points < 2) throw domain_error("rate_trace: n_points must be >= 2");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw domain_error("rate_trace: t_max must be > 0");
    kernels_detail::check_tol(tol);

    const std::size_t n = static_cast<std::size_t>(n_points);
    RateTrace tr;
    tr.times.resize(n);
    tr.delta.resize(n);
    tr.gamma.resize(n);
    tr.lambda_up.resize(n);
    tr.lambda_down.resize(n);
    for (std::size_t i = 0; i < n; ++i) tr.times[i] = t_max * static_cast<double>(i) / static_cast<double>(n - 1);

    parallel_for(
        n,
        [&](std::size_t i) {
            const double t = tr.times[i];
            try {
                const Rates rt = rates_reduced(t, p, temp, tol);
                tr.delta[i] = rt.delta;
                tr.gamma[i] = rt.gamma;
                tr.lambda_up[i] = rt.delta - rt.gamma;
                tr.lambda_down[i] = rt.delta + rt.gamma;
            } catch (const numeric_error& e) {
                std::ostringstream os;
                os.precision(12);
                os << e.what() << " (t=" << t << ")";
                throw numeric_error(os.str(), e.achieved_error());
            }
        },
        workers);
    return tr;
}

}  // namespace qbm
