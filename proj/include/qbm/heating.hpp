#pragma once

// Heating function <n(t)> = e^{-Γ}n0 + ½(e^{-Γ} - 1) + Δ_Γ, with
// Γ(t) = 2∫γ and Δ_Γ(t) = ∫_0^t e^{-(Γ(t) - Γ(t1))} Δ(t1) dt1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "qbm/error.hpp"
#include "qbm/kernels.hpp"
#include "qbm/ode.hpp"
#include "qbm/quadrature.hpp"
#include "qbm/rate_table.hpp"
#include "qbm/spectral.hpp"

namespace qbm {

struct HeatingTrace {
    std::vector<double> times;
    std::vector<double> n_exact;
    std::vector<double> n_markov;
    std::vector<double> n_short;        // ∫(Δ - γ)
    std::vector<double> n_short_highT;  // ∫Δ
    std::vector<double> big_gamma;
    std::vector<double> delta_big_gamma;
};

enum class ShortTimeMode { full, highT };

struct ShortTimeCurve {
    std::vector<double> values;
    std::optional<std::string> warning;
};

namespace heating_detail {

inline void check_grid(std::span<const double> grid)
{
    if (grid.empty()) throw domain_error("time grid must not be empty");
    if (grid[0] != 0.0) throw domain_error("time grid must start at 0");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]) || !std::isfinite(grid[i])) {
            throw domain_error("time grid must be strictly increasing");
        }
    }
}

/// Cumulative quantities at the grid points.
struct Curves {
    std::vector<double> big_gamma;       // 2∫γ
    std::vector<double> delta_gamma;     // Δ_Γ
    std::vector<double> short_full;      // ∫(Δ - γ)
    std::vector<double> short_high;      // ∫Δ
};

/// Panels of 17 Chebyshev–Lobatto nodes; the embedded 9-node rule on every
/// second node gives the error estimate. Panels bisect until the estimate
/// drops below tol·width·(local rate scale).
class Assembler {
public:
    Assembler(const SpectrumParams& p, const TemperatureRegime& temp, double tol)
        : m_p(p), m_temp(temp), m_tol(tol), m_panel_tol(std::max(10.0 * tol, 1e-10)), m_hi(16), m_lo(8)
    {
    }

    Curves run(std::span<const double> grid) const
    {
        Curves c;
        const std::size_t n = grid.size();
        c.big_gamma.assign(n, 0.0);
        c.delta_gamma.assign(n, 0.0);
        c.short_full.assign(n, 0.0);
        c.short_high.assign(n, 0.0);
        if (m_p.alpha() == 0.0) return c;

        State st;
        Rates ra = rate(0.0);
        const double h_max = 2.0;
        for (std::size_t k = 1; k < n; ++k) {
            const double a = grid[k - 1];
            const double b = grid[k];
            const int pieces = static_cast<int>(std::ceil((b - a) / h_max));
            for (int j = 0; j < pieces; ++j) {
                const double x0 = a + (b - a) * j / pieces;
                const double x1 = j + 1 == pieces ? b : a + (b - a) * (j + 1) / pieces;
                const Rates rb = rate(x1);
                advance(x0, x1, ra, rb, st, 0);
                ra = rb;
            }
            c.big_gamma[k] = st.g;
            c.delta_gamma[k] = st.dg;
            c.short_full[k] = st.sf;
            c.short_high[k] = st.sh;
        }
        return c;
    }

private:
    struct State {
        double g = 0.0;
        double dg = 0.0;
        double sf = 0.0;
        double sh = 0.0;
    };

    Rates rate(double t) const
    {
        try {
            return rates_reduced(t, m_p, m_temp, m_tol);
        } catch (const numeric_error& e) {
            std::ostringstream os;
            os.precision(12);
            os << e.what() << " (t=" << t << ")";
            throw numeric_error(os.str(), e.achieved_error());
        }
    }

    struct PanelResult {
        double dgamma, dg_local, sf, sh;
    };

    PanelResult integrate_panel(const quad::ChebyshevCumulative& rule, std::span<const double> delta,
                                std::span<const double> gamma, double a, double b) const
    {
        const std::size_t np = delta.size();
        std::vector<double> f(np);
        for (std::size_t j = 0; j < np; ++j) f[j] = 2.0 * gamma[j];
        const std::vector<double> g = rule.cumulative(f, a, b);
        const double gb = g.back();
        for (std::size_t j = 0; j < np; ++j) f[j] = std::exp(-(gb - g[j])) * delta[j];
        const double dg = rule.cumulative(f, a, b).back();
        for (std::size_t j = 0; j < np; ++j) f[j] = delta[j] - gamma[j];
        const double sf = rule.cumulative(f, a, b).back();
        const double sh = rule.cumulative(delta, a, b).back();
        return {gb, dg, sf, sh};
    }

    void advance(double a, double b, const Rates& ra, const Rates& rb, State& st, int depth) const
    {
        const std::vector<double> x = m_hi.nodes(a, b);
        const std::size_t np = x.size();
        std::vector<Rates> r(np);
        r.front() = ra;
        r.back() = rb;
        for (std::size_t j = 1; j + 1 < np; ++j) r[j] = rate(x[j]);

        std::vector<double> d(np), g(np), d9, g9;
        double scale = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
            d[j] = r[j].delta;
            g[j] = r[j].gamma;
            scale = std::max(scale, std::abs(d[j]) + std::abs(g[j]));
            if (j % 2 == 0) {
                d9.push_back(d[j]);
                g9.push_back(g[j]);
            }
        }
        const PanelResult hi = integrate_panel(m_hi, d, g, a, b);
        const PanelResult lo = integrate_panel(m_lo, d9, g9, a, b);
        const double err = std::max({std::abs(hi.dgamma - lo.dgamma), std::abs(hi.dg_local - lo.dg_local),
                                     std::abs(hi.sf - lo.sf), std::abs(hi.sh - lo.sh)});
        const double target = m_panel_tol * (b - a) * scale;

        if (err > target) {
            if (depth >= 40 || (b - a) < 1e-9 * std::max(1.0, b)) {
                std::ostringstream os;
                os.precision(12);
                os << "heating: cumulative quadrature did not converge near t=" << a;
                throw numeric_error(os.str(), err);
            }
            const double mid = 0.5 * (a + b);
            const Rates rm = rate(mid);
            advance(a, mid, ra, rm, st, depth + 1);
            advance(mid, b, rm, rb, st, depth + 1);
            return;
        }
        st.dg = std::exp(-hi.dgamma) * st.dg + hi.dg_local;
        st.g += hi.dgamma;
        st.sf += hi.sf;
        st.sh += hi.sh;
    }

    SpectrumParams m_p;
    TemperatureRegime m_temp;
    double m_tol;
    double m_panel_tol;
    quad::ChebyshevCumulative m_hi;
    quad::ChebyshevCumulative m_lo;
};

inline double markov_occupation(const TemperatureRegime& temp)
{
    return temp.mode() == TemperatureMode::Zero ? 0.0 : thermal_occupation(1.0, temp);
}

}  // namespace heating_detail

/// Γ(t) = 2∫_0^t γ(t1) dt1.
inline double big_gamma(double t, const SpectrumParams& p, double tol = 1e-10)
{
    if (!(t >= 0.0) || !std::isfinite(t)) throw domain_error("big_gamma: t must be finite and >= 0");
    if (t == 0.0) return 0.0;
    const std::vector<double> grid{0.0, t};
    return heating_detail::Assembler(p, TemperatureRegime::zero(), tol).run(grid).big_gamma.back();
}

/// <n(t)>_M = N(1)(1 - e^{-πJ(1)t}); the initial occupation is taken as 0.
inline std::vector<double> heating_markov(const SpectrumParams& p, const TemperatureRegime& temp,
                                          std::span<const double> t_grid)
{
    const double n1 = heating_detail::markov_occupation(temp);
    const double rate = std::numbers::pi * spectral_density(1.0, p);
    std::vector<double> out(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) out[i] = -n1 * std::expm1(-rate * t_grid[i]);
    return out;
}

inline HeatingTrace heating_exact(double n0, const SpectrumParams& p, const TemperatureRegime& temp,
                                  std::span<const double> t_grid, double tol = 1e-10)
{
    if (!(n0 >= 0.0)) throw domain_error("heating_exact: n0 must be >= 0");
    kernels_detail::check_tol(tol);
    heating_detail::check_grid(t_grid);
    const heating_detail::Curves c = heating_detail::Assembler(p, temp, tol).run(t_grid);

    HeatingTrace tr;
    tr.times.assign(t_grid.begin(), t_grid.end());
    tr.n_markov = heating_markov(p, temp, t_grid);
    tr.big_gamma = c.big_gamma;
    tr.delta_big_gamma = c.delta_gamma;
    tr.n_short = c.short_full;
    tr.n_short_highT = c.short_high;
    tr.n_exact.resize(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        const double em1 = std::expm1(-c.big_gamma[i]);
        tr.n_exact[i] = (em1 + 1.0) * n0 + 0.5 * em1 + c.delta_gamma[i];
    }
    return tr;
}

/// ∫_0^t (Δ - γ) (full) or ∫_0^t Δ (highT), valid while t ≪ t_th.
inline ShortTimeCurve heating_short_time(const SpectrumParams& p, const TemperatureRegime& temp,
                                         std::span<const double> t_grid, ShortTimeMode mode, double tol = 1e-10)
{
    kernels_detail::check_tol(tol);
    heating_detail::check_grid(t_grid);
    ShortTimeCurve out;
    const double t_th = thermalization_time(p);
    if (t_grid.back() > 0.1 * t_th) {
        std::ostringstream os;
        os << "short-time approximation used up to t=" << t_grid.back() << ", beyond 0.1 t_th = " << 0.1 * t_th;
        out.warning = os.str();
    }
    heating_detail::Curves c = heating_detail::Assembler(p, temp, tol).run(t_grid);
    out.values = mode == ShortTimeMode::full ? std::move(c.short_full) : std::move(c.short_high);
    return out;
}

/// The same <n(t)> from d<n>/dt = (Δ - γ) - 2γ<n> integrated by Dormand–Prince
/// with rates read from a RateTable.
inline std::vector<double> heating_ode(double n0, const RateTable& rates, std::span<const double> t_grid,
                                       double tol = 1e-10)
{
    heating_detail::check_grid(t_grid);
    std::vector<double> out(t_grid.size());
    auto rhs = [&](double t, double n) {
        const auto [d, g] = rates(t);
        return (d - g) - 2.0 * g * n;
    };
    ode::Options opt;
    opt.rel_tol = tol;
    opt.abs_tol = 1e-2 * tol;
    opt.max_step = 0.5;
    ode::dormand_prince<double>(
        rhs, n0, t_grid, [](double v) { return std::abs(v); },
        [&](std::size_t k, double, double n) { out[k] = n; }, [](double, double&) { return false; }, opt);
    return out;
}

inline std::vector<double> heating_ode(double n0, const SpectrumParams& p, const TemperatureRegime& temp,
                                       std::span<const double> t_grid, double tol = 1e-10)
{
    heating_detail::check_grid(t_grid);
    const RateTable table(p, temp, t_grid.back(), tol);
    return heating_ode(n0, table, t_grid, tol);
}

}  // namespace qbm
