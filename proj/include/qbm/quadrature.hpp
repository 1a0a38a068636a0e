#pragma once

// Vector-valued adaptive Gauss–Kronrod (10/21) integration and spectral
// cumulative integration on Chebyshev–Lobatto nodes.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qbm/error.hpp"

namespace qbm::quad {

template <std::size_t N>
using vec = std::array<double, N>;

template <std::size_t N>
struct Result {
    vec<N> value{};
    vec<N> error{};
    vec<N> l1{};  // ∫|f| per component, used for cancellation-aware tolerances
    std::size_t evaluations = 0;
    std::size_t intervals = 0;
};

/// A component has converged when error <= max(abs_tol, rel_tol·|value|, l1_tol·∫|f|).
struct Options {
    double rel_tol = 1e-10;
    double abs_tol = 0.0;
    double l1_tol = 0.0;
    std::size_t max_intervals = 200000;
};

namespace detail {

struct KronrodTable {
    std::array<double, 11> x{};
    std::array<double, 11> wk{};
    std::array<double, 11> wg{};  // Gauss weights at Kronrod odd indices, zero elsewhere

    KronrodTable()
    {
        const auto& xa = boost::math::quadrature::gauss_kronrod<double, 21>::abscissa();
        const auto& wa = boost::math::quadrature::gauss_kronrod<double, 21>::weights();
        const auto& gw = boost::math::quadrature::gauss<double, 10>::weights();
        for (std::size_t i = 0; i < 11; ++i) {
            x[i] = xa[i];
            wk[i] = wa[i];
        }
        for (std::size_t i = 0; i < gw.size(); ++i) wg[2 * i + 1] = gw[i];
    }
};

inline const KronrodTable& kronrod_table()
{
    static const KronrodTable table;
    return table;
}

template <std::size_t N>
struct Panel {
    double a = 0.0;
    double b = 0.0;
    vec<N> value{};
    vec<N> error{};
    vec<N> l1{};
    double priority = 0.0;
    bool operator<(const Panel& o) const { return priority < o.priority; }
};

template <std::size_t N, class F>
Panel<N> gk21(F& f, double a, double b)
{
    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr double tiny = std::numeric_limits<double>::min();
    const KronrodTable& tab = kronrod_table();
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    std::array<vec<N>, 21> fv;
    fv[0] = f(c);
    for (std::size_t i = 1; i < 11; ++i) {
        fv[2 * i - 1] = f(c - h * tab.x[i]);
        fv[2 * i] = f(c + h * tab.x[i]);
    }

    Panel<N> p;
    p.a = a;
    p.b = b;
    for (std::size_t k = 0; k < N; ++k) {
        double rk = tab.wk[0] * fv[0][k];
        double rg = tab.wg[0] * fv[0][k];
        double rabs = tab.wk[0] * std::abs(fv[0][k]);
        for (std::size_t i = 1; i < 11; ++i) {
            const double s = fv[2 * i - 1][k] + fv[2 * i][k];
            rk += tab.wk[i] * s;
            rg += tab.wg[i] * s;
            rabs += tab.wk[i] * (std::abs(fv[2 * i - 1][k]) + std::abs(fv[2 * i][k]));
        }
        const double mean = 0.5 * rk;
        double rasc = tab.wk[0] * std::abs(fv[0][k] - mean);
        for (std::size_t i = 1; i < 11; ++i) {
            rasc += tab.wk[i] * (std::abs(fv[2 * i - 1][k] - mean) + std::abs(fv[2 * i][k] - mean));
        }
        rk *= h;
        rabs *= std::abs(h);
        rasc *= std::abs(h);
        double err = std::abs((rk - rg * h));
        if (rasc != 0.0 && err != 0.0) err = rasc * std::min(1.0, std::pow(200.0 * err / rasc, 1.5));
        if (rabs > tiny / (50.0 * eps)) err = std::max(50.0 * eps * rabs, err);
        p.value[k] = rk;
        p.error[k] = err;
        p.l1[k] = rabs;
    }
    return p;
}

}  // namespace detail

/// Globally adaptive GK21 over [breaks.front(), breaks.back()], starting from
/// the given panel boundaries. f maps double -> vec<N>. Throws numeric_error
/// (carrying the largest achieved component error) if the interval budget
/// runs out before every component converges.
template <std::size_t N, class F>
Result<N> integrate(F&& f, std::span<const double> breaks, const Options& opt)
{
    Result<N> res;
    if (breaks.size() < 2) return res;

    std::priority_queue<detail::Panel<N>> heap;
    vec<N> total{}, err{}, l1{};

    auto priority = [](const detail::Panel<N>& p, const vec<N>& scale) {
        double worst = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
            worst = std::max(worst, p.error[k] / (scale[k] + std::numeric_limits<double>::min()));
        }
        return worst;
    };

    std::vector<detail::Panel<N>> initial;
    initial.reserve(breaks.size() - 1);
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        if (!(breaks[i + 1] > breaks[i])) continue;
        initial.push_back(detail::gk21<N>(f, breaks[i], breaks[i + 1]));
        res.evaluations += 21;
        for (std::size_t k = 0; k < N; ++k) {
            total[k] += initial.back().value[k];
            err[k] += initial.back().error[k];
            l1[k] += initial.back().l1[k];
        }
    }
    // Priorities use the final-scale weights of the first pass; later panels
    // reuse them so the ordering stays consistent.
    vec<N> scale{};
    for (std::size_t k = 0; k < N; ++k) scale[k] = std::abs(total[k]) + l1[k];
    for (auto& p : initial) {
        p.priority = priority(p, scale);
        heap.push(p);
    }

    auto converged = [&] {
        for (std::size_t k = 0; k < N; ++k) {
            const double target = std::max({opt.abs_tol, opt.rel_tol * std::abs(total[k]), opt.l1_tol * l1[k]});
            if (err[k] > target) return false;
        }
        return true;
    };

    while (!converged()) {
        if (heap.size() >= opt.max_intervals) {
            double worst = 0.0;
            for (std::size_t k = 0; k < N; ++k) worst = std::max(worst, err[k]);
            throw numeric_error("adaptive quadrature exceeded its interval budget", worst);
        }
        detail::Panel<N> p = heap.top();
        heap.pop();
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            double worst = 0.0;
            for (std::size_t k = 0; k < N; ++k) worst = std::max(worst, err[k]);
            throw numeric_error("adaptive quadrature: interval width underflow", worst);
        }
        detail::Panel<N> left = detail::gk21<N>(f, p.a, mid);
        detail::Panel<N> right = detail::gk21<N>(f, mid, p.b);
        res.evaluations += 42;
        for (std::size_t k = 0; k < N; ++k) {
            total[k] += left.value[k] + right.value[k] - p.value[k];
            err[k] += left.error[k] + right.error[k] - p.error[k];
            l1[k] += left.l1[k] + right.l1[k] - p.l1[k];
        }
        left.priority = priority(left, scale);
        right.priority = priority(right, scale);
        heap.push(left);
        heap.push(right);
    }

    // Recompute sums from the surviving panels to shed accumulated rounding.
    res.value = {};
    res.error = {};
    res.l1 = {};
    res.intervals = heap.size();
    while (!heap.empty()) {
        const auto& p = heap.top();
        for (std::size_t k = 0; k < N; ++k) {
            res.value[k] += p.value[k];
            res.error[k] += p.error[k];
            res.l1[k] += p.l1[k];
        }
        heap.pop();
    }
    return res;
}

template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, const Options& opt)
{
    const std::array<double, 2> br{a, b};
    return integrate<N>(std::forward<F>(f), std::span<const double>(br), opt);
}

/// Scalar convenience wrapper.
template <class F>
double integrate_scalar(F&& f, double a, double b, const Options& opt, double* error = nullptr)
{
    auto r = integrate<1>([&](double x) { return vec<1>{f(x)}; }, a, b, opt);
    if (error) *error = r.error[0];
    return r.value[0];
}

/// Spectral cumulative integration on n+1 Chebyshev–Lobatto points.
///
/// Nodes are ordered from the left end: x_j = (a+b)/2 - (b-a)/2·cos(πj/n).
/// Given samples f_j at those nodes, cumulative(f)[j] = ∫_a^{x_j} p(x) dx where
/// p is the degree-n interpolant.
class ChebyshevCumulative {
public:
    explicit ChebyshevCumulative(std::size_t n) : m_n(n), m_q((n + 1) * (n + 1), 0.0)
    {
        const double pi = std::numbers::pi;
        const std::size_t np = n + 1;
        // Reference nodes on [-1,1], ascending.
        std::vector<double> t(np);
        for (std::size_t j = 0; j < np; ++j) t[j] = -std::cos(pi * static_cast<double>(j) / static_cast<double>(n));
        m_ref = t;

        // Values -> Chebyshev coefficients (discrete cosine transform on Lobatto nodes).
        // c_k = (2/n) Σ'' f_j T_k(t_j); endpoints and k = 0, n halved.
        std::vector<double> to_coef(np * np);
        for (std::size_t k = 0; k < np; ++k) {
            for (std::size_t j = 0; j < np; ++j) {
                double w = 2.0 / static_cast<double>(n);
                if (j == 0 || j == n) w *= 0.5;
                if (k == 0 || k == n) w *= 0.5;
                to_coef[k * np + j] = w * std::cos(static_cast<double>(k) * std::acos(t[j]));
            }
        }
        // Coefficients of ∫_{-1}^{x} Σ c_k T_k, degree n+1 truncated evaluation at nodes.
        for (std::size_t j = 0; j < np; ++j) {
            for (std::size_t k = 0; k < np; ++k) {
                const double v = integral_of_tk(k, t[j]) - integral_of_tk(k, -1.0);
                for (std::size_t i = 0; i < np; ++i) m_q[j * np + i] += v * to_coef[k * np + i];
            }
        }
    }

    std::size_t order() const { return m_n; }

    /// Node positions on [a, b], ascending.
    std::vector<double> nodes(double a, double b) const
    {
        std::vector<double> x(m_n + 1);
        for (std::size_t j = 0; j <= m_n; ++j) x[j] = 0.5 * (a + b) + 0.5 * (b - a) * m_ref[j];
        x.front() = a;
        x.back() = b;
        return x;
    }

    std::vector<double> cumulative(std::span<const double> f, double a, double b) const
    {
        const std::size_t np = m_n + 1;
        std::vector<double> out(np, 0.0);
        const double h = 0.5 * (b - a);
        for (std::size_t j = 0; j < np; ++j) {
            double s = 0.0;
            for (std::size_t i = 0; i < np; ++i) s += m_q[j * np + i] * f[i];
            out[j] = h * s;
        }
        out[0] = 0.0;
        return out;
    }

private:
    static double chebyshev_t(std::size_t k, double x)
    {
        if (k == 0) return 1.0;
        double t0 = 1.0, t1 = x;
        for (std::size_t i = 1; i < k; ++i) {
            const double t2 = 2.0 * x * t1 - t0;
            t0 = t1;
            t1 = t2;
        }
        return t1;
    }

    // Antiderivative of T_k.
    static double integral_of_tk(std::size_t k, double x)
    {
        if (k == 0) return x;
        if (k == 1) return 0.5 * x * x;
        const double kk = static_cast<double>(k);
        return 0.5 * (chebyshev_t(k + 1, x) / (kk + 1.0) - chebyshev_t(k - 1, x) / (kk - 1.0));
    }

    std::size_t m_n;
    std::vector<double> m_q;
    std::vector<double> m_ref;
};

}  // namespace qbm::quad
