#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "qbm/error.hpp"
#include "qbm/kernels.hpp"
#include "qbm/parallel.hpp"
#include "qbm/spectral.hpp"

namespace qbm {

/// Δ(t), γ(t) memoized on a uniform mesh of spacing min(0.01, 0.01/r) and
/// read back by 4-point Lagrange (cubic) interpolation.
class RateTable {
public:
    RateTable(const SpectrumParams& p, const TemperatureRegime& temp, double t_max, double tol = 1e-10,
              std::size_t workers = default_workers())
        : m_h(std::min(0.01, 0.01 / p.r())), m_t_max(t_max)
    {
        if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw domain_error("RateTable: t_max must be finite and >= 0");
        const std::size_t n = static_cast<std::size_t>(std::ceil(t_max / m_h)) + 4;
        m_delta.resize(n);
        m_gamma.resize(n);
        parallel_for(
            n,
            [&](std::size_t i) {
                const Rates r = rates_reduced(static_cast<double>(i) * m_h, p, temp, tol);
                m_delta[i] = r.delta;
                m_gamma[i] = r.gamma;
            },
            workers);
    }

    /// A table of constant rates, e.g. the Markovian limit.
    static RateTable constant(double delta, double gamma, double t_max)
    {
        return RateTable(delta, gamma, t_max);
    }

    double spacing() const { return m_h; }
    double t_max() const { return m_t_max; }

    /// (Δ(t), γ(t)) for 0 <= t <= t_max.
    std::pair<double, double> operator()(double t) const
    {
        if (m_constant) return {m_delta[0], m_gamma[0]};
        if (!(t >= 0.0) || t > m_t_max * (1.0 + 1e-12) + 1e-12) throw domain_error("RateTable: t outside the table");
        const std::size_t n = m_delta.size();
        const double x = t / m_h;
        std::size_t i = static_cast<std::size_t>(std::floor(x));
        // Stencil i-1..i+2, shifted inward at the ends.
        std::size_t j0 = i == 0 ? 0 : i - 1;
        j0 = std::min(j0, n - 4);
        const double u = x - static_cast<double>(j0);
        // Lagrange weights for nodes at 0, 1, 2, 3.
        const double w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        const double w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        const double w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        const double w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        const double d = w0 * m_delta[j0] + w1 * m_delta[j0 + 1] + w2 * m_delta[j0 + 2] + w3 * m_delta[j0 + 3];
        const double g = w0 * m_gamma[j0] + w1 * m_gamma[j0 + 1] + w2 * m_gamma[j0 + 2] + w3 * m_gamma[j0 + 3];
        return {d, g};
    }

private:
    RateTable(double delta, double gamma, double t_max)
        : m_h(1.0), m_t_max(t_max), m_delta{delta}, m_gamma{gamma}, m_constant(true)
    {
    }

    double m_h;
    double m_t_max;
    std::vector<double> m_delta;
    std::vector<double> m_gamma;
    bool m_constant = false;
};

}  // namespace qbm
