#pragma once

// Reservoir spectra in units ħ = k_B = ω₀ = 1, so the cutoff frequency is r.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "qbm/error.hpp"

namespace qbm {

enum class CutoffKind { exponential };

/// J(ω) = α² r^{1-s} ω^s e^{-ω/r}.
class SpectrumParams {
public:
    // α = 0 is accepted as the decoupled limit (all rates vanish).
    SpectrumParams(double s, double alpha, double r, CutoffKind cutoff = CutoffKind::exponential)
        : m_s(s), m_alpha(alpha), m_r(r), m_cutoff(cutoff)
    {
        if (!(s > 0.0) || !std::isfinite(s)) throw domain_error("s must be > 0");
        if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw domain_error("alpha must be >= 0");
        if (!(r > 0.0) || !std::isfinite(r)) throw domain_error("r must be > 0");
    }

    static SpectrumParams sub_ohmic(double alpha, double r) { return {0.5, alpha, r}; }
    static SpectrumParams ohmic(double alpha, double r) { return {1.0, alpha, r}; }
    static SpectrumParams super_ohmic(double alpha, double r) { return {3.0, alpha, r}; }

    double s() const { return m_s; }
    double alpha() const { return m_alpha; }
    double r() const { return m_r; }
    CutoffKind cutoff() const { return m_cutoff; }

    SpectrumParams with_alpha(double alpha) const { return {m_s, alpha, m_r, m_cutoff}; }

private:
    double m_s;
    double m_alpha;
    double m_r;
    CutoffKind m_cutoff;
};

enum class TemperatureMode { Zero, HighT, Exact };

/// θ = k_B T / ħω₀. HighT uses N(ω) ≈ θ/ω.
class TemperatureRegime {
public:
    static constexpr double highT_validity_threshold = 10.0;

    static TemperatureRegime zero() { return {TemperatureMode::Zero, 0.0}; }
    static TemperatureRegime high_t(double theta) { return {TemperatureMode::HighT, theta}; }
    static TemperatureRegime exact(double theta) { return {TemperatureMode::Exact, theta}; }

    TemperatureRegime(TemperatureMode mode, double theta) : m_mode(mode), m_theta(theta)
    {
        if (mode == TemperatureMode::Zero) {
            m_theta = 0.0;
            return;
        }
        if (!std::isfinite(theta)) throw domain_error("theta must be finite");
        if (mode == TemperatureMode::HighT && !(theta >= 0.0)) throw domain_error("theta must be >= 0");
        if (mode == TemperatureMode::Exact && !(theta > 0.0)) throw domain_error("theta must be > 0");
    }

    TemperatureMode mode() const { return m_mode; }
    double theta() const { return m_theta; }

    /// Set when the high-temperature approximation is used outside its range.
    std::optional<std::string> validity_warning() const
    {
        if (m_mode == TemperatureMode::HighT && m_theta < highT_validity_threshold) {
            return "high-temperature approximation used with theta = " + std::to_string(m_theta) +
                   " < 10; results deviate from the Bose-Einstein occupation";
        }
        return std::nullopt;
    }

private:
    TemperatureMode m_mode;
    double m_theta;
};

inline double spectral_density(double omega, const SpectrumParams& p)
{
    if (!(omega >= 0.0)) throw domain_error("spectral_density: omega must be >= 0");
    if (omega == 0.0) return 0.0;
    const double a2 = p.alpha() * p.alpha();
    return a2 * p.r() * std::pow(omega / p.r(), p.s()) * std::exp(-omega / p.r());
}

inline double thermal_occupation(double omega, const TemperatureRegime& temp)
{
    if (!(omega >= 0.0)) throw domain_error("thermal_occupation: omega must be >= 0");
    switch (temp.mode()) {
    case TemperatureMode::Zero:
        return 0.0;
    case TemperatureMode::HighT:
        if (omega == 0.0) throw domain_error("thermal_occupation: divergent at omega = 0");
        return temp.theta() / omega;
    case TemperatureMode::Exact:
        if (omega == 0.0) throw domain_error("thermal_occupation: divergent at omega = 0");
        return 1.0 / std::expm1(omega / temp.theta());
    }
    return 0.0;
}

/// I(ω) = J(ω)[N(ω) + 1/2] (Exact), J(ω)θ/ω (HighT), J(ω)/2 (Zero).
inline double spectral_distribution(double omega, const SpectrumParams& p, const TemperatureRegime& temp)
{
    if (!(omega >= 0.0)) throw domain_error("spectral_distribution: omega must be >= 0");
    switch (temp.mode()) {
    case TemperatureMode::Zero:
        return 0.5 * spectral_density(omega, p);
    case TemperatureMode::HighT: {
        if (omega == 0.0) throw domain_error("spectral_distribution: divergent at omega = 0");
        const double x = omega / p.r();
        return p.alpha() * p.alpha() * temp.theta() * std::pow(x, p.s() - 1.0) * std::exp(-x);
    }
    case TemperatureMode::Exact:
        if (omega == 0.0) {
            if (p.s() > 1.0) return 0.0;
            if (p.s() == 1.0) return p.alpha() * p.alpha() * temp.theta();
            throw domain_error("spectral_distribution: divergent at omega = 0");
        }
        return spectral_density(omega, p) * (thermal_occupation(omega, temp) + 0.5);
    }
    return 0.0;
}

struct MarkovianRates {
    double delta_M;
    double gamma_M;
};

/// Long-time limits Δ_M = πI(1), γ_M = (π/2)J(1).
inline MarkovianRates markovian_rates(const SpectrumParams& p, const TemperatureRegime& temp)
{
    constexpr double pi = std::numbers::pi;
    return {pi * spectral_distribution(1.0, p, temp), 0.5 * pi * spectral_density(1.0, p)};
}

/// r^{s-1} e^{1/r}, the thermalization time in units of 1/(πα²).
inline double normalized_thermalization_time(double s, double r)
{
    if (!(s > 0.0)) throw domain_error("s must be > 0");
    if (!(r > 0.0)) throw domain_error("r must be > 0");
    return std::pow(r, s - 1.0) * std::exp(1.0 / r);
}

inline double normalized_thermalization_time(const SpectrumParams& p)
{
    return normalized_thermalization_time(p.s(), p.r());
}

/// t_th = 1/(πJ(1)); infinite for a decoupled bath.
inline double thermalization_time(const SpectrumParams& p)
{
    const double a2 = p.alpha() * p.alpha();
    if (a2 == 0.0) return std::numeric_limits<double>::infinity();
    return normalized_thermalization_time(p) / (std::numbers::pi * a2);
}

}  // namespace qbm
