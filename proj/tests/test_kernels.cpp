#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles/reference_tables.hpp"
#include "qbm/kernels.hpp"
#include "series_oracle.hpp"

using namespace qbm;
constexpr double pi = std::numbers::pi;

namespace {

bool close(double a, double b, double rel, double abs_floor)
{
    return std::abs(a - b) <= std::max(rel * std::abs(b), abs_floor);
}

}  // namespace

TEST(Kernels, ZeroTime)
{
    const SpectrumParams p(0.5, 0.1, 0.1);
    const auto hi = TemperatureRegime::high_t(100.0);
    EXPECT_EQ(delta_reduced(0.0, p, hi), 0.0);
    EXPECT_EQ(gamma_reduced(0.0, p), 0.0);
    const Rates o = rates_oracle_2d(0.0, p, hi);
    EXPECT_EQ(o.delta, 0.0);
    EXPECT_EQ(o.gamma, 0.0);
    for (double s : {0.5, 1.0, 3.0}) EXPECT_EQ(delta_closed_highT(0.0, {s, 0.1, 1.0}, 100.0), 0.0);
}

TEST(Kernels, ArgumentChecks)
{
    const SpectrumParams p(1.0, 0.1, 1.0);
    EXPECT_THROW(delta_reduced(-1.0, p, TemperatureRegime::zero()), domain_error);
    EXPECT_THROW(delta_reduced(1.0, p, TemperatureRegime::zero(), 1e-13), domain_error);
    EXPECT_THROW(delta_reduced(1.0, p, TemperatureRegime::zero(), 1e-3), domain_error);
    EXPECT_THROW(rates_oracle_2d(51.0, p, TemperatureRegime::zero()), domain_error);
    EXPECT_THROW(rates_oracle_2d(1.0, p, TemperatureRegime::zero(), 1e-10), domain_error);
    EXPECT_THROW(delta_closed_highT(1.0, {2.0, 0.1, 1.0}, 100.0), domain_error);
}

TEST(Kernels, SincSeriesJoinsDirectForm)
{
    using kernels_detail::sinc_t;
    const double t = 7.0;
    for (double x : {1e-4 / 7.0, 0.999e-3 / 7.0, 1.001e-3 / 7.0}) {
        EXPECT_NEAR(sinc_t(x, t), std::sin(x * t) / x, 1e-14 * t);
    }
    EXPECT_EQ(sinc_t(0.0, t), t);
}

TEST(Kernels, HighTReducedMatchesReferenceTable)
{
    const double alpha = 0.1, theta = 100.0;
    for (const auto& s : oracle::highT_delta_table) {
        const SpectrumParams p(s.s, alpha, s.r);
        const double ref = alpha * alpha * theta * s.value;
        const double d = delta_reduced(s.t, p, TemperatureRegime::high_t(theta), 1e-10);
        EXPECT_TRUE(close(d, ref, 1e-9, 1e-12)) << s.s << " " << s.r << " " << s.t << " " << d << " " << ref;
    }
}

TEST(Kernels, ZeroTReducedMatchesReferenceTable)
{
    const double alpha = 0.1;
    for (const auto& s : oracle::zero_rates_table) {
        const SpectrumParams p(s.s, alpha, s.r);
        const Rates r = rates_reduced(s.t, p, TemperatureRegime::zero(), 1e-10);
        const double a2 = alpha * alpha;
        EXPECT_TRUE(close(r.delta, a2 * s.delta, 1e-9, 1e-13)) << s.s << " " << s.r << " " << s.t;
        EXPECT_TRUE(close(r.gamma, a2 * s.gamma, 1e-9, 1e-13)) << s.s << " " << s.r << " " << s.t;
    }
}

TEST(Kernels, ClosedFormsMatchReferenceTable)
{
    const double alpha = 0.1, theta = 100.0;
    for (const auto& s : oracle::highT_delta_table) {
        const SpectrumParams p(s.s, alpha, s.r);
        const double ref = alpha * alpha * theta * s.value;
        EXPECT_TRUE(close(delta_closed_highT(s.t, p, theta), ref, 1e-9, 1e-12)) << s.s << " " << s.r << " " << s.t;
    }
}

TEST(Kernels, ClosedFormsMatchReducedQuadrature)
{
    std::mt19937_64 gen(21);
    std::uniform_real_distribution<double> lr(std::log(0.1), std::log(10.0)), ut(0.0, 20.0);
    for (int i = 0; i < 60; ++i) {
        const double s = std::array<double, 3>{0.5, 1.0, 3.0}[i % 3];
        const SpectrumParams p(s, 0.1, std::exp(lr(gen)));
        const double t = ut(gen);
        const double q = delta_reduced(t, p, TemperatureRegime::high_t(100.0), 1e-11);
        const double c = delta_closed_highT(t, p, 100.0);
        EXPECT_TRUE(close(c, q, 1e-6, 1e-9)) << s << " r=" << p.r() << " t=" << t << " " << c << " " << q;
    }
}

TEST(Kernels, ReducedMatchesOracle2D)
{
    std::mt19937_64 gen(22);
    std::uniform_real_distribution<double> lr(std::log(0.1), std::log(3.0)), ut(0.0, 8.0);
    for (int i = 0; i < 8; ++i) {
        const double s = std::array<double, 3>{0.5, 1.0, 3.0}[i % 3];
        const SpectrumParams p(s, 0.1, std::exp(lr(gen)));
        const auto temp = i % 2 ? TemperatureRegime::zero() : TemperatureRegime::high_t(100.0);
        const double t = ut(gen);
        const Rates red = rates_reduced(t, p, temp, 1e-10);
        const Rates orc = rates_oracle_2d(t, p, temp, 1e-9);
        EXPECT_TRUE(close(red.delta, orc.delta, 1e-6, 1e-9)) << i;
        EXPECT_TRUE(close(red.gamma, orc.gamma, 1e-6, 1e-9)) << i;
    }
}

TEST(Kernels, ExactRegimeMatchesOracle2D)
{
    const SpectrumParams p(1.0, 0.2, 2.0);
    const auto temp = TemperatureRegime::exact(0.7);
    for (double t : {0.4, 3.0, 9.0}) {
        const Rates red = rates_reduced(t, p, temp, 1e-10);
        const Rates orc = rates_oracle_2d(t, p, temp, 1e-9);
        EXPECT_TRUE(close(red.delta, orc.delta, 1e-6, 1e-9)) << t;
        EXPECT_TRUE(close(red.gamma, orc.gamma, 1e-6, 1e-9)) << t;
    }
}

TEST(Kernels, OracleScalesWithAlphaSquared)
{
    const SpectrumParams p(1.0, 0.1, 1.0);
    const auto hi = TemperatureRegime::high_t(100.0);
    const Rates a = rates_oracle_2d(2.0, p, hi);
    const Rates b = rates_oracle_2d(2.0, p.with_alpha(0.2), hi);
    EXPECT_NEAR(b.delta, 4.0 * a.delta, 1e-12 * std::abs(b.delta));
    EXPECT_NEAR(b.gamma, 4.0 * a.gamma, 1e-12 * std::abs(b.gamma));
}

TEST(Kernels, GammaIgnoresTemperature)
{
    const SpectrumParams p(3.0, 0.1, 1.0);
    const double g = gamma_reduced(4.0, p);
    EXPECT_EQ(g, rates_reduced(4.0, p, TemperatureRegime::zero(), 1e-10).gamma);
    EXPECT_NEAR(rates_reduced(4.0, p, TemperatureRegime::high_t(100.0), 1e-10).gamma, g, 1e-9 * std::abs(g));
}

TEST(Kernels, MarkovianLimitsOhmicR10)
{
    const SpectrumParams p(1.0, 0.1, 10.0);
    const auto hi = TemperatureRegime::high_t(100.0);
    const auto m = markovian_rates(p, hi);
    EXPECT_LT(std::abs(delta_reduced(30.0, p, hi) - m.delta_M), 0.01 * m.delta_M);
    EXPECT_LT(std::abs(gamma_reduced(30.0, p) - m.gamma_M), 0.01 * m.gamma_M);
}

TEST(Kernels, LongTimeLimitsResonantPresets)
{
    // Presets whose approach is not dominated by the ω → 0 tail of I(ω).
    for (double s : {0.5, 1.0, 3.0}) {
        for (double r : {0.1, 1.0, 10.0}) {
            const SpectrumParams p(s, 0.1, r);
            const double t_long = std::max(30.0, 10.0 / r);
            for (const auto& temp : {TemperatureRegime::high_t(100.0), TemperatureRegime::zero()}) {
                const bool hot = temp.mode() == TemperatureMode::HighT;
                if ((s == 0.5 && (hot || r == 0.1)) || (s == 1.0 && r == 0.1)) continue;
                const auto m = markovian_rates(p, temp);
                const Rates rt = rates_reduced(t_long, p, temp, 1e-10);
                EXPECT_LT(std::abs(rt.delta - m.delta_M), 0.01 * m.delta_M) << s << " " << r;
                EXPECT_LT(std::abs(rt.gamma - m.gamma_M), 0.01 * m.gamma_M) << s << " " << r;
            }
        }
    }
}

TEST(Kernels, SubOhmicHighTInfraredTail)
{
    // I(ω) ≈ α²θ√r ω^{-1/2} near 0 leaves an oscillation 2 sin t α²θ√r √(π/2t)
    // on top of Δ_M, so the Markov value is reached only as t^{-1/2}.
    const SpectrumParams p(0.5, 0.1, 1.0);
    const auto hi = TemperatureRegime::high_t(100.0);
    const double dm = markovian_rates(p, hi).delta_M;
    for (double t0 : {40.0, 160.0}) {
        double amp = 0.0;
        for (int i = 0; i <= 200; ++i) {
            amp = std::max(amp, std::abs(delta_reduced(t0 + 2.0 * pi * i / 200.0, p, hi) - dm));
        }
        const double predicted = 2.0 * 0.01 * 100.0 * std::sqrt(pi / (2.0 * t0));
        EXPECT_NEAR(amp, predicted, 0.05 * predicted) << t0;
    }
}

TEST(Kernels, SincDifferenceSeries)
{
    using kernels_detail::sinc_difference;
    using oracle::f128;
    // Direct form in binary128, where the cancellation costs at most ~30 of 34 digits.
    auto sin_over = [](f128 x, f128 t) -> f128 {
        if (x == 0) return t;
        const f128 y = x * t;
        f128 term = y, sum = y;
        for (int k = 1; k < 80; ++k) {
            term *= -y * y / ((2 * k) * (2 * k + 1));
            sum += term;
        }
        return sum / x;
    };
    for (double w : {0.0, 1e-3, 0.5, 1.0, 3.0, 40.0}) {
        for (double t : {1e-6, 1e-3, 0.01, 0.1, 0.4}) {
            const f128 fw = w, ft = t;
            const double direct = static_cast<double>(sin_over(fw - 1, ft) - sin_over(fw + 1, ft));
            EXPECT_NEAR(sinc_difference(w, t), direct, 1e-13 * std::abs(direct) + 1e-300) << w << " " << t;
        }
    }
    // Continuity across the series threshold (ω+1)t = 1/2.
    const double t = 0.25;
    EXPECT_NEAR(sinc_difference(1.0 - 1e-12, t), sinc_difference(1.0 + 1e-12, t), 1e-13);
}

TEST(Kernels, SmallTimeGammaMatchesOracle)
{
    for (double t : {1e-3, 0.02}) {
        const SpectrumParams p(0.5, 0.1, 0.1);
        const Rates red = rates_reduced(t, p, TemperatureRegime::high_t(100.0), 1e-10);
        const Rates orc = rates_oracle_2d(t, p, TemperatureRegime::high_t(100.0), 1e-9);
        EXPECT_NEAR(red.gamma, orc.gamma, 1e-6 * std::abs(orc.gamma)) << t;
        EXPECT_NEAR(red.delta, orc.delta, 1e-6 * std::abs(orc.delta)) << t;
    }
}

TEST(Kernels, HighTLinearInTheta)
{
    const SpectrumParams p(0.5, 0.1, 1.0);
    for (double t : {0.3, 2.0, 7.5}) {
        const double d1 = delta_reduced(t, p, TemperatureRegime::high_t(100.0));
        const double d2 = delta_reduced(t, p, TemperatureRegime::high_t(200.0));
        EXPECT_NEAR(d2, 2.0 * d1, 1e-9 * std::abs(d2));
    }
}

TEST(Kernels, SubOhmicSmallRGoesNegative)
{
    const SpectrumParams p(0.5, 0.1, 0.1);
    const RateTrace tr = rate_trace(p, TemperatureRegime::high_t(100.0), 20.0, 201);
    EXPECT_LT(*std::min_element(tr.delta.begin(), tr.delta.end()), 0.0);
    double cmin = 0.0;
    for (double t : tr.times) cmin = std::min(cmin, delta_closed_highT(t, p, 100.0));
    EXPECT_LT(cmin, 0.0);
}

TEST(Kernels, LargeRStaysNonNegative)
{
    for (double s : {0.5, 1.0, 3.0}) {
        const RateTrace tr = rate_trace({s, 0.1, 10.0}, TemperatureRegime::high_t(100.0), 20.0, 201);
        for (double d : tr.delta) EXPECT_GE(d, -1e-10) << s;
    }
}

TEST(RateTrace, ShapeAndIdentities)
{
    const SpectrumParams p(1.0, 0.1, 1.0);
    const RateTrace two = rate_trace(p, TemperatureRegime::zero(), 1.0, 2);
    ASSERT_EQ(two.times.size(), 2u);
    EXPECT_EQ(two.times[0], 0.0);
    EXPECT_EQ(two.times[1], 1.0);
    EXPECT_EQ(two.delta[0], 0.0);
    EXPECT_EQ(two.gamma[0], 0.0);
    EXPECT_EQ(two.lambda_up[0], 0.0);
    EXPECT_EQ(two.lambda_down[0], 0.0);

    const RateTrace tr = rate_trace(p, TemperatureRegime::high_t(100.0), 5.0, 51);
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        if (i > 0) {
            EXPECT_GT(tr.times[i], tr.times[i - 1]);
        }
        EXPECT_NEAR(tr.lambda_up[i] + tr.lambda_down[i], 2.0 * tr.delta[i], 1e-15 * std::abs(tr.delta[i]));
        EXPECT_EQ(tr.lambda_down[i], tr.delta[i] + tr.gamma[i]);
    }
    EXPECT_THROW(rate_trace(p, TemperatureRegime::zero(), 1.0, 1), domain_error);
    EXPECT_THROW(rate_trace(p, TemperatureRegime::zero(), 0.0, 5), domain_error);
}

TEST(RateTrace, ZeroTemperatureUpChannelGoesNegativeAtR1)
{
    for (double s : {0.5, 1.0, 3.0}) {
        const RateTrace tr = rate_trace({s, 0.1, 1.0}, TemperatureRegime::zero(), 20.0, 401);
        EXPECT_LT(*std::min_element(tr.lambda_up.begin(), tr.lambda_up.end()), 0.0) << s;
    }
}

TEST(RateTrace, ZeroTemperatureSuperOhmicR10Channels)
{
    // Down channel settles at Δ_M + γ_M = πJ(1); the up channel dips
    // negative and decays towards zero.
    const SpectrumParams p(3.0, 0.1, 10.0);
    const auto m = markovian_rates(p, TemperatureRegime::zero());
    const double target = m.delta_M + m.gamma_M;
    EXPECT_NEAR(target, pi * spectral_density(1.0, p), 1e-16);
    const RateTrace tr = rate_trace(p, TemperatureRegime::zero(), 20.0, 401);
    double up_min = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        up_min = std::min(up_min, tr.lambda_up[i]);
        if (tr.times[i] >= 3.0) {
            EXPECT_LT(std::abs(tr.lambda_down[i] - target), 0.05 * target) << tr.times[i];
        }
    }
    EXPECT_LT(up_min, 0.0);
    EXPECT_LT(std::abs(tr.lambda_up.back()), 1e-3 * target);
}

TEST(ClosedForm, ImaginaryResidueSmall)
{
    // The residue check runs inside delta_closed_highT; it must stay quiet on
    // a dense sweep.
    for (double s : {0.5, 1.0, 3.0}) {
        for (double r : {0.1, 0.3, 1.0, 3.0, 10.0}) {
            for (int k = 1; k <= 100; ++k) {
                EXPECT_NO_THROW(delta_closed_highT(0.2 * k, {s, 0.1, r}, 100.0)) << s << " " << r << " " << 0.2 * k;
            }
        }
    }
}
