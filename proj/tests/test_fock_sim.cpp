#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "qbm/fock_sim.hpp"
#include "qbm/heating.hpp"

using namespace qbm;

namespace {

std::vector<double> uniform(double t_max, int n)
{
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = t_max * i / (n - 1);
    return g;
}

double mean_n_rate(const DensityMatrix& rho, double up, double down)
{
    FockState s{static_cast<int>(rho.rows()), lindblad_rhs(rho, up, down), 0.0};
    return mean_n(s);
}

}  // namespace

TEST(LindbladRhs, Examples)
{
    const FockState vac = FockState::number(0, 8);
    EXPECT_EQ(lindblad_rhs(vac, 0.0, 0.0).cwiseAbs().maxCoeff(), 0.0);
    for (double down : {0.0, 0.3, 5.0}) EXPECT_NEAR(mean_n_rate(vac.matrix, 1.0, down), 1.0, 1e-15);
    EXPECT_NEAR(mean_n_rate(FockState::number(1, 8).matrix, 0.0, 1.0), -1.0, 1e-15);
    EXPECT_THROW(lindblad_rhs(DensityMatrix::Zero(3, 4), 1.0, 1.0), domain_error);
}

TEST(LindbladRhs, TracelessAndHermitian)
{
    std::mt19937_64 gen(31);
    std::normal_distribution<double> n01;
    for (int trial = 0; trial < 20; ++trial) {
        const int dim = 5 + trial;
        DensityMatrix a(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) a(i, j) = {n01(gen), n01(gen)};
        DensityMatrix rho = a * a.adjoint();
        rho /= rho.trace().real();
        const DensityMatrix d = lindblad_rhs(rho, n01(gen), n01(gen));
        EXPECT_LT(std::abs(d.trace()), 1e-13);
        EXPECT_LT((d - d.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(LindbladRhs, MomentEquationAwayFromEdge)
{
    // d<n>/dt = λ↑(<n> + 1) - λ↓<n> while the top level is empty.
    const FockState th = FockState::thermal(1.0, 60);
    const double n = mean_n(th), up = 0.4, down = 1.3;
    EXPECT_NEAR(mean_n_rate(th.matrix, up, down), up * (n + 1.0) - down * n, 1e-12);
}

TEST(FockState, MeanNumber)
{
    EXPECT_EQ(mean_n(FockState::number(0, 10)), 0.0);
    EXPECT_EQ(mean_n(FockState::number(3, 10)), 3.0);
    EXPECT_NEAR(mean_n(FockState::thermal(1.0, 60)), 1.0 / (std::exp(1.0) - 1.0), 1e-12);
    EXPECT_NEAR(mean_n(FockState::thermal(1.0, 60)), 0.58198, 1e-5);
    EXPECT_NEAR(FockState::thermal(3.0, 40).trace(), 1.0, 1e-14);
    EXPECT_THROW(FockState::number(10, 10), domain_error);
    EXPECT_THROW(FockState::thermal(-1.0, 10), domain_error);
}

TEST(Evolve, NoCouplingIsStationary)
{
    const FockState init = FockState::thermal(2.0, 40);
    const Evolution ev = evolve(init, {1.0, 0.0, 1.0}, TemperatureRegime::high_t(100.0), uniform(10.0, 11));
    ASSERT_EQ(ev.snapshots.size(), 11u);
    EXPECT_EQ((ev.snapshots.back().matrix - init.matrix).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ev.diagnostics.trace_drift, 0.0);
}

TEST(Evolve, MatchesHeatingFunctionWeakCoupling)
{
    const SpectrumParams p(1.0, 0.01, 10.0);
    const auto hi = TemperatureRegime::high_t(100.0);
    const auto grid = uniform(10.0, 51);
    const int dim = 201;  // ≥ ceil(θ + 10√θ)
    const Evolution ev = evolve(FockState::number(0, dim), p, hi, grid);
    const HeatingTrace tr = heating_exact(0.0, p, hi, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const FockState& s = ev.snapshots[i];
        EXPECT_NEAR(mean_n(s), tr.n_exact[i], 1e-6) << grid[i];
        EXPECT_LT(s.hermiticity_error(), 1e-12);
        EXPECT_NEAR(s.trace(), 1.0, 1e-8);
    }
    EXPECT_LE(ev.diagnostics.trace_drift, 1e-8);
    EXPECT_FALSE(ev.diagnostics.truncation_flag);
}

TEST(Evolve, MomentEquationAlongTrajectory)
{
    const SpectrumParams p(1.0, 0.2, 1.0);
    const auto temp = TemperatureRegime::exact(1.0);
    const RateTable table(p, temp, 6.0);
    const double h = 1e-3;
    std::vector<double> grid{0.0};
    for (double t : {1.0, 2.5, 5.0}) {
        grid.push_back(t - h);
        grid.push_back(t);
        grid.push_back(t + h);
    }
    const Evolution ev = evolve_with_rates(FockState::number(1, 60), table, grid);
    for (std::size_t k = 1; k + 2 < grid.size(); k += 3) {
        const double t = grid[k + 1];
        const double dn = (mean_n(ev.snapshots[k + 2]) - mean_n(ev.snapshots[k])) / (2.0 * h);
        const auto [d, g] = table(t);
        EXPECT_NEAR(dn, (d - g) - 2.0 * g * mean_n(ev.snapshots[k + 1]), 1e-6) << t;
    }
}

TEST(Evolve, ConstantMarkovRatesReproduceMarkovHeating)
{
    const SpectrumParams p(1.0, 0.1, 1.0);
    const auto temp = TemperatureRegime::exact(1.0);
    const auto m = markovian_rates(p, temp);
    const auto grid = uniform(2.0 * thermalization_time(p), 21);
    const Evolution ev = evolve_with_rates(FockState::number(0, 40), RateTable::constant(m.delta_M, m.gamma_M, 0.0),
                                           grid);
    const auto markov = heating_markov(p, temp, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(mean_n(ev.snapshots[i]), markov[i], 1e-8) << grid[i];
        EXPECT_GE(ev.diagnostics.min_eigenvalue[i], -1e-10);
    }
}

TEST(Evolve, TruncationGuard)
{
    const auto grid = uniform(5.0, 6);
    EXPECT_THROW(evolve(FockState::number(0, 2), {1.0, 0.1, 1.0}, TemperatureRegime::high_t(100.0), grid),
                 truncation_error);
    const Evolution ev = evolve_with_rates(FockState::number(0, 12), RateTable::constant(20.0, 10.0, 0.0),
                                           uniform(0.5, 3), 1e-10, EvolveOptions{1e-6, 1.0});
    EXPECT_TRUE(ev.diagnostics.truncation_flag);
    EXPECT_THROW(evolve(FockState{3, DensityMatrix::Identity(3, 3), 0.0}, {1.0, 0.1, 1.0},
                        TemperatureRegime::zero(), grid),
                 domain_error);
}

TEST(Evolve, ZeroTemperatureSuperOhmicNegativeEpisode)
{
    // λ↑ < 0 for part of the run; the smallest eigenvalue is recorded, not asserted.
    const SpectrumParams p(3.0, 0.1, 1.0);
    const auto zt = TemperatureRegime::zero();
    const auto grid = uniform(10.0, 201);
    const Evolution ev = evolve(FockState::number(0, 10), p, zt, grid);
    const RateTrace rt = rate_trace(p, zt, 10.0, 201);
    double up_min = 0.0, eig_min = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        up_min = std::min(up_min, rt.lambda_up[i]);
        if (i > 0) eig_min = std::min(eig_min, ev.diagnostics.min_eigenvalue[i]);
    }
    EXPECT_LT(up_min, 0.0);
    std::printf("zero-T s=3 r=1: min lambda_up %.3e, min eigenvalue %.3e\n", up_min, eig_min);
    RecordProperty("min_eigenvalue", std::to_string(eig_min));
}
