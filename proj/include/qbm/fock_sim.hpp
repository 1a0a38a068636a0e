#pragma once

// Secular master equation on a truncated Fock space:
//   dρ/dt = λ↑/2 (2a†ρa - aa†ρ - ρaa†) + λ↓/2 (2aρa† - a†aρ - ρa†a)
// with λ↑ = Δ - γ and λ↓ = Δ + γ. The ladder operators are truncated
// (a†|N⟩ = 0), which keeps both dissipators exactly traceless.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qbm/error.hpp"
#include "qbm/ode.hpp"
#include "qbm/rate_table.hpp"
#include "qbm/spectral.hpp"

namespace qbm {

using DensityMatrix = Eigen::MatrixXcd;

struct FockState {
    int dim = 0;
    DensityMatrix matrix;
    double t = 0.0;

    /// |n⟩⟨n| in a space of the given dimension.
    static FockState number(int n, int dim)
    {
        if (dim < 1 || n < 0 || n >= dim) throw domain_error("FockState: level outside the truncation");
        FockState s{dim, DensityMatrix::Zero(dim, dim), 0.0};
        s.matrix(n, n) = 1.0;
        return s;
    }

    /// Truncated thermal state with p_k ∝ e^{-k/θ}, renormalized on dim levels.
    static FockState thermal(double theta, int dim)
    {
        if (dim < 1) throw domain_error("FockState: dim must be >= 1");
        if (!(theta >= 0.0)) throw domain_error("FockState: theta must be >= 0");
        FockState s{dim, DensityMatrix::Zero(dim, dim), 0.0};
        if (theta == 0.0) {
            s.matrix(0, 0) = 1.0;
            return s;
        }
        const double q = std::exp(-1.0 / theta);
        double w = 1.0, z = 0.0;
        for (int k = 0; k < dim; ++k, w *= q) z += w;
        w = 1.0;
        for (int k = 0; k < dim; ++k, w *= q) s.matrix(k, k) = w / z;
        return s;
    }

    double trace() const { return matrix.trace().real(); }
    double hermiticity_error() const { return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff(); }
    double tail_mass() const
    {
        double m = 0.0;
        for (int k = std::max(0, dim - 2); k < dim; ++k) m += matrix(k, k).real();
        return m;
    }
};

struct EvolutionDiagnostics {
    std::vector<double> min_eigenvalue;  // per snapshot
    double trace_drift = 0.0;            // max |Tr ρ - Tr ρ(0)|
    bool truncation_flag = false;
};

struct Evolution {
    std::vector<FockState> snapshots;
    EvolutionDiagnostics diagnostics;
};

struct EvolveOptions {
    double tail_flag = 1e-6;       // top-two-level population raising the flag
    double top_level_limit = 1e-3;  // top-level population escalating to truncation_error
};

inline double mean_n(const FockState& s)
{
    double n = 0.0;
    for (int k = 1; k < s.dim; ++k) n += k * s.matrix(k, k).real();
    return n;
}

inline double min_eigenvalue(const FockState& s)
{
    Eigen::SelfAdjointEigenSolver<DensityMatrix> es(s.matrix, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

inline DensityMatrix lindblad_rhs(const DensityMatrix& rho, double lambda_up, double lambda_down)
{
    const Eigen::Index d = rho.rows();
    if (rho.cols() != d) throw domain_error("lindblad_rhs: matrix must be square");
    DensityMatrix out(d, d);
    // c_k: diagonal of aa† in the truncated space.
    auto c = [d](Eigen::Index k) { return k + 1 < d ? static_cast<double>(k + 1) : 0.0; };
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
            std::complex<double> v =
                -0.5 * (lambda_up * (c(m) + c(n)) + lambda_down * static_cast<double>(m + n)) * rho(m, n);
            if (m > 0 && n > 0) v += lambda_up * std::sqrt(static_cast<double>(m * n)) * rho(m - 1, n - 1);
            if (m + 1 < d && n + 1 < d) {
                v += lambda_down * std::sqrt(static_cast<double>((m + 1) * (n + 1))) * rho(m + 1, n + 1);
            }
            out(m, n) = v;
        }
    }
    return out;
}

inline DensityMatrix lindblad_rhs(const FockState& s, double lambda_up, double lambda_down)
{
    if (s.matrix.rows() != s.dim || s.matrix.cols() != s.dim) throw domain_error("lindblad_rhs: dimension mismatch");
    return lindblad_rhs(s.matrix, lambda_up, lambda_down);
}

/// Evolves under rates(t) -> (Δ, γ), emitting a snapshot at each t_grid point.
template <class RateFn>
Evolution evolve_with_rates(const FockState& initial, RateFn&& rates, std::span<const double> t_grid,
                            double tol = 1e-10, const EvolveOptions& eopt = {})
{
    if (initial.matrix.rows() != initial.dim || initial.matrix.cols() != initial.dim) {
        throw domain_error("evolve: dimension mismatch");
    }
    if (std::abs(initial.trace() - 1.0) > 1e-8) throw domain_error("evolve: initial trace must be 1");
    if (initial.hermiticity_error() > 1e-12) throw domain_error("evolve: initial state must be Hermitian");
    if (t_grid.empty()) return {};

    Evolution ev;
    const double tr0 = initial.trace();
    const int dim = initial.dim;
    auto check_truncation = [&](double t, const DensityMatrix& rho) {
        double tail = 0.0;
        for (int k = std::max(0, dim - 2); k < dim; ++k) tail += rho(k, k).real();
        if (tail > eopt.tail_flag) ev.diagnostics.truncation_flag = true;
        const double top = rho(dim - 1, dim - 1).real();
        if (dim > 1 && top > eopt.top_level_limit) {
            std::ostringstream os;
            os << "Fock truncation too small: top level population " << top << " exceeds " << eopt.top_level_limit
               << " at t=" << t << " (dim=" << dim << ")";
            throw truncation_error(os.str());
        }
    };
    check_truncation(t_grid[0], initial.matrix);

    auto rhs = [&](double t, const DensityMatrix& rho) {
        const auto [d, g] = rates(t);
        return lindblad_rhs(rho, d - g, d + g);
    };
    auto norm = [](const DensityMatrix& m) { return m.cwiseAbs().maxCoeff(); };
    auto on_output = [&](std::size_t, double t, const DensityMatrix& rho) {
        FockState snap{dim, rho, t};
        ev.diagnostics.min_eigenvalue.push_back(min_eigenvalue(snap));
        ev.snapshots.push_back(std::move(snap));
    };
    auto after_step = [&](double t, DensityMatrix& rho) {
        rho = (0.5 * (rho + rho.adjoint())).eval();
        ev.diagnostics.trace_drift = std::max(ev.diagnostics.trace_drift, std::abs(rho.trace().real() - tr0));
        check_truncation(t, rho);
        return true;
    };

    ode::Options opt;
    opt.rel_tol = tol;
    opt.abs_tol = 1e-2 * tol;
    opt.max_step = 0.5;
    ode::dormand_prince<DensityMatrix>(rhs, initial.matrix, t_grid, norm, on_output, after_step, opt);
    return ev;
}

/// Evolves with Δ(t), γ(t) memoized in a RateTable built for [0, t_grid.back()].
inline Evolution evolve(const FockState& initial, const SpectrumParams& p, const TemperatureRegime& temp,
                        std::span<const double> t_grid, double tol = 1e-10, const EvolveOptions& eopt = {})
{
    if (t_grid.empty()) return {};
    const RateTable table(p, temp, t_grid.back(), tol);
    return evolve_with_rates(initial, table, t_grid, tol, eopt);
}

}  // namespace qbm
