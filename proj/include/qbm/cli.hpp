#pragma once

// Command implementations behind tools/qbm. Each command writes to a stream so
// it can be exercised without a process boundary.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qbm/error.hpp"
#include "qbm/fock_sim.hpp"
#include "qbm/heating.hpp"
#include "qbm/kernels.hpp"
#include "qbm/parallel.hpp"
#include "qbm/spectral.hpp"

namespace qbm::cli {

enum class TimeAxis { omega0, omegac };

enum ExitCode : int { ok = 0, validation = 2, numeric = 3, truncation = 4 };

inline constexpr double default_tol = 1e-10;

struct RunConfig {
    double s = 1.0;
    double alpha = 0.1;
    double r = 1.0;
    TemperatureMode temperature_mode = TemperatureMode::Zero;
    double theta = 0.0;
    double t_max = 20.0;
    int n_points = 401;
    TimeAxis time_axis = TimeAxis::omega0;
    double tol = default_tol;
    std::string output_path;
    std::size_t workers = default_workers();

    SpectrumParams spectrum() const { return {s, alpha, r}; }
    TemperatureRegime temperature() const { return {temperature_mode, theta}; }

    void validate() const
    {
        (void)spectrum();
        (void)temperature();
        if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw domain_error("t-max must be >= 0");
        if (n_points < 2 || n_points > 1000000) throw domain_error("n must lie in [2, 1000000]");
        if (!(tol >= 1e-12 && tol <= 1e-4)) throw domain_error("tol must lie in [1e-12, 1e-4]");
        if (workers < 1) throw domain_error("workers must be >= 1");
    }

    /// Uniform grid on [0, t_max] in units of 1/ω₀; a single point when t_max = 0.
    std::vector<double> grid() const
    {
        if (t_max == 0.0) return {0.0};
        std::vector<double> g(static_cast<std::size_t>(n_points));
        for (int i = 0; i < n_points; ++i) g[i] = t_max * i / (n_points - 1);
        g.back() = t_max;
        return g;
    }

    double axis_scale() const { return time_axis == TimeAxis::omegac ? r : 1.0; }
};

/// 12 significant digits, locale-independent.
inline std::string format_number(double v)
{
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Tolerance from QBM_TOL, or the built-in default.
inline double env_tolerance()
{
    if (const char* env = std::getenv("QBM_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end == env || *end != '\0') throw domain_error("QBM_TOL is not a number");
        return v;
    }
    return default_tol;
}

/// `key = value` lines; '#' starts a comment. Keys keep their order.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw domain_error("cannot open config file " + path);
    auto trim = [](std::string x) {
        const auto b = x.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = x.find_last_not_of(" \t\r");
        return x.substr(b, e - b + 1);
    };
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw domain_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw domain_error(path + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

inline void write_rates_csv(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const SpectrumParams p = cfg.spectrum();
    const TemperatureRegime temp = cfg.temperature();
    const std::vector<double> grid = cfg.grid();

    RateTrace tr;
    if (grid.size() == 1) {
        tr.times = {0.0};
        tr.delta = tr.gamma = tr.lambda_up = tr.lambda_down = {0.0};
    } else {
        tr = rate_trace(p, temp, cfg.t_max, cfg.n_points, cfg.tol, cfg.workers);
    }

    const double norm = 2.0 * cfg.alpha * cfg.alpha * cfg.theta;
    const bool with_bar = temp.mode() == TemperatureMode::HighT && norm > 0.0;
    out << "t,delta,gamma,lambda_up,lambda_down,delta_bar\n";
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        out << format_number(tr.times[i] * cfg.axis_scale()) << ',' << format_number(tr.delta[i]) << ','
            << format_number(tr.gamma[i]) << ',' << format_number(tr.lambda_up[i]) << ','
            << format_number(tr.lambda_down[i]) << ',';
        if (with_bar) out << format_number(tr.delta[i] / norm);
        out << '\n';
    }
}

struct HeatingModes {
    bool exact = true;
    bool markov = true;
    bool short_full = true;
    bool short_highT = true;

    /// Comma- or space-separated subset of exact, markov, short_full, short_highT.
    static HeatingModes parse(const std::vector<std::string>& names)
    {
        HeatingModes m{false, false, false, false};
        for (const auto& raw : names) {
            std::stringstream ss(raw);
            std::string name;
            while (std::getline(ss, name, ',')) {
                if (name.empty()) continue;
                std::replace(name.begin(), name.end(), '-', '_');
                if (name == "exact") m.exact = true;
                else if (name == "markov") m.markov = true;
                else if (name == "short_full") m.short_full = true;
                else if (name == "short_highT" || name == "short_hight") m.short_highT = true;
                else if (name == "all") m = HeatingModes{};
                else throw domain_error("unknown heating mode '" + name + "'");
            }
        }
        return m;
    }
};

inline void write_heating_csv(const RunConfig& cfg, double n0, const HeatingModes& modes, std::ostream& out,
                              std::ostream* warnings = nullptr)
{
    cfg.validate();
    if (!(n0 >= 0.0) || !std::isfinite(n0)) throw domain_error("n0 must be >= 0");
    const SpectrumParams p = cfg.spectrum();
    const TemperatureRegime temp = cfg.temperature();
    const std::vector<double> grid = cfg.grid();

    HeatingTrace tr;
    if (modes.exact || modes.short_full || modes.short_highT) {
        tr = heating_exact(n0, p, temp, grid, cfg.tol);
    } else {
        tr.times = grid;
        tr.n_markov = heating_markov(p, temp, grid);
    }
    if (warnings && (modes.short_full || modes.short_highT) && grid.back() > 0.1 * thermalization_time(p)) {
        *warnings << "warning: short-time approximation used beyond 0.1 t_th\n";
    }

    out << "t,n_exact,n_markov,n_short_full,n_short_highT\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << format_number(grid[i] * cfg.axis_scale()) << ',';
        if (modes.exact) out << format_number(tr.n_exact[i]);
        out << ',';
        if (modes.markov) out << format_number(tr.n_markov[i]);
        out << ',';
        if (modes.short_full) out << format_number(tr.n_short[i]);
        out << ',';
        if (modes.short_highT) out << format_number(tr.n_short_highT[i]);
        out << '\n';
    }
}

inline void write_thermtime_csv(const std::vector<double>& r_grid, std::ostream& out)
{
    out << "r,ttilde_sub,ttilde_ohmic,ttilde_super\n";
    for (double r : r_grid) {
        out << format_number(r) << ',' << format_number(normalized_thermalization_time(0.5, r)) << ','
            << format_number(normalized_thermalization_time(1.0, r)) << ','
            << format_number(normalized_thermalization_time(3.0, r)) << '\n';
    }
}

/// Evolves ρ on `dim` Fock levels and compares Tr[ρ a†a] with the heating
/// function. An integral n0 starts from |n0⟩, otherwise from the thermal
/// state with mean n0.
inline nlohmann::json fockcheck_report(const RunConfig& cfg, double n0, int dim)
{
    cfg.validate();
    if (!(n0 >= 0.0) || !std::isfinite(n0)) throw domain_error("n0 must be >= 0");
    if (dim < 2) throw domain_error("dim must be >= 2");
    const SpectrumParams p = cfg.spectrum();
    const TemperatureRegime temp = cfg.temperature();
    const std::vector<double> grid = cfg.grid();

    FockState init;
    if (n0 == std::floor(n0)) {
        if (n0 >= dim) throw truncation_error("n0 does not fit in dim levels");
        init = FockState::number(static_cast<int>(n0), dim);
    } else {
        init = FockState::thermal(1.0 / std::log1p(1.0 / n0), dim);
    }
    const double n_init = mean_n(init);

    const Evolution ev = evolve(init, p, temp, grid, cfg.tol);
    const HeatingTrace ht = heating_exact(n_init, p, temp, grid, cfg.tol);

    std::vector<double> n_fock(grid.size()), times(grid.size());
    double max_dev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        n_fock[i] = mean_n(ev.snapshots[i]);
        times[i] = grid[i] * cfg.axis_scale();
        max_dev = std::max(max_dev, std::abs(n_fock[i] - ht.n_exact[i]));
    }
    const auto& eig = ev.diagnostics.min_eigenvalue;
    const double min_eig = eig.empty() ? 0.0 : *std::min_element(eig.begin(), eig.end());
    const bool pass = max_dev <= 1e-6 && ev.diagnostics.trace_drift <= 1e-8 && !ev.diagnostics.truncation_flag;

    nlohmann::json j;
    j["pass"] = pass;
    j["max_abs_deviation"] = max_dev;
    j["trace_drift"] = ev.diagnostics.trace_drift;
    j["truncation_flag"] = ev.diagnostics.truncation_flag;
    j["min_eigenvalue"] = min_eig;
    j["dim"] = dim;
    j["n0"] = n_init;
    j["params"] = {{"s", cfg.s},         {"alpha", cfg.alpha},      {"r", cfg.r},
                   {"theta", cfg.theta}, {"t_max", cfg.t_max},      {"n_points", cfg.n_points},
                   {"tol", cfg.tol},     {"time_axis", cfg.time_axis == TimeAxis::omegac ? "omegac" : "omega0"}};
    j["params"]["temperature"] = temp.mode() == TemperatureMode::Zero    ? "zero"
                                 : temp.mode() == TemperatureMode::HighT ? "high-t"
                                                                         : "exact";
    j["times"] = times;
    j["n_fock"] = n_fock;
    j["n_exact"] = ht.n_exact;
    j["min_eigenvalue_trace"] = eig;
    return j;
}

/// Maps library exceptions to the documented exit codes.
inline int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const truncation_error*>(&e)) return truncation;
    if (dynamic_cast<const numeric_error*>(&e)) return numeric;
    if (dynamic_cast<const domain_error*>(&e)) return validation;
    return numeric;
}

}  // namespace qbm::cli
