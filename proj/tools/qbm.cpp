// qbm: rates, heating curves, thermalization times and Fock-space checks
// for a damped harmonic oscillator in a bosonic bath.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qbm/cli.hpp"

namespace {

using qbm::cli::RunConfig;

struct Inputs {
    std::vector<double> s{1.0};
    std::vector<double> r{1.0};
    double alpha = 0.1;
    bool zero_t = false;
    double high_t = 0.0;
    double exact = 0.0;
    double t_max = 20.0;
    int n = 401;
    std::string time_axis = "omega0";
    double tol = qbm::cli::default_tol;
    std::string output;
    std::string config;
    std::size_t workers = qbm::default_workers();
    double n0 = 0.0;
    int dim = 60;
    std::vector<std::string> modes{"all"};
    double r_min = 0.05;
    double r_max = 10.0;
};

void add_common(CLI::App* sub, Inputs& in, bool sweep)
{
    if (sweep) {
        sub->add_option("--s", in.s, "Spectral exponent(s); several values run a sweep")->delimiter(',');
        sub->add_option("--r", in.r, "Resonance parameter(s) r = omega_c/omega_0")->delimiter(',');
    } else {
        sub->add_option("--s", in.s, "Spectral exponent")->expected(1);
        sub->add_option("--r", in.r, "Resonance parameter r = omega_c/omega_0")->expected(1);
    }
    sub->add_option("--alpha", in.alpha, "Coupling constant");
    sub->add_flag("--zero-t", in.zero_t, "Zero-temperature bath (default)");
    sub->add_option("--high-t", in.high_t, "High-temperature bath with theta = kT/(hbar omega_0)");
    sub->add_option("--exact", in.exact, "Bose-Einstein bath with theta = kT/(hbar omega_0)");
    sub->add_option("--t-max", in.t_max, "Final time in units of 1/omega_0");
    sub->add_option("--n", in.n, "Number of grid points");
    sub->add_option("--time-axis", in.time_axis, "Emitted time column: omega0 or omegac");
    sub->add_option("--tol", in.tol, "Relative quadrature tolerance (default: QBM_TOL or 1e-10)");
    sub->add_option("-o,--output", in.output, "Output file (stdout if omitted)");
    sub->add_option("--config", in.config, "key = value file; command-line flags take precedence");
    sub->add_option("--workers", in.workers, "Worker threads");
}

std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(v);
    while (ss >> item) {
        std::stringstream parts(item);
        std::string piece;
        while (std::getline(parts, piece, ',')) {
            if (!piece.empty()) out.push_back(piece);
        }
    }
    return out;
}

// Options absent from the command line take their value from the config file,
// then QBM_TOL for the tolerance.
void apply_config(CLI::App* sub, const Inputs& in)
{
    if (!in.config.empty()) {
        for (const auto& [key, value] : qbm::cli::read_config_file(in.config)) {
            if (key == "config") throw qbm::domain_error("config files cannot nest");
            CLI::Option* opt = sub->get_option_no_throw("--" + key);
            if (!opt) throw qbm::domain_error("unknown config key '" + key + "'");
            if (opt->count() > 0) continue;
            for (const auto& tok : split_list(value)) opt->add_result(tok);
            opt->run_callback();
        }
    }
    CLI::Option* tol = sub->get_option_no_throw("--tol");
    if (tol && tol->count() == 0 && std::getenv("QBM_TOL")) {
        tol->add_result(std::getenv("QBM_TOL"));
        tol->run_callback();
    }
}

RunConfig to_config(CLI::App* sub, const Inputs& in, double s, double r)
{
    RunConfig cfg;
    cfg.s = s;
    cfg.r = r;
    cfg.alpha = in.alpha;
    const bool has_high = sub->get_option("--high-t")->count() > 0;
    const bool has_exact = sub->get_option("--exact")->count() > 0;
    if (static_cast<int>(in.zero_t) + has_high + has_exact > 1) {
        throw qbm::domain_error("choose one of --zero-t, --high-t, --exact");
    }
    if (has_high) {
        cfg.temperature_mode = qbm::TemperatureMode::HighT;
        cfg.theta = in.high_t;
    } else if (has_exact) {
        cfg.temperature_mode = qbm::TemperatureMode::Exact;
        cfg.theta = in.exact;
    }
    cfg.t_max = in.t_max;
    cfg.n_points = in.n;
    if (in.time_axis == "omega0") cfg.time_axis = qbm::cli::TimeAxis::omega0;
    else if (in.time_axis == "omegac") cfg.time_axis = qbm::cli::TimeAxis::omegac;
    else throw qbm::domain_error("time-axis must be omega0 or omegac");
    cfg.tol = in.tol;
    cfg.output_path = in.output;
    cfg.workers = in.workers;
    cfg.validate();
    if (auto w = cfg.temperature().validity_warning()) std::cerr << "warning: " << *w << '\n';
    return cfg;
}

void emit(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qbm::domain_error("cannot write " + path);
    out << text;
    if (!out) throw qbm::domain_error("write failed for " + path);
}

// Output path for one point of an (s, r) sweep: "<stem>_s<s>_r<r><ext>", or
// "<dir>/<command>_s<s>_r<r>.csv" when the output names a directory.
std::string sweep_path(const std::string& output, const std::string& command, double s, double r)
{
    namespace fs = std::filesystem;
    const std::string tag = "_s" + qbm::cli::format_number(s) + "_r" + qbm::cli::format_number(r);
    if (output.empty()) throw qbm::domain_error("a sweep over several s or r values needs --output");
    fs::path p(output);
    if (fs::is_directory(p) || output.back() == '/') {
        fs::create_directories(p);
        return (p / (command + tag + ".csv")).string();
    }
    return (p.parent_path() / (p.stem().string() + tag + p.extension().string())).string();
}

template <class Write>
void run_sweep(CLI::App* sub, const Inputs& in, const std::string& command, Write&& write)
{
    std::vector<std::pair<double, double>> points;
    for (double s : in.s) {
        for (double r : in.r) points.emplace_back(s, r);
    }
    if (points.size() == 1) {
        const RunConfig cfg = to_config(sub, in, points[0].first, points[0].second);
        std::ostringstream os;
        write(cfg, os);
        emit(cfg.output_path, os.str());
        return;
    }
    std::vector<RunConfig> cfgs;
    for (const auto& [s, r] : points) {
        RunConfig cfg = to_config(sub, in, s, r);
        cfg.output_path = sweep_path(in.output, command, s, r);
        cfg.workers = 1;
        cfgs.push_back(cfg);
    }
    qbm::parallel_for(
        cfgs.size(),
        [&](std::size_t i) {
            std::ostringstream os;
            write(cfgs[i], os);
            emit(cfgs[i].output_path, os.str());
        },
        in.workers);
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Non-Markovian rates and heating of a damped quantum harmonic oscillator"};
    app.require_subcommand(1);

    Inputs in;
    CLI::App* rates = app.add_subcommand("rates", "Delta(t), gamma(t) and channel rates as CSV");
    add_common(rates, in, true);

    CLI::App* heating = app.add_subcommand("heating", "Heating function <n(t)> and its approximations as CSV");
    add_common(heating, in, true);
    heating->add_option("--n0", in.n0, "Initial occupation");
    heating->add_option("--modes", in.modes, "Columns: exact, markov, short_full, short_highT (default all)")
        ->delimiter(',');

    CLI::App* thermtime = app.add_subcommand("thermtime", "Normalized thermalization times versus r as CSV");
    thermtime->add_option("--r", in.r, "Explicit r values")->delimiter(',');
    thermtime->add_option("--r-min", in.r_min, "Smallest r of the uniform grid");
    thermtime->add_option("--r-max", in.r_max, "Largest r of the uniform grid");
    thermtime->add_option("--n", in.n, "Number of grid points");
    thermtime->add_option("-o,--output", in.output, "Output file (stdout if omitted)");
    thermtime->add_option("--config", in.config, "key = value file; command-line flags take precedence");

    CLI::App* fock = app.add_subcommand("fockcheck", "Fock-space evolution cross-check as JSON");
    add_common(fock, in, false);
    fock->add_option("--n0", in.n0, "Initial occupation (integral: number state, else thermal)");
    fock->add_option("--dim", in.dim, "Fock-space dimension");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : qbm::cli::validation;
    }

    try {
        if (rates->parsed()) {
            apply_config(rates, in);
            run_sweep(rates, in, "rates",
                      [](const RunConfig& cfg, std::ostream& os) { qbm::cli::write_rates_csv(cfg, os); });
        } else if (heating->parsed()) {
            apply_config(heating, in);
            const auto modes = qbm::cli::HeatingModes::parse(in.modes);
            run_sweep(heating, in, "heating", [&](const RunConfig& cfg, std::ostream& os) {
                qbm::cli::write_heating_csv(cfg, in.n0, modes, os, &std::cerr);
            });
        } else if (thermtime->parsed()) {
            apply_config(thermtime, in);
            std::vector<double> grid;
            if (thermtime->get_option("--r")->count() > 0) {
                grid = in.r;
            } else {
                if (!(in.r_min > 0.0) || !(in.r_max >= in.r_min)) throw qbm::domain_error("r must be > 0");
                if (in.n < 1) throw qbm::domain_error("n must be >= 1");
                for (int i = 0; i < in.n; ++i) {
                    grid.push_back(in.n == 1 ? in.r_min : in.r_min + (in.r_max - in.r_min) * i / (in.n - 1));
                }
            }
            for (double r : grid) {
                if (!(r > 0.0)) throw qbm::domain_error("r must be > 0");
            }
            std::ostringstream os;
            qbm::cli::write_thermtime_csv(grid, os);
            emit(in.output, os.str());
        } else if (fock->parsed()) {
            apply_config(fock, in);
            const RunConfig cfg = to_config(fock, in, in.s.at(0), in.r.at(0));
            const auto report = qbm::cli::fockcheck_report(cfg, in.n0, in.dim);
            emit(cfg.output_path, report.dump(2) + "\n");
        }
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qbm::cli::validation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qbm::cli::exit_code_for(e);
    }
    return qbm::cli::ok;
}
