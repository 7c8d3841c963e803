#pragma once

// Command implementations behind the rchwave executable.  Every command
// returns a process exit code: 0 success, 1 configuration error,
// 2 numerical failure.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rchwave/evolution.hpp"
#include "rchwave/io.hpp"
#include "rchwave/stability_index.hpp"
#include "rchwave/wave_family.hpp"

namespace rchwave {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_numerical = 2 };

struct RunConfig {
    double omega = 1.0;
    std::optional<double> c;
    std::optional<double> c_start, c_end, c_step;
    int n_modes = 128;
    double newton_tol = 1e-12;
    double tail_tol = 1e-10;
    std::string output_dir = ".";
    double seed_amplitude = 0.05;
    double perturbation_size = 0.01;
    double T = 50.0;
    double dt = 1e-3;
    double dt_out = 0.1;
    std::uint64_t seed_rng = 20240601;

    double start() const { return c_start.value_or(0.51 * omega); }
    double end() const { return c_end.value_or(3.0 * omega); }
    double step() const { return c_step.value_or(0.01 * omega); }

    SolverOptions solver() const
    {
        SolverOptions o;
        o.n_modes = n_modes;
        o.newton_tol = newton_tol;
        o.tail_tol = tail_tol;
        return o;
    }
};

/// Overlay `key = value` settings onto a configuration.
inline void apply_settings(RunConfig& cfg, const std::map<std::string, std::string>& kv)
{
    for (const auto& [k, v] : kv) {
        if (k == "omega") cfg.omega = io::to_double(k, v);
        else if (k == "c") cfg.c = io::to_double(k, v);
        else if (k == "c_start") cfg.c_start = io::to_double(k, v);
        else if (k == "c_end") cfg.c_end = io::to_double(k, v);
        else if (k == "c_step") cfg.c_step = io::to_double(k, v);
        else if (k == "n_modes") cfg.n_modes = static_cast<int>(io::to_long(k, v));
        else if (k == "newton_tol") cfg.newton_tol = io::to_double(k, v);
        else if (k == "tail_tol") cfg.tail_tol = io::to_double(k, v);
        else if (k == "output_dir") cfg.output_dir = v;
        else if (k == "seed_amplitude") cfg.seed_amplitude = io::to_double(k, v);
        else if (k == "perturbation_size") cfg.perturbation_size = io::to_double(k, v);
        else if (k == "T") cfg.T = io::to_double(k, v);
        else if (k == "dt") cfg.dt = io::to_double(k, v);
        else if (k == "dt_out") cfg.dt_out = io::to_double(k, v);
        else if (k == "seed_rng") cfg.seed_rng = static_cast<std::uint64_t>(io::to_long(k, v));
        else throw ConfigError("unknown config key '" + k + "'");
    }
}

inline RunConfig load_config(const std::string& path)
{
    RunConfig cfg;
    apply_settings(cfg, io::read_key_values(path));
    return cfg;
}

/// Checks shared by all commands; throws ConfigError.
inline void validate(const RunConfig& cfg)
{
    if (cfg.omega == 0.0)
        throw ConfigError("omega = 0 is the classical Camassa-Holm limit, where smooth zero-mean periodic waves "
                          "do not form a continuous branch; use omega > 0");
    if (!(cfg.omega > 0.0)) throw ConfigError("omega must be positive");
    if (cfg.n_modes < 8) throw ConfigError("n_modes must be at least 8");
    if (!(cfg.newton_tol > 0.0) || !(cfg.tail_tol > 0.0)) throw ConfigError("tolerances must be positive");
    if (!(cfg.dt > 0.0) || !(cfg.dt_out > 0.0) || !(cfg.T >= 0.0)) throw ConfigError("dt, dt_out must be positive and T >= 0");
    if (!(cfg.start() > 0.5 * cfg.omega)) throw ConfigError("c_start must exceed omega/2");
    if (cfg.end() < cfg.start()) throw ConfigError("c_end must not be below c_start");
    if (!(cfg.step() > 0.0)) throw ConfigError("c_step must be positive");
    if (cfg.c && !(*cfg.c > 0.5 * cfg.omega)) throw ConfigError("c must exceed omega/2");
}

inline std::string omega_tag(double omega) { return "omega" + io::format_short(omega); }

inline std::filesystem::path output_path(const RunConfig& cfg, const std::string& name)
{
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + cfg.output_dir);
    return dir / name;
}

/// Worker count: hardware concurrency capped by RCHWAVE_THREADS.
inline unsigned worker_count()
{
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("RCHWAVE_THREADS")) {
        const long cap = std::strtol(env, nullptr, 10);
        if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Run a command body, mapping exceptions onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DomainError& e) {
        err << "invalid parameters: " << e.what() << "\n";
        return exit_config;
    } catch (const NoConvergence& e) {
        err << "numerical failure at c = " << io::format_short(e.c()) << ": " << e.what() << "\n";
        return exit_numerical;
    } catch (const StepUnderflow& e) {
        err << "numerical failure at c = " << io::format_short(e.c()) << ": " << e.what() << "\n";
        return exit_numerical;
    } catch (const Error& e) {
        err << "numerical failure: " << e.what() << "\n";
        return exit_numerical;
    }
}

inline void print_point(std::ostream& out, const WavePoint& w)
{
    const ConservedTriple ct = conserved(w.phi, w.omega);
    out << "omega          " << io::format_short(w.omega) << "\n"
        << "c              " << io::format_short(w.c) << "\n"
        << "A              " << io::format_short(w.A) << "\n"
        << "max phi        " << io::format_short(synthesize(w.phi).values.maxCoeff()) << "\n"
        << "min gap        " << io::format_short(w.min_gap) << "\n"
        << "residual       " << io::format_short(w.residual_norm) << "\n"
        << "E              " << io::format_short(ct.E) << "\n"
        << "F              " << io::format_short(ct.F) << "\n"
        << "a_1, a_2       " << io::format_short(w.phi.cos_coeffs[0]) << ", "
        << io::format_short(w.phi.cos_coeffs[1]) << "\n";
}

inline int cmd_seed(double a, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        validate(cfg);
        const WavePoint w = stokes_seed(a, cfg.omega, cfg.solver());
        out << "Stokes seed, amplitude a = " << io::format_short(a) << "\n";
        print_point(out, w);
        return int(exit_ok);
    });
}

inline void report_stop(std::ostream& out, const FamilyCurve& curve)
{
    if (curve.stop != StopReason::reached_end)
        out << "branch stopped (" << to_string(curve.stop) << ") at c = " << io::format_short(curve.stop_c) << ": "
            << curve.message << "\n";
}

inline int cmd_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        validate(cfg);
        const FamilyCurve curve = continue_family(cfg.omega, cfg.start(), cfg.end(), cfg.step(), cfg.solver());
        const auto path = output_path(cfg, "trace_" + omega_tag(cfg.omega) + ".csv");
        io::CsvWriter csv(path.string(), {"c", "A", "M", "E", "F", "max_phi", "min_gap", "residual", "iterations"});
        for (const auto& p : curve.points) {
            const ConservedTriple ct = conserved(p.phi, p.omega);
            csv.row({p.c, p.A, ct.M, ct.E, ct.F, synthesize(p.phi).values.maxCoeff(), p.min_gap, p.residual_norm,
                     double(p.iterations)});
        }
        out << "wrote " << curve.points.size() << " points to " << path.string() << "\n";
        report_stop(out, curve);
        return int(exit_ok);
    });
}

inline void print_analysis(std::ostream& out, const PointAnalysis& pa)
{
    const StabilityVerdict& v = pa.verdict;
    auto f = [](double x) { return io::format_short(x); };
    out << "c                      " << f(v.c) << "\n"
        << "omega                  " << f(v.omega) << "\n"
        << "A                      " << f(pa.wave.A) << "\n"
        << "E                      " << f(pa.scalars.E) << "\n"
        << "n(L), z(L)             " << v.n_L << ", " << v.z_L << "\n"
        << "n(L_Pi), z(L_Pi)       " << v.n_LPi << ", " << v.z_LPi << "\n"
        << "theta                  " << f(v.theta) << " (" << to_string(pa.floquet.classification) << ")\n"
        << "int y1 over a period   " << f(pa.floquet.integral_y1) << "\n"
        << "d_c                    " << f(v.d_c) << "\n"
        << "dA/dc                  " << f(v.dA_dc) << "\n"
        << "dE/dc                  " << f(v.dE_dc) << "\n"
        << "det A(0)               " << f(v.det_A0) << "\n"
        << "<L^-1 1, 1>            " << f(v.inner_L_inv_1_1) << "\n"
        << "constrained count      " << v.n_constrained << "\n"
        << "route dE/dc > 0        " << (v.de_route ? "yes" : "no") << "\n"
        << "route d_c, dA/dc       " << (v.dc_da_route ? "yes" : "no") << "\n"
        << "decision               " << to_string(v.decision) << "\n"
        << "criterion              " << to_string(v.criterion) << "\n";
    if (!pa.fold_message.empty()) out << "fold                   " << pa.fold_message << "\n";
}

inline AnalysisOptions analysis_options(const RunConfig& cfg)
{
    AnalysisOptions ao;
    ao.solver = cfg.solver();
    return ao;
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        validate(cfg);
        if (!cfg.c) throw ConfigError("analyze needs --c");
        const WavePoint w = solve_wave(*cfg.c, cfg.omega, cfg.solver());
        print_analysis(out, analyze_point(w, analysis_options(cfg)));
        return int(exit_ok);
    });
}

inline const std::vector<std::string>& sweep_header()
{
    static const std::vector<std::string> h{"c",     "A",   "E",    "F",     "d_c",   "dA_dc",
                                            "dE_dc", "theta", "int_y1", "n_L", "z_L", "n_LPi", "z_LPi",
                                            "det_A0", "inner_L_inv_1_1", "decision"};
    return h;
}

inline std::vector<std::string> sweep_row(const PointAnalysis& pa)
{
    const StabilityVerdict& v = pa.verdict;
    const ConservedTriple ct = conserved(pa.wave.phi, pa.wave.omega);
    auto f = [](double x) { return io::format_number(x); };
    return {f(v.c),        f(pa.wave.A),    f(ct.E),      f(ct.F),
            f(v.d_c),      f(v.dA_dc),      f(v.dE_dc),   f(v.theta),
            f(pa.floquet.integral_y1),      std::to_string(v.n_L),   std::to_string(v.z_L),
            std::to_string(v.n_LPi),        std::to_string(v.z_LPi), f(v.det_A0),
            f(v.inner_L_inv_1_1),           to_string(v.decision)};
}

/// Analyze every point of a curve on a small worker pool; results keep the
/// curve order.  Throws the first numerical failure, tagged with its c.
inline std::vector<PointAnalysis> analyze_curve(const FamilyCurve& curve, const AnalysisOptions& ao, unsigned workers)
{
    const std::size_t n = curve.points.size();
    std::vector<PointAnalysis> res(n);
    std::vector<std::exception_ptr> errs(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                res[i] = analyze_point(curve.points[i], ao);
            } catch (...) {
                errs[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned w = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    for (unsigned t = 1; t < w; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i) {
        if (!errs[i]) continue;
        try {
            std::rethrow_exception(errs[i]);
        } catch (const NoConvergence&) {
            throw;
        } catch (const Error& e) {
            throw NoConvergence(std::string("analysis failed: ") + e.what(), curve.points[i].c);
        }
    }
    return res;
}

inline int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        validate(cfg);
        const FamilyCurve curve = continue_family(cfg.omega, cfg.start(), cfg.end(), cfg.step(), cfg.solver());
        const std::vector<PointAnalysis> rows = analyze_curve(curve, analysis_options(cfg), worker_count());

        const std::string tag = omega_tag(cfg.omega);
        const auto csv_path = output_path(cfg, "sweep_" + tag + ".csv");
        {
            io::CsvWriter csv(csv_path.string(), sweep_header());
            for (const auto& pa : rows) csv.row_cells(sweep_row(pa));
        }
        io::Series s;
        for (const auto& pa : rows) {
            s.x.push_back(pa.wave.c);
            s.y.push_back(pa.scalars.E);
        }
        const auto svg_path = output_path(cfg, "sweep_E_" + tag + ".svg");
        io::write_svg(svg_path.string(), {s},
                      {"Energy E(phi) along the wave family, omega = " + io::format_short(cfg.omega), "wave speed c",
                       "E(phi)"});
        std::size_t stable = 0;
        for (const auto& pa : rows) stable += pa.verdict.decision == Decision::spectrally_stable;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double d0 = rows[i - 1].verdict.d_c, d1 = rows[i].verdict.d_c;
            if ((d0 < 0.0) != (d1 < 0.0))
                out << "d_c changes sign between c = " << io::format_short(rows[i - 1].wave.c)
                    << " and c = " << io::format_short(rows[i].wave.c) << "\n";
        }
        out << "wrote " << rows.size() << " rows to " << csv_path.string() << " and " << svg_path.string() << "\n"
            << stable << " of " << rows.size() << " points spectrally stable\n";
        report_stop(out, curve);
        return int(exit_ok);
    });
}

inline int cmd_evolve(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        validate(cfg);
        if (!cfg.c) throw ConfigError("evolve needs --c");
        const WavePoint w = solve_wave(*cfg.c, cfg.omega, cfg.solver());
        EvolutionOptions eo;
        eo.dt = cfg.dt;
        eo.dt_out = cfg.dt_out;
        eo.seed = cfg.seed_rng;
        const OrbitalRun run = run_orbital_experiment(w, cfg.perturbation_size, cfg.T, eo);
        const auto path = output_path(cfg, "evolve_" + omega_tag(cfg.omega) + "_c" + io::format_short(*cfg.c) + ".csv");
        io::CsvWriter csv(path.string(), {"t", "distance", "M", "E", "F"});
        for (const auto& s : run.series) csv.row({s.t, s.distance, s.M, s.E, s.F});
        out << "wrote " << run.series.size() << " samples to " << path.string() << "\n"
            << "perturbation seed      " << run.seed << "\n"
            << "initial distance       " << io::format_short(run.initial_distance) << "\n"
            << "max distance           " << io::format_short(run.max_distance) << "\n"
            << "drift M, E, F          " << io::format_short(run.drift_M) << ", " << io::format_short(run.drift_E)
            << ", " << io::format_short(run.drift_F) << "\n";
        if (run.initial_distance > 0.0)
            out << "max / initial          " << io::format_short(run.max_distance / run.initial_distance)
                << " (orbital bound: 5)\n";
        if (run.aliasing_warning) out << "warning: spectral tail exceeded 1e-6 during the run\n";
        return int(exit_ok);
    });
}

inline int cmd_plot(const std::string& csv_path, const std::string& x_col, const std::string& y_col,
                    const RunConfig& cfg, const std::string& svg_out, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const io::Table t = io::read_csv(csv_path);
        if (t.rows.empty()) throw ConfigError("CSV file " + csv_path + " has no data rows");
        io::Series s;
        s.x = t.numeric(x_col);
        s.y = t.numeric(y_col);
        std::string path = svg_out;
        if (path.empty()) {
            std::filesystem::path p(csv_path);
            p.replace_extension();
            path = p.string() + "_" + y_col + "_vs_" + x_col + ".svg";
        }
        io::write_svg(path, {s}, {y_col + " vs " + x_col + ", omega = " + io::format_short(cfg.omega), x_col, y_col});
        out << "wrote " << path << "\n";
        return int(exit_ok);
    });
}

}  // namespace rchwave
