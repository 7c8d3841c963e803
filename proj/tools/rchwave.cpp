// rchwave: periodic traveling waves of the regularized Camassa-Holm equation.
//
//   rchwave seed    --amplitude a --omega w
//   rchwave trace   [--config f] [--omega w] [--c-start ..] [--c-end ..] [--c-step ..]
//   rchwave analyze --c c [--omega w]
//   rchwave sweep   [--config f] [--omega w] ...
//   rchwave evolve  --c c [--perturbation p] [--T T] [--dt dt] [--seed-rng s]
//   rchwave plot    table.csv --x c --y E

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rchwave/cli_io.hpp"

namespace {

struct Flags {
    std::optional<double> omega, c, c_start, c_end, c_step, tol, perturbation, T, dt, dt_out, amplitude;
    std::optional<int> modes;
    std::optional<std::uint64_t> seed_rng;
    std::optional<std::string> out, config;
};

template <class T, class U>
void overlay(T& dst, const std::optional<U>& src)
{
    if (src) dst = *src;
}

rchwave::RunConfig build_config(const Flags& f)
{
    rchwave::RunConfig cfg = f.config ? rchwave::load_config(*f.config) : rchwave::RunConfig{};
    overlay(cfg.omega, f.omega);
    if (f.c) cfg.c = *f.c;
    if (f.c_start) cfg.c_start = *f.c_start;
    if (f.c_end) cfg.c_end = *f.c_end;
    if (f.c_step) cfg.c_step = *f.c_step;
    overlay(cfg.newton_tol, f.tol);
    overlay(cfg.n_modes, f.modes);
    overlay(cfg.output_dir, f.out);
    overlay(cfg.perturbation_size, f.perturbation);
    overlay(cfg.T, f.T);
    overlay(cfg.dt, f.dt);
    overlay(cfg.dt_out, f.dt_out);
    overlay(cfg.seed_rng, f.seed_rng);
    overlay(cfg.seed_amplitude, f.amplitude);
    return cfg;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Periodic traveling waves of the regularized Camassa-Holm equation"};
    app.require_subcommand(1);
    app.fallthrough();

    Flags f;
    app.add_option("--omega", f.omega, "drift parameter omega (> 0)");
    app.add_option("--c", f.c, "wave speed for analyze/evolve");
    app.add_option("--c-start", f.c_start, "first wave speed of a trace or sweep");
    app.add_option("--c-end", f.c_end, "last wave speed of a trace or sweep");
    app.add_option("--c-step", f.c_step, "largest spacing in c");
    app.add_option("--modes", f.modes, "number of retained Fourier modes");
    app.add_option("--tol", f.tol, "Newton tolerance on the residual sup norm");
    app.add_option("--out", f.out, "output directory");
    app.add_option("--config", f.config, "key = value configuration file");
    app.add_option("--perturbation", f.perturbation, "relative H1 size of the initial perturbation");
    app.add_option("--T", f.T, "final time of an evolution run");
    app.add_option("--dt", f.dt, "time step");
    app.add_option("--dt-out", f.dt_out, "sampling interval of the evolution output");
    app.add_option("--seed-rng", f.seed_rng, "seed of the perturbation generator");

    auto* seed = app.add_subcommand("seed", "print the two-term Stokes wave at a given amplitude");
    seed->add_option("--amplitude,-a", f.amplitude, "Stokes amplitude a (default: seed_amplitude from the config)");
    auto* trace = app.add_subcommand("trace", "continue the wave family in c and write a CSV table");
    auto* analyze = app.add_subcommand("analyze", "spectral counts and stability verdict at one speed");
    auto* sweep = app.add_subcommand("sweep", "analyze every point of the family; CSV plus an SVG of E(c)");
    auto* evolve = app.add_subcommand("evolve", "time-integrate a perturbed wave and track orbital distance");
    auto* plot = app.add_subcommand("plot", "render two columns of a CSV table as an SVG line chart");
    std::string csv, xcol = "c", ycol = "E", svg;
    plot->add_option("csv", csv, "CSV table")->required();
    plot->add_option("--x", xcol, "column for the horizontal axis");
    plot->add_option("--y", ycol, "column for the vertical axis");
    plot->add_option("--svg", svg, "output SVG path (default derived from the CSV name)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return rchwave::exit_config;
    }

    rchwave::RunConfig cfg;
    try {
        cfg = build_config(f);
    } catch (const rchwave::Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return rchwave::exit_config;
    }

    if (*seed) return rchwave::cmd_seed(cfg.seed_amplitude, cfg, std::cout, std::cerr);
    if (*trace) return rchwave::cmd_trace(cfg, std::cout, std::cerr);
    if (*analyze) return rchwave::cmd_analyze(cfg, std::cout, std::cerr);
    if (*sweep) return rchwave::cmd_sweep(cfg, std::cout, std::cerr);
    if (*evolve) return rchwave::cmd_evolve(cfg, std::cout, std::cerr);
    if (*plot) return rchwave::cmd_plot(csv, xcol, ycol, cfg, svg, std::cout, std::cerr);
    return rchwave::exit_config;
}
