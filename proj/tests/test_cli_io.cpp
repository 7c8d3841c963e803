#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "rchwave/cli_io.hpp"

using namespace rchwave;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::path(RCHWAVE_TEST_TMP) / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream o;
    o << f.rdbuf();
    return o.str();
}

RunConfig small_config(const fs::path& out)
{
    RunConfig cfg;
    cfg.n_modes = 64;
    cfg.c_start = 0.51;
    cfg.c_end = 0.6;
    cfg.c_step = 0.01;
    cfg.output_dir = out.string();
    return cfg;
}

}  // namespace

TEST(KeyValues, CommentsWhitespaceAndErrors)
{
    std::istringstream in("# header\n omega = 2.5   # trailing\n\nc_start=1.3\noutput_dir =  runs/a b \n");
    const auto kv = io::parse_key_values(in);
    EXPECT_EQ(kv.size(), 3u);
    EXPECT_EQ(kv.at("omega"), "2.5");
    EXPECT_EQ(kv.at("c_start"), "1.3");
    EXPECT_EQ(kv.at("output_dir"), "runs/a b");

    std::istringstream bad("omega 2\n");
    EXPECT_THROW(io::parse_key_values(bad), ConfigError);
    std::istringstream empty_value("omega =\n");
    EXPECT_THROW(io::parse_key_values(empty_value), ConfigError);
    EXPECT_THROW(io::read_key_values("/nonexistent/rchwave.cfg"), ConfigError);
}

TEST(KeyValues, NumberParsing)
{
    EXPECT_DOUBLE_EQ(io::to_double("x", "1e-3"), 1e-3);
    EXPECT_THROW(io::to_double("x", "1.5abc"), ConfigError);
    EXPECT_THROW(io::to_double("x", "abc"), ConfigError);
    EXPECT_EQ(io::to_long("n", "128"), 128);
    EXPECT_THROW(io::to_long("n", "12.5"), ConfigError);
}

TEST(RunConfigFile, AppliesKnownKeysAndRejectsOthers)
{
    RunConfig cfg;
    apply_settings(cfg, {{"omega", "2"}, {"c_end", "3.5"}, {"n_modes", "96"}, {"seed_rng", "42"}, {"T", "10"}});
    EXPECT_DOUBLE_EQ(cfg.omega, 2.0);
    EXPECT_DOUBLE_EQ(cfg.end(), 3.5);
    EXPECT_DOUBLE_EQ(cfg.start(), 1.02);  // default scales with omega
    EXPECT_EQ(cfg.n_modes, 96);
    EXPECT_EQ(cfg.seed_rng, 42u);
    EXPECT_DOUBLE_EQ(cfg.T, 10.0);
    EXPECT_THROW(apply_settings(cfg, {{"omgea", "1"}}), ConfigError);
}

TEST(RunConfigFile, LoadsFromDisk)
{
    const fs::path dir = scratch("config");
    const fs::path file = dir / "run.cfg";
    std::ofstream(file) << "# sweep at omega = 3\nomega = 3\nc_start = 1.6\nc_end = 2.0\nc_step = 0.05\n";
    const RunConfig cfg = load_config(file.string());
    EXPECT_DOUBLE_EQ(cfg.omega, 3.0);
    EXPECT_DOUBLE_EQ(cfg.start(), 1.6);
    EXPECT_DOUBLE_EQ(cfg.step(), 0.05);
}

TEST(RunConfigFile, ValidationMessages)
{
    RunConfig cfg;
    cfg.omega = 0.0;
    try {
        validate(cfg);
        FAIL() << "omega = 0 accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("Camassa-Holm"), std::string::npos);
    }
    cfg.omega = 1.0;
    cfg.c_start = 0.4;
    EXPECT_THROW(validate(cfg), ConfigError);
    cfg.c_start = 0.6;
    cfg.c_end = 0.55;
    EXPECT_THROW(validate(cfg), ConfigError);
}

TEST(FormatNumber, SeventeenDigitsRoundTrip)
{
    for (double x : {0.1, 1.0 / 3.0, -2.718281828459045, 6.02214076e23, 2.2250738585072014e-308}) {
        const std::string s = io::format_number(x);
        EXPECT_EQ(std::stod(s), x) << s;
    }
    EXPECT_EQ(io::format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
    EXPECT_EQ(io::format_short(0.51), "0.51");
}

TEST(Csv, WriteReadRoundTrip)
{
    const fs::path dir = scratch("csv");
    const fs::path file = dir / "t.csv";
    {
        io::CsvWriter w(file.string(), {"c", "E"});
        w.row({0.1, 1.0 / 3.0});
        w.row({0.2, 2.0 / 3.0});
        EXPECT_THROW(w.row({1.0}), ConfigError);
    }
    const io::Table t = io::read_csv(file.string());
    ASSERT_EQ(t.header.size(), 2u);
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.numeric("E")[0], 1.0 / 3.0);
    EXPECT_EQ(t.numeric("c")[1], 0.2);
    EXPECT_THROW(t.numeric("F"), ConfigError);
    EXPECT_THROW(io::read_csv((dir / "missing.csv").string()), ConfigError);
}

TEST(Svg, TitleLabelsAndTicks)
{
    io::Series s{{0.5, 1.0, 1.5}, {0.0, 0.2, 0.9}, ""};
    const std::string svg = io::render_svg({s}, {"E vs c, omega = 2", "wave speed c", "E(phi) <energy>"});
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("E vs c, omega = 2"), std::string::npos);
    EXPECT_NE(svg.find("wave speed c"), std::string::npos);
    EXPECT_NE(svg.find("E(phi) &lt;energy&gt;"), std::string::npos);
    EXPECT_NE(svg.find("<polyline"), std::string::npos);

    const std::vector<double> ticks = io::nice_ticks(0.013, 0.97);
    ASSERT_GE(ticks.size(), 3u);
    for (std::size_t i = 1; i < ticks.size(); ++i) EXPECT_GT(ticks[i], ticks[i - 1]);
    EXPECT_GE(ticks.front(), 0.013);
    EXPECT_LE(ticks.back(), 0.97);
}

TEST(Commands, SeedPrintsCorrectedSpeed)
{
    std::ostringstream out, err;
    RunConfig cfg;
    EXPECT_EQ(cmd_seed(0.1, cfg, out, err), exit_ok);
    EXPECT_NE(out.str().find("c              0.515\n"), std::string::npos) << out.str();
    EXPECT_NE(out.str().find("a_1, a_2       0.1, 0.01\n"), std::string::npos);
}

TEST(Commands, ConfigErrorsExitWithOne)
{
    std::ostringstream out, err;
    RunConfig cfg;
    cfg.omega = 0.0;
    EXPECT_EQ(cmd_trace(cfg, out, err), exit_config);
    EXPECT_NE(err.str().find("config error"), std::string::npos);
    RunConfig no_c;
    EXPECT_EQ(cmd_evolve(no_c, out, err), exit_config);
    EXPECT_EQ(cmd_analyze(no_c, out, err), exit_config);
}

TEST(Commands, NumericalFailureExitsWithTwo)
{
    const fs::path dir = scratch("fail");
    std::ostringstream out, err;
    RunConfig cfg = small_config(dir);
    cfg.c = 0.8;
    cfg.n_modes = 16;  // far too coarse for this wave
    EXPECT_EQ(cmd_analyze(cfg, out, err), exit_numerical);
    EXPECT_NE(err.str().find("c = 0.8"), std::string::npos) << err.str();
}

TEST(Commands, PlotOnEmptyCsv)
{
    const fs::path dir = scratch("plot_empty");
    std::ofstream(dir / "empty.csv").close();
    std::ofstream(dir / "header_only.csv") << "c,E\n";
    std::ostringstream out, err;
    RunConfig cfg;
    EXPECT_EQ(cmd_plot((dir / "empty.csv").string(), "c", "E", cfg, "", out, err), exit_config);
    EXPECT_NE(err.str().find("empty"), std::string::npos);
    EXPECT_EQ(cmd_plot((dir / "header_only.csv").string(), "c", "E", cfg, "", out, err), exit_config);
    EXPECT_EQ(cmd_plot((dir / "nope.csv").string(), "c", "E", cfg, "", out, err), exit_config);
}

TEST(Commands, TraceThenPlot)
{
    const fs::path dir = scratch("trace");
    std::ostringstream out, err;
    const RunConfig cfg = small_config(dir);
    ASSERT_EQ(cmd_trace(cfg, out, err), exit_ok) << err.str();
    const io::Table t = io::read_csv((dir / "trace_omega1.csv").string());
    EXPECT_EQ(t.rows.size(), 10u);
    const auto E = t.numeric("E");
    for (std::size_t i = 1; i < E.size(); ++i) EXPECT_GT(E[i], E[i - 1]);
    for (double r : t.numeric("residual")) EXPECT_LE(r, 1e-12);

    ASSERT_EQ(cmd_plot((dir / "trace_omega1.csv").string(), "c", "A", cfg, "", out, err), exit_ok);
    const std::string svg = slurp(dir / "trace_omega1_A_vs_c.svg");
    EXPECT_NE(svg.find("omega = 1"), std::string::npos);
    EXPECT_EQ(cmd_plot((dir / "trace_omega1.csv").string(), "c", "nope", cfg, "", out, err), exit_config);
}

TEST(Commands, SweepIsDeterministicAcrossWorkerCounts)
{
    const fs::path d1 = scratch("sweep1"), d2 = scratch("sweep2");
    std::ostringstream out, err;
    ::setenv("RCHWAVE_THREADS", "1", 1);
    ASSERT_EQ(cmd_sweep(small_config(d1), out, err), exit_ok) << err.str();
    ::setenv("RCHWAVE_THREADS", "3", 1);
    ASSERT_EQ(cmd_sweep(small_config(d2), out, err), exit_ok) << err.str();
    ::unsetenv("RCHWAVE_THREADS");
    EXPECT_EQ(slurp(d1 / "sweep_omega1.csv"), slurp(d2 / "sweep_omega1.csv"));
    EXPECT_EQ(slurp(d1 / "sweep_E_omega1.svg"), slurp(d2 / "sweep_E_omega1.svg"));

    const io::Table t = io::read_csv((d1 / "sweep_omega1.csv").string());
    EXPECT_EQ(t.header, sweep_header());
    const auto dec = t.column("decision");
    ASSERT_TRUE(dec);
    for (const auto& r : t.rows) EXPECT_EQ(r[*dec], "spectrally_stable");
    EXPECT_NE(slurp(d1 / "sweep_E_omega1.svg").find("omega = 1"), std::string::npos);
}

TEST(Commands, EvolveWritesSeries)
{
    const fs::path dir = scratch("evolve");
    std::ostringstream out, err;
    RunConfig cfg = small_config(dir);
    cfg.c = 0.6;
    cfg.T = 0.5;
    cfg.dt_out = 0.25;
    ASSERT_EQ(cmd_evolve(cfg, out, err), exit_ok) << err.str();
    const io::Table t = io::read_csv((dir / "evolve_omega1_c0.6.csv").string());
    EXPECT_EQ(t.header, (std::vector<std::string>{"t", "distance", "M", "E", "F"}));
    EXPECT_EQ(t.rows.size(), 3u);
    EXPECT_NE(out.str().find("perturbation seed      20240601"), std::string::npos);
    const std::string first = slurp(dir / "evolve_omega1_c0.6.csv");
    ASSERT_EQ(cmd_evolve(cfg, out, err), exit_ok);
    EXPECT_EQ(slurp(dir / "evolve_omega1_c0.6.csv"), first);
}

TEST(WorkerCount, CappedByEnvironment)
{
    ::setenv("RCHWAVE_THREADS", "1", 1);
    EXPECT_EQ(worker_count(), 1u);
    ::setenv("RCHWAVE_THREADS", "junk", 1);
    EXPECT_GE(worker_count(), 1u);
    ::unsetenv("RCHWAVE_THREADS");
}
