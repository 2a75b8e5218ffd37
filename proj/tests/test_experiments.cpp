// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "ris/experiments.hpp"

using namespace ris;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string &name)
{
    const fs::path d = fs::temp_directory_path() / ("ris_rates_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

int run_cli(const std::string &args)
{
    const std::string cmd = std::string(RIS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig tiny(const std::string &experiment)
{
    ExperimentConfig c = default_config(experiment);
    c.channels = 1;
    c.noise_samples = 40;
    return c;
}

std::size_t count_lines(const std::string &s)
{
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

} // namespace

TEST(Config, Defaults)
{
    const ExperimentConfig f2 = default_config("fig2");
    EXPECT_EQ(f2.sweep, "P_dB");
    EXPECT_EQ(f2.values.size(), 13u);
    EXPECT_EQ(f2.values.front(), -20.0);
    EXPECT_EQ(f2.values.back(), 40.0);
    EXPECT_EQ(f2.K, 3);
    EXPECT_EQ(f2.constellations.size(), 2u);
    EXPECT_EQ(f2.constellations[1].tag(), "QPSK");
    EXPECT_EQ(f2.input, InputMode::Optimized);

    const ExperimentConfig f3 = default_config("fig3");
    EXPECT_EQ(f3.sweep, "m");
    EXPECT_EQ(f3.values.size(), 7u);
    EXPECT_EQ(f3.K, 2);
    EXPECT_EQ(f3.P_dB, 40.0);
    EXPECT_EQ(f3.constellations[0].tag(), "2-ASK");
    EXPECT_THROW(default_config("fig9"), ConfigError);
}

TEST(Config, ParsesKeysAndComments)
{
    const ExperimentConfig c = parse_config(R"(# a sweep over K
experiment = custom
sweep = K
values = 1:1:3
schemes = joint, layered   # two of three
constellations = 8-PSK, BPSK
P_dB = 7.5
seed = 18446744073709551615
format = json
input = uniform
strict = true
)");
    EXPECT_EQ(c.sweep, "K");
    EXPECT_EQ(c.values, (std::vector<double>{1, 2, 3}));
    EXPECT_EQ(c.schemes, (std::vector<Scheme>{Scheme::Joint, Scheme::Layered}));
    EXPECT_EQ(c.constellations[0].tag(), "8-PSK");
    EXPECT_EQ(c.constellations[1].tag(), "BPSK");
    EXPECT_EQ(c.P_dB, 7.5);
    EXPECT_EQ(c.seed, 18446744073709551615ULL);
    EXPECT_EQ(c.format, OutputFormat::Json);
    EXPECT_EQ(c.input, InputMode::Uniform);
    EXPECT_TRUE(c.strict);
    EXPECT_EQ(c.point(c.constellations[0], 2.0).K, 2);
    EXPECT_NEAR(c.point(c.constellations[0], 2.0).P, std::pow(10.0, 0.75), 1e-12);
}

TEST(Config, RejectsMalformedDocuments)
{
    EXPECT_THROW(parse_config("channels = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nchannels = 3\nchannels = 4\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nchanels = 3\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nchannels = three\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nchannels = 0\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nsweep = m\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = custom\nvalues = 1,2\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nconstellations = 4-QAM\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nschemes = best\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\ninput = greedy\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\njust text\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig3\nvalues = 0.5\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\nvalues = 5:-1:0\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig2\ndamping = 2\n"), ConfigError);
    EXPECT_THROW(parse_config("experiment = fig3\nvalues = 30\n"), CapExceededError);

    try {
        parse_config("experiment = fig2\n\nchannels = x\n");
        FAIL();
    } catch (const ConfigError &e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("channels"), std::string::npos) << e.what();
    }
}

TEST(Experiment, PowerSweepShapeAndCsvHeader)
{
    const auto rows = run_experiment(tiny("fig2"));
    ASSERT_EQ(rows.size(), 13u * 2u * 3u);
    EXPECT_EQ(rows.front().scheme, Scheme::Joint);
    EXPECT_EQ(rows.front().constellation.tag(), "4-ASK");
    EXPECT_EQ(rows.front().param_value, -20.0);
    EXPECT_EQ(rows.back().scheme, Scheme::Layered);
    EXPECT_EQ(rows.back().constellation.tag(), "QPSK");
    const std::string csv = format_rows(rows, OutputFormat::Csv);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
    EXPECT_EQ(count_lines(csv), 79u);
    for (const auto &r : rows) {
        EXPECT_TRUE(std::isfinite(r.rate_mean));
        EXPECT_EQ(r.channels, 1);
        EXPECT_EQ(r.seed, 1u);
    }
}

TEST(Experiment, ControlRateShapeAndHighSnrValues)
{
    ExperimentConfig c = tiny("fig3");
    c.channels = 2;
    const auto rows = run_experiment(c);
    ASSERT_EQ(rows.size(), 21u);
    for (const auto &r : rows) {
        const double m = r.param_value;
        if (r.scheme == Scheme::Joint) {
            EXPECT_NEAR(r.rate_mean, 1.0 + 2.0 / m, 0.02) << m;
        } else if (r.scheme == Scheme::MaxSnr) {
            EXPECT_NEAR(r.rate_mean, 1.0, 0.02) << m;
        } else {
            const double mt = std::max(2.0, m);
            EXPECT_NEAR(r.rate_mean, 2.0 / mt + (mt - 1.0) / mt, 0.02) << m;
        }
    }
}

TEST(Experiment, DeterministicAtomicOutput)
{
    const fs::path dir = scratch_dir("atomic");
    ExperimentConfig c = tiny("fig3");
    c.values = {1, 3};
    c.out = (dir / "a.csv").string();
    run_experiment(c);
    c.out = (dir / "b.csv").string();
    c.parallel = 2;
    run_experiment(c);
    EXPECT_EQ(slurp(dir / "a.csv"), slurp(dir / "b.csv"));
    EXPECT_FALSE(fs::exists(dir / "a.csv.tmp"));
    const std::string echo = slurp(dir / "a.csv.config");
    EXPECT_NE(echo.find("P_linear = 10000"), std::string::npos) << echo;
    EXPECT_NE(echo.find("input = optimized"), std::string::npos);

    c.format = OutputFormat::Json;
    c.out = (dir / "c.json").string();
    run_experiment(c);
    const std::string json = slurp(dir / "c.json");
    EXPECT_EQ(count_lines(json), 6u);
    const auto first = nlohmann::json::parse(json.substr(0, json.find('\n')));
    EXPECT_EQ(first["scheme"], "joint");
    EXPECT_EQ(first["param_name"], "m");
    fs::remove_all(dir);
}

TEST(Experiment, UnwritableOutputFailsBeforeCompute)
{
    ExperimentConfig c = default_config("fig2");
    c.out = "/nonexistent-dir/for/sure/out.csv";
    bool called = false;
    EXPECT_THROW(run_experiment(c, [&](const ResultRow &, std::size_t, std::size_t) { called = true; }),
                 ConfigError);
    EXPECT_FALSE(called);
}

TEST(Experiment, ProgressReportsEveryRow)
{
    ExperimentConfig c = tiny("fig3");
    c.schemes = {Scheme::MaxSnr};
    std::size_t last = 0;
    std::size_t total_seen = 0;
    run_experiment(c, [&](const ResultRow &, std::size_t done, std::size_t total) {
        EXPECT_EQ(done, last + 1);
        last = done;
        total_seen = total;
    });
    EXPECT_EQ(last, 7u);
    EXPECT_EQ(total_seen, 7u);
}

TEST(Format, NumbersRoundTrip)
{
    EXPECT_EQ(detail::format_number(0.0), "0");
    EXPECT_EQ(detail::format_number(-20.0), "-20");
    EXPECT_EQ(std::stod(detail::format_number(0.1 + 0.2)), 0.1 + 0.2);
    ResultRow r;
    r.converged = false;
    const std::string csv = format_rows({r}, OutputFormat::Csv);
    EXPECT_NE(csv.find(",false\n"), std::string::npos);
}

TEST(Cli, ExitCodes)
{
    const fs::path dir = scratch_dir("cli");
    EXPECT_EQ(run_cli("--help"), 0);
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("fig2 --bogus"), 2);
    EXPECT_EQ(run_cli("fig2 --format xml"), 2);
    EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string()), 2);

    {
        std::ofstream(dir / "bad.cfg") << "experiment = fig2\nchannels = -1\n";
    }
    EXPECT_EQ(run_cli("run --config " + (dir / "bad.cfg").string()), 2);

    {
        std::ofstream(dir / "cap.cfg") << "experiment = fig3\nvalues = 40\n";
    }
    EXPECT_EQ(run_cli("run --config " + (dir / "cap.cfg").string()), 2);

    {
        std::ofstream(dir / "ok.cfg") << "experiment = custom\nsweep = P_dB\nvalues = 0, 10\n"
                                      << "schemes = max-snr, layered\nconstellations = QPSK\n"
                                      << "channels = 2\nnoise_samples = 50\nout = " << (dir / "ok.csv").string()
                                      << "\n";
    }
    EXPECT_EQ(run_cli("run -q --config " + (dir / "ok.cfg").string()), 0);
    const std::string csv = slurp(dir / "ok.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), kCsvHeader);
    EXPECT_EQ(count_lines(csv), 5u);

    EXPECT_EQ(run_cli("fig3 -q --channels 1 --noise-samples 30 --input uniform --out " + (dir / "f3.csv").string()),
              0);
    EXPECT_EQ(count_lines(slurp(dir / "f3.csv")), 22u);

    // One iteration cannot close the gap: strict mode reports it.
    {
        std::ofstream(dir / "strict.cfg") << "experiment = custom\nsweep = P_dB\nvalues = 0\nschemes = joint\n"
                                          << "channels = 1\nnoise_samples = 50\nmax_iters = 1\n"
                                          << "convergence_eps = 1e-9\nout = " << (dir / "strict.csv").string()
                                          << "\n";
    }
    EXPECT_EQ(run_cli("run -q --strict --config " + (dir / "strict.cfg").string()), 3);
    EXPECT_TRUE(fs::exists(dir / "strict.csv"));
    EXPECT_EQ(run_cli("run -q --config " + (dir / "strict.cfg").string()), 0);
    fs::remove_all(dir);
}
