// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// ris-rates: average-rate sweeps for RIS-aided links with finite alphabets.
//
//   ris-rates run --config sweep.cfg
//   ris-rates fig2 [--seed S] [--channels C] [--noise-samples NS] [--out PATH]
//                  [--format csv|json] [--input optimized|uniform]
//                  [--parallel W] [--strict]
//   ris-rates fig3 ...
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ris/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> channels;
    std::optional<int> noise_samples;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> input;
    std::optional<int> parallel;
    bool strict = false;
    bool quiet = false;
};

void add_overrides(CLI::App *cmd, Overrides &o, bool shorthand)
{
    if (shorthand) {
        cmd->add_option("--seed", o.seed, "Seed shared by every row");
        cmd->add_option("--channels", o.channels, "Channel realizations per point");
        cmd->add_option("--noise-samples", o.noise_samples, "Noise samples per expectation");
        cmd->add_option("--out", o.out, "Output file (default: standard output)");
        cmd->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--input", o.input, "Input law of joint and max-SNR: optimized or uniform")
            ->check(CLI::IsMember({"optimized", "uniform"}));
    }
    cmd->add_option("--parallel", o.parallel, "Worker threads");
    cmd->add_flag("--strict", o.strict, "Exit with status 3 if any point did not converge");
    cmd->add_flag("-q,--quiet", o.quiet, "No progress on standard error");
}

void apply(ris::ExperimentConfig &c, const Overrides &o)
{
    if (o.seed) {
        c.seed = *o.seed;
    }
    if (o.channels) {
        c.channels = *o.channels;
    }
    if (o.noise_samples) {
        c.noise_samples = *o.noise_samples;
    }
    if (o.out) {
        c.out = *o.out;
    }
    if (o.format) {
        c.format = *o.format == "json" ? ris::OutputFormat::Json : ris::OutputFormat::Csv;
    }
    if (o.input) {
        c.input = *o.input == "uniform" ? ris::InputMode::Uniform : ris::InputMode::Optimized;
    }
    if (o.parallel) {
        c.parallel = *o.parallel;
    }
    c.strict = c.strict || o.strict;
}

int execute(ris::ExperimentConfig config, const Overrides &o)
{
    apply(config, o);
    ris::validate(config);

    ris::ProgressFn progress;
    if (!o.quiet) {
        progress = [](const ris::ResultRow &r, std::size_t done, std::size_t total) {
            std::cerr << "[" << done << "/" << total << "] " << ris::to_string(r.scheme) << ' '
                      << r.constellation.tag() << ' ' << r.param_name << '=' << r.param_value << "  rate "
                      << r.rate_mean << " +- " << r.rate_stderr << (r.converged ? "" : "  (not converged)") << '\n';
        };
    }
    const auto rows = ris::run_experiment(config, progress);
    if (config.out.empty()) {
        std::cout << ris::format_rows(rows, config.format);
    }

    if (config.strict) {
        for (const auto &r : rows) {
            if (!r.converged) {
                std::cerr << "error: " << ris::to_string(r.scheme) << ' ' << r.constellation.tag() << ' '
                          << r.param_name << '=' << r.param_value << " did not converge\n";
                return kExitNumerical;
            }
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Average achievable rates of RIS-aided links with finite input alphabets"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides run_o;
    auto *run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("--config", config_path, "key = value config file")->required();
    add_overrides(run, run_o, false);

    Overrides fig2_o;
    auto *fig2 = app.add_subcommand("fig2", "Average rate versus power");
    add_overrides(fig2, fig2_o, true);

    Overrides fig3_o;
    auto *fig3 = app.add_subcommand("fig3", "Average rate versus the RIS control rate factor m");
    add_overrides(fig3, fig3_o, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (run->parsed()) {
            return execute(ris::load_config(config_path), run_o);
        }
        if (fig2->parsed()) {
            return execute(ris::default_config("fig2"), fig2_o);
        }
        return execute(ris::default_config("fig3"), fig3_o);
    } catch (const ris::NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ris::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ris::CapExceededError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
