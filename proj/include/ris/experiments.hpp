// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Experiment configuration, parameter sweeps and result files.
//
// Config documents are `key = value` lines; `#` starts a comment. Keys:
//
//   experiment        fig2 | fig3 | custom            (required)
//   sweep             P_dB | m | tau | K | A | N      (custom only)
//   values            comma list or start:step:stop   (custom; overrides the
//                                                      fig2/fig3 grid)
//   schemes           comma list of joint, max-snr, layered
//   constellations    comma list of <B>-ASK, <B>-PSK, BPSK, QPSK
//   N K A m tau       integers
//   P_dB              power in dB when not swept
//   channels          channel realizations per point
//   noise_samples     samples per expectation
//   eval_factor       fresh evaluation batch size / noise_samples
//   input             optimized | uniform  (joint and max-SNR input law)
//   seed              64-bit seed shared by every row
//   out               output path (empty: standard output)
//   format            csv | json
//   parallel          worker threads
//   strict            true | false
//   max_iters convergence_eps damping cap
//
// Rows are ordered by (scheme, constellation, sweep value) in the order the
// config lists them.

#ifndef RIS_EXPERIMENTS_HPP
#define RIS_EXPERIMENTS_HPP

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "model.hpp"
#include "optimizers.hpp"
#include "schemes.hpp"

namespace ris {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

enum class OutputFormat { Csv, Json };

struct ConstellationSpec {
    ConstellationKind kind = ConstellationKind::ASK;
    int B = 2;

    [[nodiscard]] std::string tag() const
    {
        if (kind == ConstellationKind::PSK && B == 2) {
            return "BPSK";
        }
        if (kind == ConstellationKind::PSK && B == 4) {
            return "QPSK";
        }
        return std::to_string(B) + (kind == ConstellationKind::ASK ? "-ASK" : "-PSK");
    }
    bool operator==(const ConstellationSpec &) const = default;
};

struct ExperimentConfig {
    std::string experiment;
    std::string sweep;
    std::vector<double> values;
    std::vector<Scheme> schemes{Scheme::Joint, Scheme::MaxSnr, Scheme::Layered};
    std::vector<ConstellationSpec> constellations;
    int N = 2;
    int K = 3;
    int A = 2;
    int m = 2;
    int tau = 1;
    double P_dB = 0.0;
    int channels = 200;
    int noise_samples = 2000;
    int eval_factor = 2;
    InputMode input = InputMode::Optimized;
    std::uint64_t seed = 1;
    std::string out;
    OutputFormat format = OutputFormat::Csv;
    int parallel = 1;
    bool strict = false;
    BaSettings ba;
    std::uint64_t cap = kDefaultEnumerationCap;

    /// Scheme parameters of one sweep point.
    [[nodiscard]] SchemeParams point(const ConstellationSpec &c, double value) const
    {
        SchemeParams p;
        p.N = N;
        p.K = K;
        p.A = A;
        p.m = m;
        p.tau = tau;
        p.kind = c.kind;
        p.B = c.B;
        p.P = db_to_linear(P_dB);
        p.noise_samples = noise_samples;
        p.eval_factor = eval_factor;
        p.input = input;
        p.ba = ba;
        p.cap = cap;
        const int iv = static_cast<int>(std::lround(value));
        if (sweep == "P_dB") {
            p.P = db_to_linear(value);
        } else if (sweep == "m") {
            p.m = iv;
        } else if (sweep == "tau") {
            p.tau = iv;
        } else if (sweep == "K") {
            p.K = iv;
        } else if (sweep == "A") {
            p.A = iv;
        } else if (sweep == "N") {
            p.N = iv;
        }
        return p;
    }

    static double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        out.push_back(trim(item));
    }
    return out;
}

template <class T>
T parse_number(const std::string &text, const std::string &ctx)
{
    T v{};
    const char *first = text.data();
    const char *last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ConfigError(ctx + ": cannot parse '" + text + "' as a number");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) {
            throw ConfigError(ctx + ": value must be finite");
        }
    }
    return v;
}

inline bool parse_bool(const std::string &text, const std::string &ctx)
{
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    throw ConfigError(ctx + ": expected true or false, got '" + text + "'");
}

/// "a:step:b" (inclusive) or "v1, v2, ...".
inline std::vector<double> parse_grid(const std::string &text, const std::string &ctx)
{
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::string item;
        std::istringstream in(text);
        while (std::getline(in, item, ':')) {
            parts.push_back(trim(item));
        }
        if (parts.size() != 3) {
            throw ConfigError(ctx + ": range must be start:step:stop");
        }
        const double a = parse_number<double>(parts[0], ctx);
        const double step = parse_number<double>(parts[1], ctx);
        const double b = parse_number<double>(parts[2], ctx);
        if (!(step > 0.0) || b < a) {
            throw ConfigError(ctx + ": range needs step > 0 and stop >= start");
        }
        const auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
        if (n > 100000) {
            throw ConfigError(ctx + ": range has too many points");
        }
        for (long long i = 0; i <= n; ++i) {
            out.push_back(a + static_cast<double>(i) * step);
        }
        return out;
    }
    for (const auto &v : split_list(text)) {
        if (!v.empty()) {
            out.push_back(parse_number<double>(v, ctx));
        }
    }
    return out;
}

inline Scheme parse_scheme(const std::string &s, const std::string &ctx)
{
    if (s == "joint") {
        return Scheme::Joint;
    }
    if (s == "max-snr" || s == "maxsnr") {
        return Scheme::MaxSnr;
    }
    if (s == "layered") {
        return Scheme::Layered;
    }
    throw ConfigError(ctx + ": unknown scheme '" + s + "' (joint, max-snr, layered)");
}

inline ConstellationSpec parse_constellation(const std::string &s, const std::string &ctx)
{
    if (s == "BPSK") {
        return {ConstellationKind::PSK, 2};
    }
    if (s == "QPSK") {
        return {ConstellationKind::PSK, 4};
    }
    const auto dash = s.find('-');
    if (dash != std::string::npos) {
        const std::string kind = s.substr(dash + 1);
        if (kind == "ASK" || kind == "PSK") {
            const int B = parse_number<int>(s.substr(0, dash), ctx);
            if (B < 1) {
                throw ConfigError(ctx + ": constellation size must be positive");
            }
            return {kind == "ASK" ? ConstellationKind::ASK : ConstellationKind::PSK, B};
        }
    }
    throw ConfigError(ctx + ": unknown constellation '" + s + "' (<B>-ASK, <B>-PSK, BPSK, QPSK)");
}

inline InputMode parse_input_mode(const std::string &s, const std::string &ctx)
{
    if (s == "optimized") {
        return InputMode::Optimized;
    }
    if (s == "uniform") {
        return InputMode::Uniform;
    }
    throw ConfigError(ctx + ": input must be optimized or uniform, got '" + s + "'");
}

inline std::string format_number(double v)
{
    if (v == 0.0) {
        return "0";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/// Config with the defaults of a named experiment and no overrides.
inline ExperimentConfig default_config(const std::string &experiment)
{
    ExperimentConfig c;
    c.experiment = experiment;
    if (experiment == "fig2") {
        c.sweep = "P_dB";
        c.values = detail::parse_grid("-20:5:40", "fig2");
        c.constellations = {{ConstellationKind::ASK, 4}, {ConstellationKind::PSK, 4}};
        c.N = 2;
        c.K = 3;
        c.A = 2;
        c.m = 2;
        c.tau = 1;
        c.channels = 200;
    } else if (experiment == "fig3") {
        c.sweep = "m";
        c.values = {1, 2, 3, 4, 5, 6, 7};
        c.constellations = {{ConstellationKind::ASK, 2}};
        c.N = 2;
        c.K = 2;
        c.A = 2;
        c.tau = 1;
        c.P_dB = 40.0;
        c.channels = 100;
    } else if (experiment == "custom") {
        c.constellations = {{ConstellationKind::ASK, 4}};
    } else {
        throw ConfigError("experiment: unknown experiment '" + experiment + "' (fig2, fig3, custom)");
    }
    return c;
}

/// Range and consistency checks, including enumeration caps for every
/// sweep point. Throws ConfigError or CapExceededError.
inline void validate(const ExperimentConfig &c)
{
    if (c.experiment != "fig2" && c.experiment != "fig3" && c.experiment != "custom") {
        throw ConfigError("experiment: unknown experiment '" + c.experiment + "'");
    }
    static const std::vector<std::string> sweeps{"P_dB", "m", "tau", "K", "A", "N"};
    if (std::find(sweeps.begin(), sweeps.end(), c.sweep) == sweeps.end()) {
        throw ConfigError("sweep: must be one of P_dB, m, tau, K, A, N (got '" + c.sweep + "')");
    }
    if (c.values.empty()) {
        throw ConfigError("values: sweep is empty");
    }
    if (c.schemes.empty()) {
        throw ConfigError("schemes: no scheme selected");
    }
    if (c.constellations.empty()) {
        throw ConfigError("constellations: no constellation selected");
    }
    if (c.channels < 1) {
        throw ConfigError("channels: must be at least 1");
    }
    if (c.noise_samples < 2) {
        throw ConfigError("noise_samples: must be at least 2");
    }
    if (c.eval_factor < 1) {
        throw ConfigError("eval_factor: must be at least 1");
    }
    if (c.parallel < 1) {
        throw ConfigError("parallel: must be at least 1");
    }
    if (c.ba.max_iters < 1) {
        throw ConfigError("max_iters: must be at least 1");
    }
    if (!(c.ba.convergence_eps > 0.0)) {
        throw ConfigError("convergence_eps: must be positive");
    }
    if (!(c.ba.damping > 0.0 && c.ba.damping <= 1.0)) {
        throw ConfigError("damping: must lie in (0, 1]");
    }
    if (c.sweep != "P_dB") {
        for (double v : c.values) {
            if (v != std::round(v) || v < 1.0 || v > 1e6) {
                throw ConfigError("values: " + c.sweep + " takes positive integers, got " + detail::format_number(v));
            }
        }
    }
    for (double v : c.values) {
        if (c.sweep == "P_dB" && std::abs(v) > 200.0) {
            throw ConfigError("values: P_dB outside [-200, 200]");
        }
    }
    if (std::abs(c.P_dB) > 200.0) {
        throw ConfigError("P_dB: outside [-200, 200]");
    }
    for (const auto &cs : c.constellations) {
        for (double v : c.values) {
            const SchemeParams p = c.point(cs, v);
            try {
                p.validate();
            } catch (const std::invalid_argument &e) {
                throw ConfigError(std::string("point ") + c.sweep + "=" + detail::format_number(v) + ": " + e.what());
            }
            for (Scheme s : c.schemes) {
                check_alphabet_size(static_cast<std::uint64_t>(p.A), static_cast<std::uint64_t>(p.K), p.cap,
                                    "A^K");
                if (s == Scheme::Joint) {
                    const std::uint64_t blocks = capped_power(static_cast<std::uint64_t>(p.B),
                                                              static_cast<std::uint64_t>(p.m), p.cap);
                    const std::uint64_t configs = capped_power(static_cast<std::uint64_t>(p.A),
                                                               static_cast<std::uint64_t>(p.K), p.cap);
                    if (blocks > p.cap || configs > p.cap || blocks * configs > p.cap) {
                        throw CapExceededError("alphabet too large at " + c.sweep + "=" + detail::format_number(v) +
                                               " for " + cs.tag() + ": B^m * A^K exceeds enumeration cap " +
                                               std::to_string(p.cap));
                    }
                }
            }
        }
    }
}

/// Parses a `key = value` document; see the file comment for the schema.
inline ExperimentConfig parse_config(const std::string &text)
{
    struct Entry {
        std::string value;
        int line;
    };
    std::map<std::string, Entry> entries;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(line_no) + ": missing key");
        }
        if (entries.contains(key)) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        entries.emplace(key, Entry{value, line_no});
    }

    const auto exp = entries.find("experiment");
    if (exp == entries.end()) {
        throw ConfigError("missing required key 'experiment'");
    }
    ExperimentConfig c = default_config(exp->second.value);

    for (const auto &[key, entry] : entries) {
        const std::string ctx = "line " + std::to_string(entry.line) + ", key '" + key + "'";
        const std::string &v = entry.value;
        if (key == "experiment") {
            continue;
        }
        if (key == "sweep") {
            if (c.experiment != "custom") {
                throw ConfigError(ctx + ": only custom experiments choose the swept parameter");
            }
            c.sweep = v;
        } else if (key == "values") {
            c.values = detail::parse_grid(v, ctx);
        } else if (key == "schemes") {
            c.schemes.clear();
            for (const auto &s : detail::split_list(v)) {
                c.schemes.push_back(detail::parse_scheme(s, ctx));
            }
        } else if (key == "constellations") {
            c.constellations.clear();
            for (const auto &s : detail::split_list(v)) {
                c.constellations.push_back(detail::parse_constellation(s, ctx));
            }
        } else if (key == "N") {
            c.N = detail::parse_number<int>(v, ctx);
        } else if (key == "K") {
            c.K = detail::parse_number<int>(v, ctx);
        } else if (key == "A") {
            c.A = detail::parse_number<int>(v, ctx);
        } else if (key == "m") {
            c.m = detail::parse_number<int>(v, ctx);
        } else if (key == "tau") {
            c.tau = detail::parse_number<int>(v, ctx);
        } else if (key == "P_dB") {
            c.P_dB = detail::parse_number<double>(v, ctx);
        } else if (key == "channels") {
            c.channels = detail::parse_number<int>(v, ctx);
        } else if (key == "noise_samples") {
            c.noise_samples = detail::parse_number<int>(v, ctx);
        } else if (key == "eval_factor") {
            c.eval_factor = detail::parse_number<int>(v, ctx);
        } else if (key == "input") {
            c.input = detail::parse_input_mode(v, ctx);
        } else if (key == "seed") {
            c.seed = detail::parse_number<std::uint64_t>(v, ctx);
        } else if (key == "out") {
            c.out = v;
        } else if (key == "format") {
            if (v == "csv") {
                c.format = OutputFormat::Csv;
            } else if (v == "json") {
                c.format = OutputFormat::Json;
            } else {
                throw ConfigError(ctx + ": format must be csv or json");
            }
        } else if (key == "parallel") {
            c.parallel = detail::parse_number<int>(v, ctx);
        } else if (key == "strict") {
            c.strict = detail::parse_bool(v, ctx);
        } else if (key == "max_iters") {
            c.ba.max_iters = detail::parse_number<int>(v, ctx);
        } else if (key == "convergence_eps") {
            c.ba.convergence_eps = detail::parse_number<double>(v, ctx);
        } else if (key == "damping") {
            c.ba.damping = detail::parse_number<double>(v, ctx);
        } else if (key == "cap") {
            c.cap = detail::parse_number<std::uint64_t>(v, ctx);
        } else {
            throw ConfigError(ctx + ": unknown key");
        }
    }
    if (c.experiment == "custom" && c.sweep.empty()) {
        throw ConfigError("custom experiment: missing key 'sweep'");
    }
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

struct ResultRow {
    Scheme scheme = Scheme::Joint;
    ConstellationSpec constellation;
    std::string param_name;
    double param_value = 0.0;
    double rate_mean = 0.0;
    double rate_stderr = 0.0;
    int channels = 0;
    int noise_samples = 0;
    std::uint64_t seed = 0;
    bool converged = true;
};

inline constexpr const char *kCsvHeader =
    "scheme,constellation,param_name,param_value,rate_mean,rate_stderr,channels,noise_samples,seed,converged";

inline std::string format_rows(const std::vector<ResultRow> &rows, OutputFormat format)
{
    std::string out;
    if (format == OutputFormat::Csv) {
        out += kCsvHeader;
        out += '\n';
        for (const auto &r : rows) {
            out += to_string(r.scheme) + ',' + r.constellation.tag() + ',' + r.param_name + ',' +
                   detail::format_number(r.param_value) + ',' + detail::format_number(r.rate_mean) + ',' +
                   detail::format_number(r.rate_stderr) + ',' + std::to_string(r.channels) + ',' +
                   std::to_string(r.noise_samples) + ',' + std::to_string(r.seed) + ',' +
                   (r.converged ? "true" : "false") + '\n';
        }
        return out;
    }
    for (const auto &r : rows) {
        nlohmann::ordered_json j;
        j["scheme"] = to_string(r.scheme);
        j["constellation"] = r.constellation.tag();
        j["param_name"] = r.param_name;
        j["param_value"] = r.param_value;
        j["rate_mean"] = r.rate_mean;
        j["rate_stderr"] = r.rate_stderr;
        j["channels"] = r.channels;
        j["noise_samples"] = r.noise_samples;
        j["seed"] = r.seed;
        j["converged"] = r.converged;
        out += j.dump();
        out += '\n';
    }
    return out;
}

/// Canonical dump of the effective configuration, with linear powers.
inline std::string config_echo(const ExperimentConfig &c)
{
    auto join = [](const auto &items, auto fmt) {
        std::string s;
        for (std::size_t i = 0; i < items.size(); ++i) {
            s += (i ? "," : "") + fmt(items[i]);
        }
        return s;
    };
    std::ostringstream o;
    o << "experiment = " << c.experiment << '\n'
      << "sweep = " << c.sweep << '\n'
      << "values = " << join(c.values, [](double v) { return detail::format_number(v); }) << '\n'
      << "schemes = " << join(c.schemes, [](Scheme s) { return to_string(s); }) << '\n'
      << "constellations = " << join(c.constellations, [](const ConstellationSpec &s) { return s.tag(); }) << '\n'
      << "N = " << c.N << '\n'
      << "K = " << c.K << '\n'
      << "A = " << c.A << '\n'
      << "m = " << c.m << '\n'
      << "tau = " << c.tau << '\n'
      << "P_dB = " << detail::format_number(c.P_dB) << '\n'
      << "P_linear = " << detail::format_number(ExperimentConfig::db_to_linear(c.P_dB)) << '\n';
    if (c.sweep == "P_dB") {
        o << "values_P_linear = "
          << join(c.values, [](double v) { return detail::format_number(ExperimentConfig::db_to_linear(v)); })
          << '\n';
    }
    o << "channels = " << c.channels << '\n'
      << "noise_samples = " << c.noise_samples << '\n'
      << "eval_factor = " << c.eval_factor << '\n'
      << "input = " << to_string(c.input) << '\n'
      << "seed = " << c.seed << '\n'
      << "format = " << (c.format == OutputFormat::Csv ? "csv" : "json") << '\n'
      << "strict = " << (c.strict ? "true" : "false") << '\n'
      << "max_iters = " << c.ba.max_iters << '\n'
      << "convergence_eps = " << detail::format_number(c.ba.convergence_eps) << '\n'
      << "damping = " << detail::format_number(c.ba.damping) << '\n'
      << "cap = " << c.cap << '\n';
    return o.str();
}

namespace detail {

inline std::filesystem::path temp_path(const std::filesystem::path &p)
{
    return std::filesystem::path(p.string() + ".tmp");
}

inline void ensure_writable(const std::filesystem::path &p)
{
    const auto tmp = temp_path(p);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw ConfigError("output path '" + p.string() + "' is not writable");
        }
    }
    std::error_code ec;
    std::filesystem::remove(tmp, ec);
}

inline void write_atomic(const std::filesystem::path &p, const std::string &content)
{
    const auto tmp = temp_path(p);
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.flush();
        if (!f) {
            throw Error("failed writing '" + tmp.string() + "'");
        }
    }
    std::filesystem::rename(tmp, p);
}

} // namespace detail

/// Sidecar path holding the config echo for an output file.
inline std::filesystem::path config_echo_path(const std::filesystem::path &out)
{
    return std::filesystem::path(out.string() + ".config");
}

using ProgressFn = std::function<void(const ResultRow &, std::size_t done, std::size_t total)>;

/// Runs every (scheme, constellation, value) point. When `config.out` is
/// set the table and its config echo are written atomically; writability is
/// checked before any computation.
inline std::vector<ResultRow> run_experiment(const ExperimentConfig &config, const ProgressFn &progress = {})
{
    validate(config);
    if (!config.out.empty()) {
        detail::ensure_writable(config.out);
        detail::ensure_writable(config_echo_path(config.out));
    }

    const std::size_t total = config.schemes.size() * config.constellations.size() * config.values.size();
    std::vector<ResultRow> rows;
    rows.reserve(total);
    for (Scheme scheme : config.schemes) {
        for (const auto &cs : config.constellations) {
            for (double v : config.values) {
                const SchemeParams p = config.point(cs, v);
                AveragedRate avg;
                try {
                    avg = average_rate(scheme, p, config.channels, config.seed, config.parallel);
                } catch (const NumericalError &e) {
                    throw NumericalError(to_string(scheme) + " " + cs.tag() + " " + config.sweep + "=" +
                                         detail::format_number(v) + ": " + e.what());
                }
                if (!std::isfinite(avg.mean) || !std::isfinite(avg.channel_std_err)) {
                    throw NumericalError(to_string(scheme) + " " + cs.tag() + " " + config.sweep + "=" +
                                         detail::format_number(v) + ": non-finite rate");
                }
                ResultRow row;
                row.scheme = scheme;
                row.constellation = cs;
                row.param_name = config.sweep;
                row.param_value = v;
                row.rate_mean = avg.mean;
                row.rate_stderr = avg.channel_std_err;
                row.channels = config.channels;
                row.noise_samples = config.noise_samples;
                row.seed = config.seed;
                row.converged = avg.converged;
                rows.push_back(row);
                if (progress) {
                    progress(row, rows.size(), total);
                }
            }
        }
    }

    if (!config.out.empty()) {
        detail::write_atomic(config.out, format_rows(rows, config.format));
        detail::write_atomic(config_echo_path(config.out), config_echo(config));
    }
    return rows;
}

} // namespace ris

#endif // RIS_EXPERIMENTS_HPP
