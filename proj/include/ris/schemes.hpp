// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Per-channel and channel-averaged rates of the three transmission schemes:
// joint encoding (capacity), max-SNR, and layered encoding with successive
// cancellation; plus the exact high-SNR limit of the capacity.

#ifndef RIS_SCHEMES_HPP
#define RIS_SCHEMES_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "estimators.hpp"
#include "model.hpp"
#include "optimizers.hpp"
#include "rng.hpp"

namespace ris {

enum class Scheme { Joint, MaxSnr, Layered };

inline std::string to_string(Scheme s)
{
    switch (s) {
    case Scheme::Joint: return "joint";
    case Scheme::MaxSnr: return "max-snr";
    case Scheme::Layered: return "layered";
    }
    return "?";
}

/// Input distribution used by the joint and max-SNR schemes. Optimized solves
/// the constrained maximization per channel; Uniform spreads mass evenly over
/// the alphabet.
enum class InputMode { Optimized, Uniform };

inline std::string to_string(InputMode mode)
{
    return mode == InputMode::Uniform ? "uniform" : "optimized";
}

struct SchemeParams {
    int N = 2;
    int K = 3;
    int A = 2;
    int m = 2;
    int tau = 1;
    ConstellationKind kind = ConstellationKind::ASK;
    int B = 4;
    double P = 1.0; // linear
    /// Samples in the optimization batch; reported rates use a fresh batch of
    /// eval_factor times as many.
    int noise_samples = 2000;
    int eval_factor = 2;
    InputMode input = InputMode::Optimized;
    BaSettings ba;
    std::uint64_t cap = kDefaultEnumerationCap;

    void validate() const
    {
        if (N < 1 || K < 1 || A < 1 || m < 1 || tau < 1 || B < 1) {
            throw std::invalid_argument("SchemeParams: N, K, A, m, tau and B must be positive");
        }
        if (!(P > 0.0) || !std::isfinite(P)) {
            throw std::invalid_argument("SchemeParams: P must be positive");
        }
        if (noise_samples < 2 || eval_factor < 1) {
            throw std::invalid_argument("SchemeParams: need noise_samples >= 2 and eval_factor >= 1");
        }
        ba.validate();
    }

    [[nodiscard]] Constellation constellation() const { return make_constellation(kind, B, P); }
    [[nodiscard]] RisPhaseSet phase_set() const { return make_phase_set(A); }
    [[nodiscard]] int m_tilde() const { return std::max(tau + 1, m); }
};

namespace detail {

inline NoiseBatch optimization_batch(const SchemeParams &params, std::uint64_t seed)
{
    return NoiseBatch(derive_seed(seed, 1), params.noise_samples, params.N, params.m);
}

inline NoiseBatch evaluation_batch(const SchemeParams &params, std::uint64_t seed)
{
    return NoiseBatch(derive_seed(seed, 2), params.noise_samples * params.eval_factor, params.N, params.m);
}

} // namespace detail

/// C(g, H): optimize p(x, theta) on one batch, report it on a fresh one.
/// With InputMode::Uniform the uniform joint distribution is evaluated instead.
inline RateEstimate capacity_rate(const Csi &csi, const SchemeParams &params, std::uint64_t seed)
{
    params.validate();
    const Constellation constellation = params.constellation();
    const RisPhaseSet phase_set = params.phase_set();
    if (params.input == InputMode::Uniform) {
        const auto T = enumerate_configs(phase_set, csi.K(), params.cap).size();
        const auto X = enumerate_blocks(constellation, params.m, params.cap).size();
        detail::check_joint_size(X, T, params.cap);
        RateEstimate r = capacity_functional(JointDistribution::uniform(static_cast<int>(X), static_cast<int>(T)), csi,
                                             constellation, phase_set, params.m,
                                             detail::evaluation_batch(params, seed), params.cap);
        r.detail.reset();
        return r;
    }
    const BaResult opt = optimize_joint_distribution(csi, constellation, phase_set, params.m,
                                                     detail::optimization_batch(params, seed), params.ba, params.cap);
    RateEstimate r = capacity_functional(opt.distribution, csi, constellation, phase_set, params.m,
                                         detail::evaluation_batch(params, seed), params.cap);
    r.converged = opt.converged;
    r.detail.reset();
    return r;
}

/// R_max-SNR(g, H): SNR-maximizing configuration, optimized p(x).
inline RateEstimate max_snr_rate(const Csi &csi, const SchemeParams &params, std::uint64_t seed)
{
    params.validate();
    const Constellation constellation = params.constellation();
    const RisPhaseSet phase_set = params.phase_set();
    const RisConfig theta = max_snr_config(csi, phase_set, csi.K(), params.cap);
    if (params.input == InputMode::Uniform) {
        const std::vector<double> uniform(static_cast<std::size_t>(constellation.size()),
                                          1.0 / static_cast<double>(constellation.size()));
        RateEstimate r = maxsnr_functional(uniform, theta, csi, constellation, phase_set,
                                           detail::evaluation_batch(params, seed).column(0));
        r.detail.reset();
        return r;
    }
    const InputResult opt = optimize_maxsnr_input(csi, theta, constellation, phase_set,
                                                  detail::optimization_batch(params, seed).column(0), params.ba);
    RateEstimate r = maxsnr_functional(opt.distribution, theta, csi, constellation, phase_set,
                                       detail::evaluation_batch(params, seed).column(0));
    r.converged = opt.converged;
    r.detail.reset();
    return r;
}

/// Water-filled power allocation over all configurations of one channel.
inline PowerAllocation layered_power_allocation(const Csi &csi, const SchemeParams &params)
{
    const Constellation constellation = params.constellation();
    const RisPhaseSet phase_set = params.phase_set();
    const auto configs = enumerate_configs(phase_set, csi.K(), params.cap);
    std::vector<double> gammas;
    gammas.reserve(configs.size());
    for (const auto &c : configs) {
        gammas.push_back(snr_gamma(csi, c, phase_set, params.P));
    }
    return waterfill_cutoff(gammas, constellation.power_ratio());
}

/// R_layered(g, H, tau) = R1 / m~ + (m~ - tau) / m~ * R2 with m~ = max(tau + 1, m).
inline RateEstimate layered_rate(const Csi &csi, const SchemeParams &params, std::uint64_t seed)
{
    params.validate();
    const Constellation constellation = params.constellation();
    const RisPhaseSet phase_set = params.phase_set();
    const PowerAllocation alloc = layered_power_allocation(csi, params);

    const NoiseBatch eval = detail::evaluation_batch(params, seed);
    const RateEstimate r1 = rate_r1(csi, phase_set, csi.K(), params.tau, params.P, eval.column(0), params.cap);
    const RateEstimate r2 =
        rate_r2(csi, constellation, phase_set, alloc.alpha, eval.column(params.m > 1 ? 1 : 0), params.cap);

    const double mt = params.m_tilde();
    const double w2 = (mt - params.tau) / mt;
    RateEstimate r;
    r.mean = r1.mean / mt + w2 * r2.mean;
    r.std_err = std::hypot(r1.std_err / mt, w2 * r2.std_err);
    r.noise_samples = eval.samples();
    return r;
}

inline RateEstimate scheme_rate(Scheme scheme, const Csi &csi, const SchemeParams &params, std::uint64_t seed)
{
    switch (scheme) {
    case Scheme::Joint: return capacity_rate(csi, params, seed);
    case Scheme::MaxSnr: return max_snr_rate(csi, params, seed);
    case Scheme::Layered: return layered_rate(csi, params, seed);
    }
    throw std::invalid_argument("unknown scheme");
}

// ---------------------------------------------------------------------------
// High-SNR limit
// ---------------------------------------------------------------------------

struct HighSnrLimit {
    /// |C|: number of distinct K x m matrices (e^{j theta})^T x.
    std::uint64_t size = 0;
    int m = 1;
    /// log2(|C|) / m.
    double bits_per_symbol = 0.0;
};

namespace detail {

inline constexpr double kDedupGrid = 1e-9;

/// Entry values e^{j theta_a} x_b in power-normalized units (ASK points
/// become odd integers, PSK points unit phasors), indexed [a * B + b].
inline std::vector<cplx> normalized_entries(ConstellationKind kind, int B, int A)
{
    const Constellation c = make_constellation(kind, B, 1.0);
    const RisPhaseSet phases(A);
    std::vector<cplx> out;
    out.reserve(static_cast<std::size_t>(A) * B);
    for (int a = 0; a < A; ++a) {
        for (int b = 0; b < B; ++b) {
            const cplx x = kind == ConstellationKind::ASK ? cplx(2.0 * b + 1.0, 0.0)
                                                          : c.points[static_cast<std::size_t>(b)];
            out.push_back(phases.phasor(a) * x);
        }
    }
    return out;
}

inline long long grid_key(double v) { return std::llround(v / kDedupGrid); }

/// Smallest distance between entry values that the dedup grid treats as
/// distinct.
inline double min_entry_separation(ConstellationKind kind, int B, int A)
{
    const auto e = normalized_entries(kind, B, A);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
            const bool same = grid_key(e[i].real()) == grid_key(e[j].real()) &&
                              grid_key(e[i].imag()) == grid_key(e[j].imag());
            if (!same) {
                best = std::min(best, std::abs(e[i] - e[j]));
            }
        }
    }
    return best;
}

} // namespace detail

/// Exact high-SNR capacity limit by enumerating the effective signal set.
inline HighSnrLimit high_snr_limit(ConstellationKind kind, int B, int A, int K, int m,
                                   std::uint64_t cap = kDefaultEnumerationCap)
{
    if (B < 1 || A < 1 || K < 1 || m < 1) {
        throw std::invalid_argument("high_snr_limit: B, A, K and m must be positive");
    }
    const RisPhaseSet phase_set(A);
    const Constellation unit = make_constellation(kind, B, 1.0);
    const auto configs = enumerate_configs(phase_set, K, cap);
    const auto blocks = enumerate_blocks(unit, m, cap);
    detail::check_joint_size(blocks.size(), configs.size(), cap);

    // Entry keys per (phase index, symbol index), rounded once.
    const auto entries = detail::normalized_entries(kind, B, A);
    std::vector<std::pair<long long, long long>> keys;
    keys.reserve(entries.size());
    for (const auto &e : entries) {
        keys.emplace_back(detail::grid_key(e.real()), detail::grid_key(e.imag()));
    }

    std::set<std::vector<long long>> distinct;
    std::vector<long long> key(static_cast<std::size_t>(2 * K * m));
    for (const auto &c : configs) {
        for (const auto &b : blocks) {
            std::size_t pos = 0;
            for (int k = 0; k < K; ++k) {
                for (int l = 0; l < m; ++l) {
                    const auto &kv = keys[static_cast<std::size_t>(c.theta[static_cast<std::size_t>(k)] * B +
                                                                   b.x[static_cast<std::size_t>(l)])];
                    key[pos++] = kv.first;
                    key[pos++] = kv.second;
                }
            }
            distinct.insert(key);
        }
    }

    HighSnrLimit out;
    out.size = distinct.size();
    out.m = m;
    out.bits_per_symbol = std::log2(static_cast<double>(out.size)) / m;
    if (kind == ConstellationKind::ASK) {
        const std::uint64_t expected = blocks.size() * configs.size();
        if (out.size != expected) {
            throw NumericalError("high_snr_limit: ASK signal set has " + std::to_string(out.size) +
                                 " elements, closed form requires " + std::to_string(expected));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Channel averaging
// ---------------------------------------------------------------------------

struct AveragedRate {
    double mean = 0.0;
    double channel_std_err = 0.0;
    std::vector<RateEstimate> per_channel;
    int channels = 0;
    std::uint64_t seed = 0;
    bool converged = true;
};

/// Seeds of channel c: the CSI draw and the noise of the scheme evaluation.
inline std::uint64_t channel_csi_seed(std::uint64_t seed, int c)
{
    return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(c)), 0);
}
inline std::uint64_t channel_noise_seed(std::uint64_t seed, int c)
{
    return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(c)), 1);
}

/// E[R(g, H)] over `channels` Rayleigh draws. Channels are spread across
/// `workers` threads; results are merged in channel order.
inline AveragedRate average_rate(Scheme scheme, const SchemeParams &params, int channels, std::uint64_t seed,
                                 int workers = 1)
{
    if (channels < 1) {
        throw std::invalid_argument("average_rate: channels must be at least 1");
    }
    params.validate();
    std::vector<RateEstimate> results(static_cast<std::size_t>(channels));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(channels));
    std::atomic<int> next{0};

    auto work = [&] {
        for (int c = next++; c < channels; c = next++) {
            try {
                const Csi csi = sample_csi(channel_csi_seed(seed, c), params.N, params.K);
                results[static_cast<std::size_t>(c)] = scheme_rate(scheme, csi, params, channel_noise_seed(seed, c));
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    const int nthreads = std::clamp(workers, 1, channels);
    if (nthreads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back(work);
        }
    }

    for (int c = 0; c < channels; ++c) {
        if (!errors[static_cast<std::size_t>(c)]) {
            continue;
        }
        const std::string ctx = "channel " + std::to_string(c) + " (sub-seed " +
                                std::to_string(derive_seed(seed, static_cast<std::uint64_t>(c))) + "): ";
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(c)]);
        } catch (const NumericalError &e) {
            throw NumericalError(ctx + e.what());
        } catch (const std::exception &e) {
            throw Error(ctx + e.what());
        }
    }

    AveragedRate out;
    out.channels = channels;
    out.seed = seed;
    double sum = 0.0;
    for (const auto &r : results) {
        sum += r.mean;
        out.converged = out.converged && r.converged;
    }
    out.mean = sum / channels;
    if (channels > 1) {
        double ss = 0.0;
        for (const auto &r : results) {
            ss += (r.mean - out.mean) * (r.mean - out.mean);
        }
        out.channel_std_err = std::sqrt(ss / (channels - 1) / channels);
    }
    out.per_channel = std::move(results);
    return out;
}

} // namespace ris

#endif // RIS_SCHEMES_HPP
