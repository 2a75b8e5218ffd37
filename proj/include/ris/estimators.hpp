// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Monte Carlo rate functionals for a fixed channel and input distribution.
//
// All four functionals are mutual informations of a finite input set observed
// in CN(0, I) noise. They are evaluated in information-density form,
//
//     I = (1/m) sum_i p_i E[ -log2 sum_j p_j exp(||Z||^2 - ||Z + c_i - c_j||^2) ],
//
// which equals -N log2(e) - (1/m) sum_i p_i E[f(i, Z)] once E||Z||^2 = N m is
// substituted; using the sampled ||Z||^2 instead makes singleton alphabets
// evaluate to exactly zero. One noise batch is shared by every input term.

#ifndef RIS_ESTIMATORS_HPP
#define RIS_ESTIMATORS_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kernel.hpp"
#include "model.hpp"

namespace ris {

/// Probability mass over B^m x A^K, stored block-major: entry
/// (block, config) lives at block * num_configs + config.
class JointDistribution {
public:
    JointDistribution(int num_blocks, int num_configs, Eigen::VectorXd probs)
        : blocks_(num_blocks), configs_(num_configs), probs_(std::move(probs))
    {
        if (num_blocks < 1 || num_configs < 1 ||
            probs_.size() != static_cast<Eigen::Index>(num_blocks) * num_configs) {
            throw DimensionError("JointDistribution: probability vector does not match alphabet size");
        }
        if ((probs_.array() < 0.0).any() || !probs_.allFinite()) {
            throw std::invalid_argument("JointDistribution: negative or non-finite probability");
        }
        if (std::abs(probs_.sum() - 1.0) > 1e-12) {
            throw std::invalid_argument("JointDistribution: probabilities do not sum to one");
        }
    }

    static JointDistribution uniform(int num_blocks, int num_configs)
    {
        const Eigen::Index n = static_cast<Eigen::Index>(num_blocks) * num_configs;
        return JointDistribution(num_blocks, num_configs, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
    }

    /// p(x) i.i.d. over m positions, all mass on configuration `config`.
    static JointDistribution product(const std::vector<double> &symbol_probs, int m, int num_configs, int config)
    {
        const auto B = static_cast<int>(symbol_probs.size());
        const auto blocks = detail::digit_tuples(B, m);
        Eigen::VectorXd probs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blocks.size()) * num_configs);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            double q = 1.0;
            for (int x : blocks[b]) {
                q *= symbol_probs[static_cast<std::size_t>(x)];
            }
            probs(static_cast<Eigen::Index>(b) * num_configs + config) = q;
        }
        probs /= probs.sum();
        return JointDistribution(static_cast<int>(blocks.size()), num_configs, std::move(probs));
    }

    [[nodiscard]] int num_blocks() const noexcept { return blocks_; }
    [[nodiscard]] int num_configs() const noexcept { return configs_; }
    [[nodiscard]] const Eigen::VectorXd &probs() const noexcept { return probs_; }
    [[nodiscard]] double operator()(int block, int config) const
    {
        return probs_(static_cast<Eigen::Index>(block) * configs_ + config);
    }

private:
    int blocks_;
    int configs_;
    Eigen::VectorXd probs_;
};

/// A rate in bits per symbol with its Monte Carlo standard error.
struct RateEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    int noise_samples = 1;
    bool converged = true;
    /// Per-input information densities in bits per symbol, when requested.
    std::optional<std::vector<double>> detail;
};

namespace detail {

/// Mean and standard error of a per-sample series.
inline RateEstimate summarize(const Eigen::VectorXd &per_sample)
{
    RateEstimate r;
    const auto S = per_sample.size();
    r.noise_samples = static_cast<int>(S);
    double sum = 0.0;
    for (Eigen::Index s = 0; s < S; ++s) {
        sum += per_sample(s);
    }
    r.mean = sum / static_cast<double>(S);
    if (S > 1) {
        double ss = 0.0;
        for (Eigen::Index s = 0; s < S; ++s) {
            const double d = per_sample(s) - r.mean;
            ss += d * d;
        }
        r.std_err = std::sqrt(ss / static_cast<double>(S - 1) / static_cast<double>(S));
    }
    return r;
}

/// Per-sample mutual information in bits per symbol and per-input
/// densities in bits per block, from a kernel evaluation.
///
/// `adjusted` (filled on request) is d_k - log2(e) (r_k - 1) with r the
/// kernel's back-flow: it has the same expectation as d_k and the same
/// p-average, and it is the exact gradient (up to a constant) of the
/// sample-average objective, so its uniformity on the support is the
/// stationarity condition for a fixed batch.
struct MiSamples {
    Eigen::VectorXd per_sample; // length S
    Eigen::VectorXd densities;  // length M, bits per block
    Eigen::VectorXd adjusted;   // length M, bits per block
};

inline MiSamples mutual_information_samples(const MixtureKernel &kernel, const Eigen::VectorXd &p, int m,
                                            bool with_adjusted = false)
{
    Eigen::VectorXd flow;
    const Eigen::MatrixXd &L = kernel.log2_mixture(p, with_adjusted ? &flow : nullptr);
    MiSamples out;
    out.per_sample = -(L.transpose() * p) / m;
    out.densities = -L.rowwise().mean();
    if (with_adjusted) {
        out.adjusted = out.densities - std::numbers::log2e * (flow.array() - 1.0).matrix();
    }
    return out;
}

inline RateEstimate mutual_information(const MixtureKernel &kernel, const Eigen::VectorXd &p, int m,
                                       bool with_detail = false)
{
    const MiSamples mi = mutual_information_samples(kernel, p, m);
    RateEstimate r = summarize(mi.per_sample);
    if (with_detail) {
        std::vector<double> d(static_cast<std::size_t>(mi.densities.size()));
        for (Eigen::Index i = 0; i < mi.densities.size(); ++i) {
            d[static_cast<std::size_t>(i)] = mi.densities(i) / m;
        }
        r.detail = std::move(d);
    }
    return r;
}

inline void check_joint_size(std::uint64_t blocks, std::uint64_t configs, std::uint64_t cap)
{
    if (blocks * configs > cap) {
        throw CapExceededError("alphabet too large: B^m * A^K = " + std::to_string(blocks * configs) +
                               " exceeds enumeration cap " + std::to_string(cap));
    }
}

inline void check_batch(const NoiseBatch &batch, int rows, int cols)
{
    if (batch.rows() != rows || batch.cols() != cols) {
        throw DimensionError("noise batch has shape " + std::to_string(batch.rows()) + "x" +
                             std::to_string(batch.cols()) + ", expected " + std::to_string(rows) + "x" +
                             std::to_string(cols));
    }
}

/// Signal points v_t * x_b for every (block, config), block-major, each a
/// vectorized N x m matrix.
inline Eigen::MatrixXcd joint_signal_points(const Eigen::MatrixXcd &gains, const Constellation &constellation,
                                            const std::vector<SymbolBlock> &blocks)
{
    const Eigen::Index N = gains.rows();
    const Eigen::Index T = gains.cols();
    const auto m = static_cast<Eigen::Index>(blocks.front().x.size());
    Eigen::MatrixXcd pts(N * m, static_cast<Eigen::Index>(blocks.size()) * T);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (Eigen::Index t = 0; t < T; ++t) {
            const Eigen::Index col = static_cast<Eigen::Index>(b) * T + t;
            for (Eigen::Index k = 0; k < m; ++k) {
                const cplx x = constellation.points[static_cast<std::size_t>(blocks[b].x[static_cast<std::size_t>(k)])];
                pts.block(k * N, col, N, 1) = gains.col(t) * x;
            }
        }
    }
    return pts;
}

inline Eigen::MatrixXcd symbol_signal_points(const Eigen::VectorXcd &gain, const Constellation &constellation,
                                             double amplitude = 1.0)
{
    Eigen::MatrixXcd pts(gain.size(), constellation.size());
    for (int b = 0; b < constellation.size(); ++b) {
        pts.col(b) = gain * (amplitude * constellation.points[static_cast<std::size_t>(b)]);
    }
    return pts;
}

} // namespace detail

/// Joint-encoding objective for a given p(x, theta): an estimate of
/// I(x, theta; Y) / m in bits per symbol. `detail` carries the per-input
/// densities d(x, theta) / m.
inline RateEstimate capacity_functional(const JointDistribution &dist, const Csi &csi,
                                        const Constellation &constellation, const RisPhaseSet &phase_set, int m,
                                        const NoiseBatch &batch, std::uint64_t cap = kDefaultEnumerationCap)
{
    detail::check_batch(batch, csi.N(), m);
    const auto configs = enumerate_configs(phase_set, csi.K(), cap);
    const auto blocks = enumerate_blocks(constellation, m, cap);
    detail::check_joint_size(blocks.size(), configs.size(), cap);
    if (dist.num_blocks() != static_cast<int>(blocks.size()) ||
        dist.num_configs() != static_cast<int>(configs.size())) {
        throw DimensionError("capacity_functional: distribution does not match B^m x A^K");
    }
    const Eigen::MatrixXcd pts =
        detail::joint_signal_points(effective_gains(csi, phase_set, configs), constellation, blocks);
    const detail::MixtureKernel kernel(pts, batch.data());
    return detail::mutual_information(kernel, dist.probs(), m, true);
}

/// Max-SNR objective: I(x; y) for a fixed configuration and per-symbol input
/// distribution.
inline RateEstimate maxsnr_functional(const std::vector<double> &input_dist, const RisConfig &theta, const Csi &csi,
                                      const Constellation &constellation, const RisPhaseSet &phase_set,
                                      const NoiseBatch &batch)
{
    detail::check_batch(batch, csi.N(), 1);
    if (static_cast<int>(input_dist.size()) != constellation.size()) {
        throw DimensionError("maxsnr_functional: input distribution does not match constellation size");
    }
    const Eigen::MatrixXcd pts =
        detail::symbol_signal_points(effective_gain(csi, theta, phase_set), constellation);
    const detail::MixtureKernel kernel(pts, batch.data());
    const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(input_dist.data(), pts.cols());
    return detail::mutual_information(kernel, p, 1, true);
}

/// RIS-configuration layer rate in bits per block: uniform theta over A^K,
/// pilots of amplitude sqrt(tau * P).
inline RateEstimate rate_r1(const Csi &csi, const RisPhaseSet &phase_set, int K, int tau, double P,
                            const NoiseBatch &batch, std::uint64_t cap = kDefaultEnumerationCap)
{
    if (K != csi.K()) {
        throw DimensionError("rate_r1: K does not match channel");
    }
    if (tau < 1 || !(P > 0.0)) {
        throw std::invalid_argument("rate_r1: need tau >= 1 and P > 0");
    }
    detail::check_batch(batch, csi.N(), 1);
    const auto configs = enumerate_configs(phase_set, K, cap);
    const Eigen::MatrixXcd pts = effective_gains(csi, phase_set, configs) * std::sqrt(static_cast<double>(tau) * P);
    const detail::MixtureKernel kernel(pts, batch.data());
    const auto T = pts.cols();
    return detail::mutual_information(kernel, Eigen::VectorXd::Constant(T, 1.0 / static_cast<double>(T)), 1);
}

/// Symbol layer rate in bits per symbol: uniform x, power allocation
/// alpha(theta), averaged uniformly over the configurations.
inline RateEstimate rate_r2(const Csi &csi, const Constellation &constellation, const RisPhaseSet &phase_set,
                            const std::vector<double> &alpha, const NoiseBatch &batch,
                            std::uint64_t cap = kDefaultEnumerationCap)
{
    detail::check_batch(batch, csi.N(), 1);
    const auto configs = enumerate_configs(phase_set, csi.K(), cap);
    if (alpha.size() != configs.size()) {
        throw DimensionError("rate_r2: alpha must have one entry per configuration");
    }
    for (double a : alpha) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("rate_r2: power allocation must be finite and non-negative");
        }
    }
    const Eigen::MatrixXcd gains = effective_gains(csi, phase_set, configs);
    const int B = constellation.size();
    const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(B, 1.0 / B);
    Eigen::VectorXd per_sample = Eigen::VectorXd::Zero(batch.samples());
    for (std::size_t t = 0; t < configs.size(); ++t) {
        const Eigen::MatrixXcd pts = detail::symbol_signal_points(gains.col(static_cast<Eigen::Index>(t)),
                                                                  constellation, std::sqrt(alpha[t]));
        const detail::MixtureKernel kernel(pts, batch.data());
        per_sample += detail::mutual_information_samples(kernel, uniform, 1).per_sample;
    }
    per_sample /= static_cast<double>(configs.size());
    return detail::summarize(per_sample);
}

} // namespace ris

#endif // RIS_ESTIMATORS_HPP
