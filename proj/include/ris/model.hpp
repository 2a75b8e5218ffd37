// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Channel model, finite alphabets and RIS configurations for a single-antenna
// transmitter reaching an N-antenna receiver through a K-element surface:
//
//     Y = H * diag(exp(j*theta)) * g * x + Z
//
// with x a block of m symbols and Z an N x m matrix of CN(0,1) noise.

#ifndef RIS_MODEL_HPP
#define RIS_MODEL_HPP

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace ris {

using cplx = std::complex<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Raised when an exhaustive alphabet would exceed the enumeration cap.
class CapExceededError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: non-convergence in strict mode, violated post-hoc checks.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 20;

/// base^exp, or cap+1 once the product exceeds cap (overflow-safe).
inline std::uint64_t capped_power(std::uint64_t base, std::uint64_t exp, std::uint64_t cap)
{
    std::uint64_t r = 1;
    for (std::uint64_t i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base) {
            return cap + 1;
        }
        r *= base;
    }
    return r;
}

inline void check_alphabet_size(std::uint64_t base, std::uint64_t exp, std::uint64_t cap, const char *what)
{
    if (capped_power(base, exp, cap) > cap) {
        throw CapExceededError(std::string("alphabet too large: ") + what + " = " + std::to_string(base) + "^" +
                               std::to_string(exp) + " exceeds enumeration cap " + std::to_string(cap));
    }
}

/// exp(j*2*pi*k/n), exact at quarter turns.
inline cplx unit_phasor(std::uint64_t k, std::uint64_t n)
{
    k %= n;
    if ((4 * k) % n == 0) {
        switch ((4 * k) / n) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
        }
    }
    return std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Channel state
// ---------------------------------------------------------------------------

/// One quasi-static channel draw: g (K, transmitter to RIS) and H (N x K,
/// RIS to receiver).
class Csi {
public:
    Csi(Eigen::VectorXcd g, Eigen::MatrixXcd H) : g_(std::move(g)), H_(std::move(H))
    {
        if (g_.size() < 1 || H_.rows() < 1) {
            throw DimensionError("Csi: N and K must be positive");
        }
        if (H_.cols() != g_.size()) {
            throw DimensionError("Csi: H has " + std::to_string(H_.cols()) + " columns but g has length " +
                                 std::to_string(g_.size()));
        }
        if (!g_.allFinite() || !H_.allFinite()) {
            throw DimensionError("Csi: non-finite channel entry");
        }
    }

    [[nodiscard]] int N() const noexcept { return static_cast<int>(H_.rows()); }
    [[nodiscard]] int K() const noexcept { return static_cast<int>(g_.size()); }
    [[nodiscard]] const Eigen::VectorXcd &g() const noexcept { return g_; }
    [[nodiscard]] const Eigen::MatrixXcd &H() const noexcept { return H_; }

private:
    Eigen::VectorXcd g_;
    Eigen::MatrixXcd H_;
};

/// Rayleigh draw: g ~ CN(0, I_K), H with i.i.d. CN(0,1) entries, independent
/// of g. g is drawn first, then H row by row.
inline Csi sample_csi(std::uint64_t seed, int N, int K)
{
    if (N < 1 || K < 1) {
        throw std::invalid_argument("sample_csi: N and K must be positive");
    }
    Rng rng(seed);
    Eigen::VectorXcd g(K);
    for (int k = 0; k < K; ++k) {
        g(k) = rng.complex_normal();
    }
    Eigen::MatrixXcd H(N, K);
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            H(n, k) = rng.complex_normal();
        }
    }
    return Csi(std::move(g), std::move(H));
}

// ---------------------------------------------------------------------------
// Alphabets
// ---------------------------------------------------------------------------

/// A uniformly spaced phases {2*pi*a/A : a = 0..A-1}.
class RisPhaseSet {
public:
    explicit RisPhaseSet(int A) : A_(A)
    {
        if (A < 1) {
            throw std::invalid_argument("RisPhaseSet: A must be at least 1");
        }
        phases_.reserve(static_cast<std::size_t>(A));
        for (int a = 0; a < A; ++a) {
            phases_.push_back(2.0 * std::numbers::pi * a / A);
        }
    }

    [[nodiscard]] int size() const noexcept { return A_; }
    [[nodiscard]] const std::vector<double> &phases() const noexcept { return phases_; }
    [[nodiscard]] cplx phasor(int index) const { return unit_phasor(static_cast<std::uint64_t>(index), A_); }

private:
    int A_;
    std::vector<double> phases_;
};

inline RisPhaseSet make_phase_set(int A) { return RisPhaseSet(A); }

/// Phase indices, one per RIS element. Never stored as angles.
struct RisConfig {
    std::vector<int> theta;

    friend bool operator==(const RisConfig &, const RisConfig &) = default;
};

enum class ConstellationKind { ASK, PSK };

struct Constellation {
    std::vector<cplx> points;
    double power = 0.0; // linear average power P under uniform use
    ConstellationKind kind = ConstellationKind::ASK;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(points.size()); }

    /// B*P / sum |x|^2; the water-filling target. Equals 1 for normalized sets.
    [[nodiscard]] double power_ratio() const
    {
        double s = 0.0;
        for (const auto &x : points) {
            s += std::norm(x);
        }
        return static_cast<double>(points.size()) * power / s;
    }

    /// Amplitude unit in which the points are small integers (ASK) or unit
    /// magnitude (PSK).
    [[nodiscard]] double scale() const
    {
        const auto B = static_cast<double>(points.size());
        return kind == ConstellationKind::ASK ? std::sqrt(3.0 * power / (4.0 * B * B - 1.0)) : std::sqrt(power);
    }
};

/// {(2b-1)*beta : b = 1..B} with beta = sqrt(3P / (4B^2 - 1)).
inline Constellation make_ask(int B, double P)
{
    if (B < 1 || !(P > 0.0)) {
        throw std::invalid_argument("make_ask: need B >= 1 and P > 0");
    }
    Constellation c;
    c.power = P;
    c.kind = ConstellationKind::ASK;
    const double beta = std::sqrt(3.0 * P / (4.0 * B * B - 1.0));
    for (int b = 1; b <= B; ++b) {
        c.points.emplace_back((2.0 * b - 1.0) * beta, 0.0);
    }
    return c;
}

/// {sqrt(P) * exp(j*2*pi*b/B) : b = 0..B-1}.
inline Constellation make_psk(int B, double P)
{
    if (B < 1 || !(P > 0.0)) {
        throw std::invalid_argument("make_psk: need B >= 1 and P > 0");
    }
    Constellation c;
    c.power = P;
    c.kind = ConstellationKind::PSK;
    const double amp = std::sqrt(P);
    for (int b = 0; b < B; ++b) {
        c.points.push_back(amp * unit_phasor(static_cast<std::uint64_t>(b), B));
    }
    return c;
}

inline Constellation make_constellation(ConstellationKind kind, int B, double P)
{
    return kind == ConstellationKind::ASK ? make_ask(B, P) : make_psk(B, P);
}

/// m indices into a constellation.
struct SymbolBlock {
    std::vector<int> x;

    friend bool operator==(const SymbolBlock &, const SymbolBlock &) = default;
};

// ---------------------------------------------------------------------------
// Effective channel
// ---------------------------------------------------------------------------

inline void check_config(const Csi &csi, const RisConfig &theta, const RisPhaseSet &phase_set)
{
    if (static_cast<int>(theta.theta.size()) != csi.K()) {
        throw DimensionError("RisConfig has " + std::to_string(theta.theta.size()) + " entries, expected K = " +
                             std::to_string(csi.K()));
    }
    for (int a : theta.theta) {
        if (a < 0 || a >= phase_set.size()) {
            throw DimensionError("RisConfig index " + std::to_string(a) + " outside phase set of size " +
                                 std::to_string(phase_set.size()));
        }
    }
}

/// H * diag(exp(j*theta)) * g.
inline Eigen::VectorXcd effective_gain(const Csi &csi, const RisConfig &theta, const RisPhaseSet &phase_set)
{
    check_config(csi, theta, phase_set);
    Eigen::VectorXcd sg(csi.K());
    for (int k = 0; k < csi.K(); ++k) {
        sg(k) = phase_set.phasor(theta.theta[static_cast<std::size_t>(k)]) * csi.g()(k);
    }
    return csi.H() * sg;
}

/// Receive SNR ||H S g||^2 * P of one configuration.
inline double snr_gamma(const Csi &csi, const RisConfig &theta, const RisPhaseSet &phase_set, double P)
{
    if (!(P > 0.0)) {
        throw std::invalid_argument("snr_gamma: P must be positive");
    }
    return effective_gain(csi, theta, phase_set).squaredNorm() * P;
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

namespace detail {

/// All digit tuples of the given length over `base`, lexicographic with the
/// first digit most significant.
inline std::vector<std::vector<int>> digit_tuples(int base, int length)
{
    std::uint64_t count = capped_power(static_cast<std::uint64_t>(base), static_cast<std::uint64_t>(length),
                                       std::numeric_limits<std::uint64_t>::max() - 1);
    std::vector<std::vector<int>> out;
    out.reserve(count);
    std::vector<int> digits(static_cast<std::size_t>(length), 0);
    for (std::uint64_t n = 0; n < count; ++n) {
        out.push_back(digits);
        for (int pos = length - 1; pos >= 0; --pos) {
            auto &d = digits[static_cast<std::size_t>(pos)];
            if (++d < base) {
                break;
            }
            d = 0;
        }
    }
    return out;
}

} // namespace detail

inline std::vector<RisConfig> enumerate_configs(const RisPhaseSet &phase_set, int K,
                                                std::uint64_t cap = kDefaultEnumerationCap)
{
    if (K < 1) {
        throw std::invalid_argument("enumerate_configs: K must be positive");
    }
    check_alphabet_size(static_cast<std::uint64_t>(phase_set.size()), static_cast<std::uint64_t>(K), cap, "A^K");
    std::vector<RisConfig> out;
    for (auto &t : detail::digit_tuples(phase_set.size(), K)) {
        out.push_back(RisConfig{std::move(t)});
    }
    return out;
}

inline std::vector<SymbolBlock> enumerate_blocks(const Constellation &constellation, int m,
                                                 std::uint64_t cap = kDefaultEnumerationCap)
{
    if (m < 1) {
        throw std::invalid_argument("enumerate_blocks: m must be positive");
    }
    check_alphabet_size(static_cast<std::uint64_t>(constellation.size()), static_cast<std::uint64_t>(m), cap,
                        "B^m");
    std::vector<SymbolBlock> out;
    for (auto &t : detail::digit_tuples(constellation.size(), m)) {
        out.push_back(SymbolBlock{std::move(t)});
    }
    return out;
}

/// Effective gains of every configuration, one column per config in
/// enumeration order (N x A^K).
inline Eigen::MatrixXcd effective_gains(const Csi &csi, const RisPhaseSet &phase_set,
                                        const std::vector<RisConfig> &configs)
{
    Eigen::MatrixXcd V(csi.N(), static_cast<Eigen::Index>(configs.size()));
    for (std::size_t t = 0; t < configs.size(); ++t) {
        V.col(static_cast<Eigen::Index>(t)) = effective_gain(csi, configs[t], phase_set);
    }
    return V;
}

// ---------------------------------------------------------------------------
// Noise
// ---------------------------------------------------------------------------

/// S seeded draws of an N x m CN(0,1) matrix. Sample s is stored as column s
/// of data(), holding the matrix in column-major order (entry (n, k) at row
/// k*N + n).
class NoiseBatch {
public:
    NoiseBatch(std::uint64_t seed, int samples, int rows, int cols) : seed_(seed), rows_(rows), cols_(cols)
    {
        if (samples < 1 || rows < 1 || cols < 1) {
            throw std::invalid_argument("NoiseBatch: samples, rows and cols must be positive");
        }
        Rng rng(seed);
        data_.resize(static_cast<Eigen::Index>(rows) * cols, samples);
        for (int s = 0; s < samples; ++s) {
            for (Eigen::Index e = 0; e < data_.rows(); ++e) {
                data_(e, s) = rng.complex_normal();
            }
        }
    }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] int samples() const noexcept { return static_cast<int>(data_.cols()); }
    [[nodiscard]] int rows() const noexcept { return rows_; }
    [[nodiscard]] int cols() const noexcept { return cols_; }
    [[nodiscard]] const Eigen::MatrixXcd &data() const noexcept { return data_; }

    /// The N x 1 batch formed by column k of every sample.
    [[nodiscard]] NoiseBatch column(int k) const
    {
        if (k < 0 || k >= cols_) {
            throw DimensionError("NoiseBatch::column: index out of range");
        }
        return NoiseBatch(seed_, rows_, data_.middleRows(static_cast<Eigen::Index>(k) * rows_, rows_));
    }

    /// The first `samples` draws.
    [[nodiscard]] NoiseBatch head(int samples) const
    {
        if (samples < 1 || samples > this->samples()) {
            throw std::invalid_argument("NoiseBatch::head: sample count out of range");
        }
        return NoiseBatch(seed_, rows_, cols_, data_.leftCols(samples));
    }

private:
    NoiseBatch(std::uint64_t seed, int rows, Eigen::MatrixXcd data)
        : seed_(seed), rows_(rows), cols_(1), data_(std::move(data))
    {
    }
    NoiseBatch(std::uint64_t seed, int rows, int cols, Eigen::MatrixXcd data)
        : seed_(seed), rows_(rows), cols_(cols), data_(std::move(data))
    {
    }

    std::uint64_t seed_;
    int rows_;
    int cols_;
    Eigen::MatrixXcd data_;
};

} // namespace ris

#endif // RIS_MODEL_HPP
