// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Input-distribution optimization (Blahut-Arimoto with a power multiplier),
// max-SNR configuration search and water-filling power allocation.

#ifndef RIS_OPTIMIZERS_HPP
#define RIS_OPTIMIZERS_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "estimators.hpp"
#include "kernel.hpp"
#include "model.hpp"

namespace ris {

struct BaSettings {
    int max_iters = 1000;
    /// Stop once the capacity-gap bound falls below this many bits per symbol.
    double convergence_eps = 1e-3;
    /// Multiplier bracket in bits per symbol per unit power. An upper end of
    /// zero selects 100 / P; the bracket is doubled while still infeasible.
    double multiplier_lo = 0.0;
    double multiplier_hi = 0.0;
    double damping = 1.0;
    /// Inputs with probability below this count as off-support in the
    /// reported KKT spread.
    double support_threshold = 1e-4;
    /// Also require the KKT spread to fall below convergence_eps. The gap
    /// alone bounds the rate error; the spread converges much more slowly
    /// for inputs whose mass is decaying to zero.
    bool require_kkt = false;

    void validate() const
    {
        if (max_iters < 1) {
            throw std::invalid_argument("BaSettings: max_iters must be at least 1");
        }
        if (!(convergence_eps > 0.0)) {
            throw std::invalid_argument("BaSettings: convergence_eps must be positive");
        }
        if (!(damping > 0.0 && damping <= 1.0)) {
            throw std::invalid_argument("BaSettings: damping must lie in (0, 1]");
        }
        if (multiplier_lo < 0.0 || (multiplier_hi != 0.0 && multiplier_hi <= multiplier_lo)) {
            throw std::invalid_argument("BaSettings: invalid multiplier bracket");
        }
    }
};

/// Outcome of a joint-distribution optimization on a fixed noise batch.
struct BaResult {
    JointDistribution distribution;
    /// capacity_functional of the final distribution on the optimization batch.
    RateEstimate rate;
    /// Power multiplier s (bits per symbol per unit power) of the last update.
    double multiplier = 0.0;
    int iterations = 0;
    bool converged = false;
    /// max_i v_i - sum_i p_i v_i with v = d - s c, at exit.
    double gap = 0.0;
    /// max_i v_i - min over the support of v_i, at exit.
    double kkt_spread = 0.0;
    /// Objective (bits per symbol) after every accepted iterate, starting at
    /// the uniform distribution.
    std::vector<double> objective_trace;
    /// Per-input adjusted densities (see MiSamples) in bits per symbol used
    /// by the update, averaged over cyclic shifts of the block.
    std::vector<double> densities;
    /// Per-input block-average power c(x).
    std::vector<double> costs;
};

struct InputResult {
    std::vector<double> distribution;
    RateEstimate rate;
    double multiplier = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

namespace detail {

struct BaOutcome {
    Eigen::VectorXd p;
    Eigen::VectorXd densities; // bits per symbol, orbit averaged
    double multiplier = 0.0;
    int iterations = 0;
    bool converged = false;
    double gap = 0.0;
    double kkt_spread = 0.0;
    std::vector<double> trace;
};

/// Groups of input indices that share one value of the optimization
/// variable. Densities are averaged over each group before the update.
using Orbits = std::vector<std::vector<Eigen::Index>>;

inline Orbits trivial_orbits(Eigen::Index M)
{
    Orbits o(static_cast<std::size_t>(M));
    for (Eigen::Index i = 0; i < M; ++i) {
        o[static_cast<std::size_t>(i)] = {i};
    }
    return o;
}

/// Orbits of (block, config) under cyclic shifts of the block positions.
/// Restricting p to be shift-invariant makes every position carry the same
/// marginal power, so one multiplier enforces the per-position constraint.
inline Orbits cyclic_block_orbits(const std::vector<SymbolBlock> &blocks, int B, Eigen::Index num_configs)
{
    const auto nb = static_cast<Eigen::Index>(blocks.size());
    auto index_of = [B](const std::vector<int> &x) {
        Eigen::Index idx = 0;
        for (int v : x) {
            idx = idx * B + v;
        }
        return idx;
    };
    std::vector<Eigen::Index> rep(static_cast<std::size_t>(nb), -1);
    Orbits orbits;
    for (Eigen::Index b = 0; b < nb; ++b) {
        if (rep[static_cast<std::size_t>(b)] >= 0) {
            continue;
        }
        std::vector<Eigen::Index> members;
        std::vector<int> x = blocks[static_cast<std::size_t>(b)].x;
        for (std::size_t shift = 0; shift < x.size(); ++shift) {
            const Eigen::Index idx = index_of(x);
            if (std::find(members.begin(), members.end(), idx) == members.end()) {
                members.push_back(idx);
                rep[static_cast<std::size_t>(idx)] = b;
            }
            std::rotate(x.begin(), x.begin() + 1, x.end());
        }
        std::sort(members.begin(), members.end());
        for (Eigen::Index t = 0; t < num_configs; ++t) {
            std::vector<Eigen::Index> joint;
            joint.reserve(members.size());
            for (Eigen::Index mb : members) {
                joint.push_back(mb * num_configs + t);
            }
            orbits.push_back(std::move(joint));
        }
    }
    return orbits;
}

inline void orbit_average(Eigen::VectorXd &v, const Orbits &orbits)
{
    for (const auto &orbit : orbits) {
        if (orbit.size() < 2) {
            continue;
        }
        double acc = 0.0;
        for (Eigen::Index i : orbit) {
            acc += v(i);
        }
        acc /= static_cast<double>(orbit.size());
        for (Eigen::Index i : orbit) {
            v(i) = acc;
        }
    }
}

/// Multiplicative update p_i <- p_i 2^(step * m * (d_i - s c_i)), with the
/// smallest s >= lo that keeps sum p c <= P.
class PowerConstrainedUpdate {
public:
    PowerConstrainedUpdate(const Eigen::VectorXd &cost, double power, double lo, double hi)
        : cost_(cost), power_(power), lo_(lo), hi_(hi > 0.0 ? hi : 100.0 / power)
    {
    }

    /// Returns the multiplier; writes the updated distribution to `out`.
    double apply(const Eigen::VectorXd &p, const Eigen::VectorXd &density, double gain, Eigen::VectorXd &out) const
    {
        const double limit = power_ * (1.0 + 1e-12);
        if (lo_ == 0.0 && power_at(p, density, gain, 0.0, out) <= limit) {
            return 0.0;
        }
        double lo = lo_;
        double hi = std::max(hi_, lo_ * 2.0);
        if (power_at(p, density, gain, lo, out) <= limit) {
            return lo;
        }
        int expansions = 0;
        while (power_at(p, density, gain, hi, out) > limit) {
            lo = hi;
            hi *= 2.0;
            if (++expansions > 200) {
                throw NumericalError("power constraint cannot be met by any multiplier");
            }
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (power_at(p, density, gain, mid, out) <= limit) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        power_at(p, density, gain, hi, out);
        return hi;
    }

private:
    double power_at(const Eigen::VectorXd &p, const Eigen::VectorXd &density, double gain, double s,
                    Eigen::VectorXd &out) const
    {
        double top = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            if (p(i) > 0.0) {
                top = std::max(top, gain * (density(i) - s * cost_(i)));
            }
        }
        out.resize(p.size());
        double z = 0.0;
        double pw = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            out(i) = p(i) > 0.0 ? p(i) * std::exp2(gain * (density(i) - s * cost_(i)) - top) : 0.0;
            z += out(i);
            pw += out(i) * cost_(i);
        }
        out /= z;
        return pw / z;
    }

    Eigen::VectorXd cost_;
    double power_;
    double lo_;
    double hi_;
};

/// Blahut-Arimoto on the sample-average objective of a fixed kernel.
///
/// The objective is I(p) = sum_i p_i d_i(p) / m in bits per symbol. The
/// update exponentiates the adjusted densities rather than d itself: on a
/// finite batch the plug-in densities are not the gradient of I, and their
/// fixed point is not its maximizer. Each iteration halves the step until
/// the objective does not decrease, so the trace is monotone by
/// construction.
inline BaOutcome blahut_arimoto(const MixtureKernel &kernel, const Eigen::VectorXd &cost, const Orbits &orbits,
                                int m, double power, const BaSettings &settings)
{
    settings.validate();
    const Eigen::Index M = kernel.inputs();
    const PowerConstrainedUpdate update(cost, power, settings.multiplier_lo, settings.multiplier_hi);

    auto evaluate = [&](const Eigen::VectorXd &p, Eigen::VectorXd &dens) {
        dens = mutual_information_samples(kernel, p, m, true).adjusted / m;
        orbit_average(dens, orbits);
        return p.dot(dens);
    };

    BaOutcome out;
    out.p = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
    double objective = evaluate(out.p, out.densities);
    out.trace.push_back(objective);

    // A feasible start: the uniform input meets the power constraint for
    // normalized constellations, otherwise project with the multiplier.
    if (out.p.dot(cost) > power * (1.0 + 1e-12)) {
        Eigen::VectorXd q;
        out.multiplier = update.apply(out.p, Eigen::VectorXd::Zero(M), 1.0, q);
        out.p = q;
        objective = evaluate(out.p, out.densities);
        out.trace.push_back(objective);
    }

    Eigen::VectorXd candidate;
    Eigen::VectorXd candidate_dens;
    const double gain = static_cast<double>(m);
    for (;;) {
        // Stopping rule on v = d - s c.
        const Eigen::VectorXd v = out.densities - out.multiplier * cost;
        double vmax = -std::numeric_limits<double>::infinity();
        double vmin_support = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < M; ++i) {
            vmax = std::max(vmax, v(i));
            if (out.p(i) >= settings.support_threshold) {
                vmin_support = std::min(vmin_support, v(i));
            }
        }
        out.gap = vmax - out.p.dot(v);
        out.kkt_spread = vmax - vmin_support;
        if (out.gap < settings.convergence_eps &&
            (!settings.require_kkt || out.kkt_spread < settings.convergence_eps)) {
            out.converged = true;
            break;
        }
        if (out.iterations >= settings.max_iters) {
            break;
        }

        bool accepted = false;
        double step = settings.damping;
        for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
            const double s = update.apply(out.p, out.densities, gain * step, candidate);
            const double next = evaluate(candidate, candidate_dens);
            if (next >= objective - 1e-12) {
                out.p = candidate;
                out.densities = candidate_dens;
                out.multiplier = s;
                objective = next;
                accepted = true;
                break;
            }
        }
        ++out.iterations;
        if (!accepted) {
            break;
        }
        out.trace.push_back(objective);
    }
    return out;
}

/// Block-average power (1/m) sum_k |x_k|^2 per joint input, constant on
/// each orbit.
inline Eigen::VectorXd joint_costs(const Constellation &constellation, const std::vector<SymbolBlock> &blocks,
                                   Eigen::Index num_configs, const Orbits &orbits)
{
    Eigen::VectorXd c(static_cast<Eigen::Index>(blocks.size()) * num_configs);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        double acc = 0.0;
        for (int x : blocks[b].x) {
            acc += std::norm(constellation.points[static_cast<std::size_t>(x)]);
        }
        acc /= static_cast<double>(blocks[b].x.size());
        for (Eigen::Index t = 0; t < num_configs; ++t) {
            c(static_cast<Eigen::Index>(b) * num_configs + t) = acc;
        }
    }
    for (const auto &orbit : orbits) {
        for (Eigen::Index i : orbit) {
            c(i) = c(orbit.front());
        }
    }
    return c;
}

} // namespace detail

/// Capacity-achieving p(x, theta) for one channel, optimized on a fixed
/// noise batch. The per-position power of every symbol slot is checked after
/// the fact; exceeding P by more than 1e-6 relative throws.
inline BaResult optimize_joint_distribution(const Csi &csi, const Constellation &constellation,
                                            const RisPhaseSet &phase_set, int m, const NoiseBatch &batch,
                                            const BaSettings &settings = {},
                                            std::uint64_t cap = kDefaultEnumerationCap)
{
    detail::check_batch(batch, csi.N(), m);
    const auto configs = enumerate_configs(phase_set, csi.K(), cap);
    const auto blocks = enumerate_blocks(constellation, m, cap);
    detail::check_joint_size(blocks.size(), configs.size(), cap);
    const auto T = static_cast<Eigen::Index>(configs.size());

    const Eigen::MatrixXcd pts =
        detail::joint_signal_points(effective_gains(csi, phase_set, configs), constellation, blocks);
    const detail::MixtureKernel kernel(pts, batch.data());
    const detail::Orbits orbits = detail::cyclic_block_orbits(blocks, constellation.size(), T);
    const Eigen::VectorXd cost = detail::joint_costs(constellation, blocks, T, orbits);

    detail::BaOutcome ba = detail::blahut_arimoto(kernel, cost, orbits, m, constellation.power, settings);

    const double limit = constellation.power * (1.0 + 1e-6);
    for (int k = 0; k < m; ++k) {
        double pw = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const double x2 = std::norm(constellation.points[static_cast<std::size_t>(blocks[b].x[static_cast<std::size_t>(k)])]);
            for (Eigen::Index t = 0; t < T; ++t) {
                pw += ba.p(static_cast<Eigen::Index>(b) * T + t) * x2;
            }
        }
        if (pw > limit) {
            throw NumericalError("symbol position " + std::to_string(k) + " carries power " + std::to_string(pw) +
                                 " above the constraint " + std::to_string(constellation.power));
        }
    }

    Eigen::VectorXd p = ba.p / ba.p.sum();
    JointDistribution dist(static_cast<int>(blocks.size()), static_cast<int>(T), p);
    RateEstimate rate = detail::mutual_information(kernel, dist.probs(), m, true);
    rate.converged = ba.converged;

    return BaResult{
        .distribution = std::move(dist),
        .rate = std::move(rate),
        .multiplier = ba.multiplier,
        .iterations = ba.iterations,
        .converged = ba.converged,
        .gap = ba.gap,
        .kkt_spread = ba.kkt_spread,
        .objective_trace = std::move(ba.trace),
        .densities = std::vector<double>(ba.densities.data(), ba.densities.data() + ba.densities.size()),
        .costs = std::vector<double>(cost.data(), cost.data() + cost.size()),
    };
}

/// Exhaustive argmax of ||H S g||^2; ties go to the lexicographically
/// smallest configuration. A common rotation of all phases leaves the gain
/// unchanged, so ties always exist; gains within 1e-12 relative count as
/// equal so rounding in the phasors cannot pick among them.
inline RisConfig max_snr_config(const Csi &csi, const RisPhaseSet &phase_set, int K,
                                std::uint64_t cap = kDefaultEnumerationCap)
{
    if (K != csi.K()) {
        throw DimensionError("max_snr_config: K does not match channel");
    }
    const auto configs = enumerate_configs(phase_set, K, cap);
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t t = 0; t < configs.size(); ++t) {
        const double n2 = effective_gain(csi, configs[t], phase_set).squaredNorm();
        if (n2 > best_norm * (1.0 + 1e-12)) {
            best_norm = n2;
            best = t;
        }
    }
    return configs[best];
}

/// Optimal p(x) for a fixed configuration under E|x|^2 <= P.
inline InputResult optimize_maxsnr_input(const Csi &csi, const RisConfig &theta_star,
                                         const Constellation &constellation, const RisPhaseSet &phase_set,
                                         const NoiseBatch &batch, const BaSettings &settings = {})
{
    detail::check_batch(batch, csi.N(), 1);
    const Eigen::MatrixXcd pts =
        detail::symbol_signal_points(effective_gain(csi, theta_star, phase_set), constellation);
    const detail::MixtureKernel kernel(pts, batch.data());
    const auto B = pts.cols();
    Eigen::VectorXd cost(B);
    for (Eigen::Index b = 0; b < B; ++b) {
        cost(b) = std::norm(constellation.points[static_cast<std::size_t>(b)]);
    }
    detail::BaOutcome ba =
        detail::blahut_arimoto(kernel, cost, detail::trivial_orbits(B), 1, constellation.power, settings);

    InputResult r;
    const Eigen::VectorXd p = ba.p / ba.p.sum();
    r.distribution.assign(p.data(), p.data() + p.size());
    r.rate = detail::mutual_information(kernel, p, 1, true);
    r.rate.converged = ba.converged;
    r.multiplier = ba.multiplier;
    r.iterations = ba.iterations;
    r.converged = ba.converged;
    r.objective_trace = std::move(ba.trace);
    return r;
}

// ---------------------------------------------------------------------------
// Water-filling
// ---------------------------------------------------------------------------

class NoUsableConfigurationError : public Error {
public:
    using Error::Error;
};

struct PowerAllocation {
    std::vector<double> alpha;
    double gamma0 = 0.0;
    double target = 0.0;
};

/// Cutoff gamma0 with mean_theta (1/gamma0 - 1/gamma(theta))^+ = target,
/// found by bisection. Configurations with gamma <= gamma0 (including
/// gamma = 0) receive no power.
inline PowerAllocation waterfill_cutoff(const std::vector<double> &gammas, double target)
{
    if (gammas.empty()) {
        throw std::invalid_argument("waterfill_cutoff: empty SNR list");
    }
    if (!(target > 0.0) || !std::isfinite(target)) {
        throw std::invalid_argument("waterfill_cutoff: target must be positive");
    }
    double gmax = 0.0;
    for (double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("waterfill_cutoff: SNRs must be finite and non-negative");
        }
        gmax = std::max(gmax, g);
    }
    if (gmax == 0.0) {
        throw NoUsableConfigurationError("waterfill_cutoff: no usable configuration (all SNRs are zero)");
    }
    const auto n = static_cast<double>(gammas.size());
    auto level = [&](double g0) {
        double acc = 0.0;
        for (double g : gammas) {
            if (g > g0) {
                acc += 1.0 / g0 - 1.0 / g;
            }
        }
        return acc / n;
    };

    // level(lo) >= target by construction; level(gmax) = 0.
    double lo = 1.0 / (n * target + 1.0 / gmax);
    double hi = gmax;
    double g0 = lo;
    for (int it = 0; it < 2000; ++it) {
        g0 = 0.5 * (lo + hi);
        const double phi = level(g0);
        if (std::abs(phi - target) <= 1e-10 * target) {
            break;
        }
        if (phi > target) {
            lo = g0;
        } else {
            hi = g0;
        }
        if (hi - lo <= std::numeric_limits<double>::epsilon() * hi) {
            break;
        }
    }

    PowerAllocation out;
    out.gamma0 = g0;
    out.target = target;
    out.alpha.reserve(gammas.size());
    for (double g : gammas) {
        out.alpha.push_back(g > g0 ? 1.0 / g0 - 1.0 / g : 0.0);
    }
    return out;
}

} // namespace ris

#endif // RIS_OPTIMIZERS_HPP
