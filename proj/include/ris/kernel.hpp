// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors
//
// Sample-average evaluation of Gaussian-mixture log-likelihood ratios over a
// finite signal set. For signal points c_1..c_M (vectorized N x m matrices)
// and a fixed noise batch Z_1..Z_S, the kernel returns
//
//     L(i, s) = log2 sum_j p_j exp(||Z_s||^2 - ||Z_s + c_i - c_j||^2)
//
// for any input distribution p. Each term is the likelihood of output
// Z_s + c_i under input j relative to its own input i, so every quantity is
// bounded above by exp(||Z_s||^2) and the j = i term is exactly p_i.
//
// Two evaluation routes are used, chosen per noise sample:
//
//   factorized  exp(-||Z+c_i-c_j||^2 + ||Z||^2)
//                   = G_ij * exp(2 a_j) * exp(-2 a_i),   a_j = Re<Z, c_j>,
//               so one M x M matrix G = exp(-||c_i - c_j||^2) serves all
//               samples and the sum over j is a matrix product. Used when
//               the exponents 2 a_j span at most kFactorizedSpan, so the
//               centred factors stay inside double range.
//   direct      exponent -||c_i - c_j||^2 + 2 a_j - 2 a_i evaluated per pair;
//               as a dense M x M block per sample, or over neighbour lists
//               of terms that cannot underflow when those lists are short.

#ifndef RIS_KERNEL_HPP
#define RIS_KERNEL_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#if defined(__SSE2__) || defined(_M_X64)
#include <xmmintrin.h>
#define RIS_HAVE_MXCSR 1
#endif

namespace ris::detail {

/// Flushes subnormal operands and results to zero for the lifetime of the
/// guard. Products of e^(-||c_i - c_j||^2) with small probabilities land in
/// the subnormal range routinely, and subnormal arithmetic is two orders of
/// magnitude slower; the flushed values are far below anything that can
/// reach a result.
class FlushSubnormals {
public:
#ifdef RIS_HAVE_MXCSR
    FlushSubnormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); } // FTZ | DAZ
    ~FlushSubnormals() { _mm_setcsr(saved_); }
#else
    FlushSubnormals() = default;
#endif
    FlushSubnormals(const FlushSubnormals &) = delete;
    FlushSubnormals &operator=(const FlushSubnormals &) = delete;

private:
#ifdef RIS_HAVE_MXCSR
    unsigned int saved_;
#endif
};

class MixtureKernel {
public:
    static constexpr double kFactorizedSpan = 400.0;
    // exp(-x) == 0 in double for x above ~745.2; pairs further apart than
    // this in exponent are dropped without changing the result.
    static constexpr double kUnderflowExponent = 760.0;
    // Neighbour lists beat the dense block only when they are short.
    static constexpr double kSparseFraction = 0.1;

    /// points: dim x M signal set; noise: dim x S samples.
    MixtureKernel(const Eigen::MatrixXcd &points, const Eigen::MatrixXcd &noise)
        : points_(points), noise_(noise), M_(points.cols()), S_(noise.cols())
    {
        const FlushSubnormals ftz;
        const Eigen::Index dim = points.rows();
        noise_norm_ = noise.colwise().squaredNorm().transpose();

        Eigen::MatrixXd dist2(M_, M_);
        for (Eigen::Index j = 0; j < M_; ++j) {
            dist2(j, j) = 0.0;
            for (Eigen::Index i = j + 1; i < M_; ++i) {
                double d = 0.0;
                for (Eigen::Index e = 0; e < dim; ++e) {
                    d += std::norm(points(e, i) - points(e, j));
                }
                dist2(i, j) = d;
                dist2(j, i) = d;
            }
        }
        gram_ = (-dist2.array()).exp().matrix();
        neg_dist2_ = -dist2;

        // a(s, j) = Re <Z_s, c_j>
        a_ = (noise.adjoint() * points).real();
        const Eigen::MatrixXd &a = a_;

        std::vector<Eigen::Index> fact;
        for (Eigen::Index s = 0; s < S_; ++s) {
            const double hi = a.row(s).maxCoeff();
            const double lo = a.row(s).minCoeff();
            if (2.0 * (hi - lo) <= kFactorizedSpan) {
                fact.push_back(s);
            } else {
                direct_.push_back(s);
            }
        }

        const auto F = static_cast<Eigen::Index>(fact.size());
        up_.resize(M_, F);
        down_.resize(M_, F);
        factorized_.resize(F);
        for (Eigen::Index f = 0; f < F; ++f) {
            const Eigen::Index s = fact[static_cast<std::size_t>(f)];
            factorized_(f) = s;
            const double centre = 0.5 * (a.row(s).maxCoeff() + a.row(s).minCoeff());
            for (Eigen::Index j = 0; j < M_; ++j) {
                const double t = 2.0 * (a(s, j) - centre);
                up_(j, f) = std::exp(t);
                down_(j, f) = std::exp(-t);
            }
        }

        if (!direct_.empty()) {
            double radius = 0.0;
            for (Eigen::Index s : direct_) {
                radius = std::max(radius, std::sqrt(noise_norm_(s)));
            }
            const double reach = radius + std::sqrt(radius * radius + kUnderflowExponent);
            const double reach2 = reach * reach;
            neighbours_.assign(static_cast<std::size_t>(M_), {});
            std::size_t pairs = 0;
            for (Eigen::Index i = 0; i < M_; ++i) {
                for (Eigen::Index j = 0; j < M_; ++j) {
                    if (dist2(i, j) <= reach2) {
                        neighbours_[static_cast<std::size_t>(i)].push_back(j);
                    }
                }
                pairs += neighbours_[static_cast<std::size_t>(i)].size();
            }
            dense_direct_ = static_cast<double>(pairs) > kSparseFraction * static_cast<double>(M_ * M_);
            if (dense_direct_) {
                neighbours_.clear();
            }
        }
    }

    [[nodiscard]] Eigen::Index inputs() const noexcept { return M_; }
    [[nodiscard]] Eigen::Index samples() const noexcept { return S_; }
    [[nodiscard]] std::size_t direct_samples() const noexcept { return direct_.size(); }

    /// M x S matrix of L(i, s) for the distribution p. The result lives in
    /// the kernel's workspace and is overwritten by the next call, so one
    /// instance must not be shared between threads.
    ///
    /// If `flow` is given it receives r_k = mean_s sum_i p_i w_ik(s) / sum_j p_j w_ij(s),
    /// with w_ij(s) the term weights above. Then sum_k p_k r_k = 1 exactly and
    /// log2(e) r_k is the derivative of sum_i p_i mean_s L(i, s) with respect
    /// to p_k through the mixture weights.
    const Eigen::MatrixXd &log2_mixture(const Eigen::VectorXd &p, Eigen::VectorXd *flow = nullptr) const
    {
        const FlushSubnormals ftz;
        constexpr double tiny = std::numeric_limits<double>::min();
        out_.resize(M_, S_);
        if (flow != nullptr) {
            flow->setZero(M_);
        }

        if (factorized_.size() > 0) {
            weighted_.resize(M_, factorized_.size());
            sums_.resize(M_, factorized_.size());
            weighted_.array() = up_.array().colwise() * p.array();
            sums_.noalias() = gram_ * weighted_;
            if (flow != nullptr) {
                // sum_i p_i G_ik up_k / sums_i, reusing `weighted_` as scratch.
                weighted_.array() = sums_.array().max(tiny).inverse().colwise() * p.array();
                ratio_.noalias() = gram_ * weighted_;
                *flow += (ratio_.array() * up_.array()).rowwise().sum().matrix();
            }
            sums_.array() = (sums_.array() * down_.array()).max(tiny).log() * (1.0 / std::numbers::ln2);
            if (direct_.empty()) {
                out_.swap(sums_);
            } else {
                for (Eigen::Index f = 0; f < factorized_.size(); ++f) {
                    out_.col(factorized_(f)) = sums_.col(f);
                }
            }
        }

        if (dense_direct_) {
            block_.resize(M_, M_);
            for (Eigen::Index s : direct_) {
                // w(i, j) = exp(-||c_i - c_j||^2 + 2 a_j - 2 a_i)
                block_.array() = ((neg_dist2_.array().rowwise() + 2.0 * a_.row(s).array()).colwise() -
                                  2.0 * a_.row(s).transpose().array())
                                     .exp();
                acc_.noalias() = block_ * p;
                acc_ = acc_.cwiseMax(tiny);
                out_.col(s) = acc_.array().log() * (1.0 / std::numbers::ln2);
                if (flow != nullptr) {
                    flow->noalias() += block_.transpose() * (p.array() / acc_.array()).matrix();
                }
            }
        } else {
            const Eigen::Index dim = points_.rows();
            Eigen::VectorXcd y(dim);
            for (Eigen::Index s : direct_) {
                const double zn = noise_norm_(s);
                for (Eigen::Index i = 0; i < M_; ++i) {
                    y = noise_.col(s) + points_.col(i);
                    const auto &nb = neighbours_[static_cast<std::size_t>(i)];
                    terms_.resize(nb.size());
                    double acc = 0.0;
                    for (std::size_t n = 0; n < nb.size(); ++n) {
                        const Eigen::Index j = nb[n];
                        double d = 0.0;
                        for (Eigen::Index e = 0; e < dim; ++e) {
                            d += std::norm(y(e) - points_(e, j));
                        }
                        terms_[n] = std::exp(zn - d);
                        acc += p(j) * terms_[n];
                    }
                    acc = std::max(acc, tiny);
                    out_(i, s) = std::log2(acc);
                    if (flow != nullptr && p(i) > 0.0) {
                        for (std::size_t n = 0; n < nb.size(); ++n) {
                            (*flow)(nb[n]) += p(i) * terms_[n] / acc;
                        }
                    }
                }
            }
        }
        if (flow != nullptr) {
            *flow /= static_cast<double>(S_);
        }
        return out_;
    }

private:
    Eigen::MatrixXcd points_;
    Eigen::MatrixXcd noise_;
    Eigen::Index M_;
    Eigen::Index S_;
    Eigen::VectorXd noise_norm_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd up_;
    Eigen::MatrixXd down_;
    Eigen::Matrix<Eigen::Index, Eigen::Dynamic, 1> factorized_;
    std::vector<Eigen::Index> direct_;
    std::vector<std::vector<Eigen::Index>> neighbours_;
    bool dense_direct_ = false;
    Eigen::MatrixXd a_;
    Eigen::MatrixXd neg_dist2_;
    mutable Eigen::MatrixXd block_;
    mutable Eigen::VectorXd acc_;
    mutable Eigen::MatrixXd weighted_;
    mutable Eigen::MatrixXd sums_;
    mutable Eigen::MatrixXd out_;
    mutable Eigen::MatrixXd ratio_;
    mutable std::vector<double> terms_;

};

} // namespace ris::detail

#endif // RIS_KERNEL_HPP
