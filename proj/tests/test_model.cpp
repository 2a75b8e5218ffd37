// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 ris-rates contributors

#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "ris/model.hpp"

using namespace ris;

namespace {

Csi two_by_one()
{
    Eigen::VectorXcd g(2);
    g << 1.0, 1.0;
    Eigen::MatrixXcd H(1, 2);
    H << 1.0, 1.0;
    return Csi(g, H);
}

} // namespace

TEST(Rng, SameSeedSameStream)
{
    Rng a(99);
    Rng b(99);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(a.complex_normal(), b.complex_normal());
    }
}

TEST(Rng, DerivedSeedsAreDistinct)
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        seen.insert(derive_seed(5, s));
    }
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}

TEST(SampleCsi, ShapesAndDeterminism)
{
    const Csi c = sample_csi(7, 1, 1);
    EXPECT_EQ(c.N(), 1);
    EXPECT_EQ(c.K(), 1);
    EXPECT_TRUE(c.g().allFinite());
    EXPECT_TRUE(c.H().allFinite());

    const Csi a = sample_csi(3, 2, 3);
    const Csi b = sample_csi(3, 2, 3);
    EXPECT_EQ(a.g(), b.g());
    EXPECT_EQ(a.H(), b.H());
    EXPECT_EQ(a.H().rows(), 2);
    EXPECT_EQ(a.H().cols(), 3);
}

TEST(SampleCsi, SecondMoments)
{
    constexpr int n = 100000;
    double g2 = 0.0;
    double h2 = 0.0;
    double cross = 0.0;
    for (int s = 0; s < n; ++s) {
        const Csi c = sample_csi(static_cast<std::uint64_t>(s), 2, 3);
        g2 += c.g().squaredNorm();
        h2 += c.H().squaredNorm();
        cross += (c.g()(0) * std::conj(c.H()(0, 0))).real();
    }
    EXPECT_NEAR(g2 / n, 3.0, 0.05);
    EXPECT_NEAR(h2 / n, 6.0, 0.1);
    EXPECT_NEAR(cross / n, 0.0, 0.02);
}

TEST(Csi, RejectsBadShapes)
{
    EXPECT_THROW(Csi(Eigen::VectorXcd::Ones(2), Eigen::MatrixXcd::Ones(2, 3)), DimensionError);
    Eigen::VectorXcd g = Eigen::VectorXcd::Ones(2);
    g(1) = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    EXPECT_THROW(Csi(g, Eigen::MatrixXcd::Ones(1, 2)), DimensionError);
    EXPECT_THROW(sample_csi(1, 0, 2), std::invalid_argument);
}

TEST(PhaseSet, UniformGrid)
{
    EXPECT_EQ(make_phase_set(1).phases(), std::vector<double>{0.0});
    const auto two = make_phase_set(2).phases();
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two[0], 0.0);
    EXPECT_DOUBLE_EQ(two[1], std::numbers::pi);
    const auto four = make_phase_set(4).phases();
    ASSERT_EQ(four.size(), 4u);
    for (int a = 0; a < 4; ++a) {
        EXPECT_DOUBLE_EQ(four[static_cast<std::size_t>(a)], a * std::numbers::pi / 2);
    }
    EXPECT_THROW(make_phase_set(0), std::invalid_argument);
}

TEST(PhaseSet, QuarterTurnPhasorsAreExact)
{
    const RisPhaseSet ps(4);
    EXPECT_EQ(ps.phasor(0), cplx(1, 0));
    EXPECT_EQ(ps.phasor(1), cplx(0, 1));
    EXPECT_EQ(ps.phasor(2), cplx(-1, 0));
    EXPECT_EQ(ps.phasor(3), cplx(0, -1));
    EXPECT_EQ(RisPhaseSet(2).phasor(1), cplx(-1, 0));
}

TEST(Constellation, AskPoints)
{
    const double P = 3.7;
    const Constellation c4 = make_ask(4, P);
    const double beta = std::sqrt(P / 21.0);
    ASSERT_EQ(c4.size(), 4);
    for (int b = 0; b < 4; ++b) {
        EXPECT_NEAR(c4.points[static_cast<std::size_t>(b)].real(), (2 * b + 1) * beta, 1e-15);
        EXPECT_EQ(c4.points[static_cast<std::size_t>(b)].imag(), 0.0);
    }
    const Constellation c1 = make_ask(1, P);
    EXPECT_DOUBLE_EQ(c1.points[0].real(), std::sqrt(P));
    const Constellation c2 = make_ask(2, P);
    const double b2 = std::sqrt(P / 5.0);
    EXPECT_NEAR((b2 * b2 + 9 * b2 * b2) / 2, P, 1e-12 * P);
    EXPECT_NEAR(c2.points[1].real(), 3 * b2, 1e-15);
}

TEST(Constellation, PskPoints)
{
    const double P = 2.0;
    const double r = std::sqrt(P);
    const Constellation q = make_psk(4, P);
    EXPECT_EQ(q.points[0], cplx(r, 0));
    EXPECT_EQ(q.points[1], cplx(0, r));
    EXPECT_EQ(q.points[2], cplx(-r, 0));
    EXPECT_EQ(q.points[3], cplx(0, -r));
    EXPECT_EQ(make_psk(1, P).points[0], cplx(r, 0));
    const Constellation e = make_psk(8, P);
    for (int b = 0; b < 8; ++b) {
        EXPECT_NEAR(std::abs(e.points[static_cast<std::size_t>(b)]), r, 1e-15);
        const double ang = std::arg(e.points[static_cast<std::size_t>((b + 1) % 8)] /
                                    e.points[static_cast<std::size_t>(b)]);
        EXPECT_NEAR(ang, std::numbers::pi / 4, 1e-14);
    }
}

TEST(Constellation, AveragePowerAndDistinctPoints)
{
    for (auto kind : {ConstellationKind::ASK, ConstellationKind::PSK}) {
        for (int B : {1, 2, 3, 4, 8, 16}) {
            for (double P : {1e-2, 1.0, 10.0, 1e4}) {
                const Constellation c = make_constellation(kind, B, P);
                double s = 0.0;
                for (const auto &x : c.points) {
                    s += std::norm(x);
                }
                EXPECT_NEAR(s / B, P, 1e-12 * P);
                EXPECT_NEAR(c.power_ratio(), 1.0, 1e-12);
                for (int i = 0; i < B; ++i) {
                    for (int j = i + 1; j < B; ++j) {
                        EXPECT_GT(std::abs(c.points[static_cast<std::size_t>(i)] -
                                           c.points[static_cast<std::size_t>(j)]),
                                  0.0);
                    }
                }
            }
        }
    }
    EXPECT_THROW(make_ask(0, 1.0), std::invalid_argument);
    EXPECT_THROW(make_psk(2, 0.0), std::invalid_argument);
}

TEST(EffectiveGain, ZeroPhasesGiveHg)
{
    const Csi c = sample_csi(11, 3, 4);
    const RisPhaseSet ps(4);
    const Eigen::VectorXcd v = effective_gain(c, RisConfig{{0, 0, 0, 0}}, ps);
    const Eigen::VectorXcd hg = c.H() * c.g();
    EXPECT_EQ(v, hg);
}

TEST(EffectiveGain, SingleElementNormIsPhaseFree)
{
    const Csi c = sample_csi(5, 2, 1);
    const RisPhaseSet ps(4);
    const double n0 = effective_gain(c, RisConfig{{0}}, ps).norm();
    for (int a = 1; a < 4; ++a) {
        EXPECT_NEAR(effective_gain(c, RisConfig{{a}}, ps).norm(), n0, 1e-14);
    }
}

TEST(EffectiveGain, HandComputed)
{
    const Csi c = two_by_one();
    const RisPhaseSet ps(2);
    EXPECT_EQ(effective_gain(c, RisConfig{{0, 1}}, ps)(0), cplx(0, 0));
    EXPECT_EQ(effective_gain(c, RisConfig{{0, 0}}, ps)(0), cplx(2, 0));
    EXPECT_THROW(effective_gain(c, RisConfig{{0}}, ps), DimensionError);
    EXPECT_THROW(effective_gain(c, RisConfig{{0, 2}}, ps), DimensionError);
}

TEST(SnrGamma, HandComputedAndOffsetInvariant)
{
    const Csi c = two_by_one();
    const RisPhaseSet ps(2);
    EXPECT_EQ(snr_gamma(c, RisConfig{{0, 0}}, ps, 2.5), 10.0);
    EXPECT_EQ(snr_gamma(c, RisConfig{{0, 1}}, ps, 2.5), 0.0);

    const Csi r = sample_csi(21, 2, 3);
    const RisPhaseSet p4(4);
    for (const auto &cfg : enumerate_configs(p4, 3)) {
        for (int off = 1; off < 4; ++off) {
            RisConfig shifted = cfg;
            for (int &t : shifted.theta) {
                t = (t + off) % 4;
            }
            EXPECT_NEAR(snr_gamma(r, shifted, p4, 3.0), snr_gamma(r, cfg, p4, 3.0), 1e-12);
        }
    }
    EXPECT_THROW(snr_gamma(c, RisConfig{{0, 0}}, ps, 0.0), std::invalid_argument);
}

TEST(Enumerate, ConfigsLexicographic)
{
    const auto c = enumerate_configs(RisPhaseSet(2), 2);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0].theta, (std::vector<int>{0, 0}));
    EXPECT_EQ(c[1].theta, (std::vector<int>{0, 1}));
    EXPECT_EQ(c[2].theta, (std::vector<int>{1, 0}));
    EXPECT_EQ(c[3].theta, (std::vector<int>{1, 1}));

    const auto one = enumerate_configs(RisPhaseSet(1), 5);
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].theta, std::vector<int>(5, 0));
    EXPECT_EQ(enumerate_configs(RisPhaseSet(2), 3).size(), 8u);
}

TEST(Enumerate, BlocksCountAndDistinct)
{
    EXPECT_EQ(enumerate_blocks(make_ask(2, 1.0), 2).size(), 4u);
    const auto b = enumerate_blocks(make_psk(4, 1.0), 2);
    EXPECT_EQ(b.size(), 16u);
    std::set<std::vector<int>> distinct;
    for (const auto &blk : b) {
        distinct.insert(blk.x);
    }
    EXPECT_EQ(distinct.size(), 16u);
    const auto single = enumerate_blocks(make_ask(3, 1.0), 1);
    ASSERT_EQ(single.size(), 3u);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(single[static_cast<std::size_t>(i)].x, std::vector<int>{i});
    }
}

TEST(Enumerate, CapExceeded)
{
    EXPECT_THROW(enumerate_configs(RisPhaseSet(2), 21), CapExceededError);
    EXPECT_THROW(enumerate_blocks(make_ask(4, 1.0), 3, 63), CapExceededError);
    EXPECT_NO_THROW(enumerate_blocks(make_ask(4, 1.0), 3, 64));
    try {
        enumerate_configs(RisPhaseSet(4), 11);
        FAIL();
    } catch (const CapExceededError &e) {
        EXPECT_NE(std::string(e.what()).find("alphabet too large"), std::string::npos);
    }
}

TEST(NoiseBatch, RegenerationIsBitIdentical)
{
    const NoiseBatch a(42, 500, 2, 3);
    const NoiseBatch b(42, 500, 2, 3);
    EXPECT_EQ(a.data(), b.data());
    const NoiseBatch c(43, 500, 2, 3);
    EXPECT_NE(a.data(), c.data());
}

TEST(NoiseBatch, UnitVarianceCircular)
{
    const NoiseBatch z(8, 200000, 1, 1);
    double re2 = 0.0;
    double im2 = 0.0;
    double reim = 0.0;
    for (Eigen::Index s = 0; s < z.data().cols(); ++s) {
        const cplx v = z.data()(0, s);
        re2 += v.real() * v.real();
        im2 += v.imag() * v.imag();
        reim += v.real() * v.imag();
    }
    const double n = static_cast<double>(z.samples());
    EXPECT_NEAR(re2 / n, 0.5, 0.01);
    EXPECT_NEAR(im2 / n, 0.5, 0.01);
    EXPECT_NEAR(reim / n, 0.0, 0.01);
}

TEST(NoiseBatch, ColumnSlices)
{
    const NoiseBatch z(3, 10, 2, 3);
    const NoiseBatch c1 = z.column(1);
    EXPECT_EQ(c1.rows(), 2);
    EXPECT_EQ(c1.cols(), 1);
    EXPECT_EQ(c1.samples(), 10);
    for (int s = 0; s < 10; ++s) {
        EXPECT_EQ(c1.data()(0, s), z.data()(2, s));
        EXPECT_EQ(c1.data()(1, s), z.data()(3, s));
    }
    EXPECT_THROW(z.column(3), DimensionError);
    EXPECT_EQ(z.head(4).samples(), 4);
    EXPECT_EQ(z.head(4).data(), z.data().leftCols(4));
}
