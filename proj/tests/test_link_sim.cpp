// SPDX-License-Identifier: Apache-2.0
//
// scsce: structured compressive-sensing channel estimation for FDD massive MIMO
// Copyright (C) 2026 The scsce authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <scsce/link_sim.hpp>

#include "toy.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace scsce;
using Catch::Approx;

TEST_CASE("noiseless switch", "[link]")
{
    const auto t = toy::make(1);
    Rng rng(2);
    const auto b = measure(t.ch, t.S, noiseless, rng);
    CHECK(b.noise_var == 0.0);
    CHECK(b.y == t.y);
    CHECK(b.noise.isZero(0.0));
}

TEST_CASE("measurement snr audit", "[link]")
{
    ChannelSpec spec; // ITU-VA
    spec.M = 8;
    const auto S = assemble_sensing(make_pilot_config(4096, 64, 8, 3), spec.L);
    for (double snr : {0.0, 10.0, 30.0}) {
        Rng rng(derive_seed(5, static_cast<std::uint64_t>(snr)));
        double sig = 0.0, noise = 0.0;
        for (int t = 0; t < 1000; ++t) {
            const auto ch = generate_channel(spec, rng);
            const auto b = measure(ch, S, snr, rng);
            CHECK(b.noise_var == Approx(8.0 / std::pow(10.0, snr / 10.0)));
            sig += (S.psi() * ch.d).squaredNorm();
            noise += b.noise.squaredNorm();
        }
        CHECK(std::abs(10.0 * std::log10(sig / noise) - snr) <= 0.3);
    }
}

TEST_CASE("pure noise measurement", "[link]")
{
    const auto t = toy::make(2, {8, 2, 8, 2, 200, 64});
    Rng rng(7);
    const auto b = measure(CMatrix::Zero(16, 200), t.S, 10.0, rng);
    CHECK(b.y == b.noise);
    CHECK(b.y.squaredNorm() / static_cast<double>(b.y.size()) == Approx(b.noise_var).epsilon(0.05));
    CHECK_THROWS_AS(measure(CMatrix::Zero(15, 1), t.S, 10.0, rng), InvalidArgument);
}

TEST_CASE("linear interpolation between pilot symbols", "[link]")
{
    Rng rng(1);
    const CMatrix h1 = complex_gaussian_matrix(6, 1, rng), h3 = complex_gaussian_matrix(6, 1, rng);
    CHECK((interpolate_channels(h1, h3, 2, 2) - (h1 + h3) / 2.0).norm() < 1e-15);
    CHECK((interpolate_channels(h1, h3, 2, 5) - (4.0 * h1 + h3) / 5.0).norm() < 1e-15);
    for (int r = 2; r <= 5; ++r)
        CHECK((interpolate_channels(h1, h1, r, 5) - h1).norm() < 1e-15);
    CHECK_THROWS_AS(interpolate_channels(h1, h3, 1, 5), InvalidArgument);
    CHECK_THROWS_AS(interpolate_channels(h1, h3, 6, 5), InvalidArgument);
    CHECK_THROWS_AS(interpolate_channels(h1, CMatrix::Zero(5, 1), 2, 5), InvalidArgument);
}

TEST_CASE("group config", "[link]")
{
    CHECK_NOTHROW(GroupConfig{2, 32, 1}.validate(64));
    CHECK_THROWS_AS((GroupConfig{3, 21, 1}.validate(64)), InvalidArgument);
    CHECK_THROWS_AS((GroupConfig{2, 32, 0}.validate(64)), InvalidArgument);
}

namespace {

ChannelBlock array_channel(int M, int R, std::uint64_t seed, double doppler = 0.0)
{
    ChannelSpec spec;
    spec.L = 16;
    spec.M = M;
    spec.P = 3;
    spec.R = R;
    spec.kind = ProfileKind::uniform_random;
    spec.doppler_hz = doppler;
    Rng rng(seed);
    return generate_channel(spec, rng);
}

} // namespace

TEST_CASE("single group reproduces the plain pipeline", "[link]")
{
    const auto ch = array_channel(4, 2, 3);
    const std::vector<SensingMatrix> S{assemble_sensing(make_pilot_config(256, 32, 4, 9), 16)};
    EstimatorConfig est;
    est.window_R = 2;
    est.stop.p_th = 0.06;
    const std::vector<std::uint64_t> seeds{55};
    const auto g = estimate_grouped(ch, GroupConfig{1, 4, 1}, S, 20.0, est, seeds);

    Rng rng(55);
    const auto b = measure(ch, S[0], 20.0, rng);
    const auto r = assp(b.y, S[0], est.stop);
    CHECK(g.d_hat == r.d_hat);
    REQUIRE(g.runs.size() == 1);
    CHECK(g.runs[0].support == r.support);
}

TEST_CASE("identical groups give identical estimates", "[link]")
{
    const auto half = array_channel(4, 1, 8);
    ChannelBlock ch = half;
    ch.spec.M = 8;
    ch.d = CMatrix::Zero(16 * 8, 1);
    for (int l = 0; l < 16; ++l) {
        ch.d.middleRows(l * 8, 4) = half.d.middleRows(l * 4, 4);
        ch.d.middleRows(l * 8 + 4, 4) = half.d.middleRows(l * 4, 4);
    }
    const auto S = assemble_sensing(make_pilot_config(256, 32, 4, 1), 16);
    const std::vector<SensingMatrix> both{S, S};
    const std::vector<std::uint64_t> seeds{7, 7};
    const auto g = estimate_grouped(ch, GroupConfig{2, 4, 1}, both, 15.0, {}, seeds);
    const CMatrix a = group_rows(g.d_hat, 16, 8, 4, 0), b = group_rows(g.d_hat, 16, 8, 4, 1);
    CHECK(a == b);
    CHECK(g.runs[0].support == g.runs[1].support);
}

TEST_CASE("pilot sharing fills symbols between pilots", "[link]")
{
    const auto ch = array_channel(4, 8, 4, 200.0);
    const std::vector<SensingMatrix> S{assemble_sensing(make_pilot_config(256, 32, 4, 2), 16)};
    const std::vector<std::uint64_t> seeds{3};
    EstimatorConfig est;
    est.stop.p_th = 1e-6;
    const auto g = estimate_grouped(ch, GroupConfig{1, 4, 3, Interpolation::linear}, S, noiseless, est, seeds);
    // pilots at symbols 1, 4, 7 (0-based 0, 3, 6); symbol 8 holds symbol 7
    REQUIRE(g.runs.size() == 3);
    for (int c : {0, 3, 6})
        CHECK((g.d_hat.col(c) - ch.d.col(c)).norm() < 1e-8 * ch.d.col(c).norm());
    CHECK((g.d_hat.col(1) - (2.0 * g.d_hat.col(0) + g.d_hat.col(3)) / 3.0).norm() < 1e-12);
    CHECK((g.d_hat.col(5) - (g.d_hat.col(3) + 2.0 * g.d_hat.col(6)) / 3.0).norm() < 1e-12);
    CHECK(g.d_hat.col(7) == g.d_hat.col(6));

    const auto h = estimate_grouped(ch, GroupConfig{1, 4, 3, Interpolation::hold}, S, noiseless, est, seeds);
    CHECK(h.d_hat.col(1) == h.d_hat.col(0));
    CHECK(h.d_hat.col(2) == h.d_hat.col(0));
}

TEST_CASE("16-QAM mapping", "[link]")
{
    const double s = 1.0 / std::sqrt(10.0);
    // b0 b1 -> I, b2 b3 -> Q, Gray: 00 -3, 01 -1, 11 +1, 10 +3
    const double level[4] = {-3, -1, 3, 1};
    std::vector<std::uint8_t> bits;
    for (int v = 0; v < 16; ++v)
        for (int k = 3; k >= 0; --k)
            bits.push_back(static_cast<std::uint8_t>((v >> k) & 1));
    const CVector sym = qam16_mod(bits);
    REQUIRE(sym.size() == 16);
    double energy = 0.0;
    for (int v = 0; v < 16; ++v) {
        CHECK(std::abs(sym(v) - std::complex<double>(level[v >> 2], level[v & 3]) * s) < 1e-15);
        energy += std::norm(sym(v));
    }
    CHECK(energy / 16.0 == Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(sym(0) - std::complex<double>(-3, -3) * s) < 1e-15);
    CHECK(qam16_demod(sym) == bits);

    // neighbouring points differ in one bit
    for (int a = 0; a < 16; ++a)
        for (int b = a + 1; b < 16; ++b)
            if (std::abs(std::abs(sym(a) - sym(b)) - 2.0 * s) < 1e-12)
                CHECK(__builtin_popcount(static_cast<unsigned>(a ^ b)) == 1);

    const std::vector<std::uint8_t> odd{1, 0, 1};
    CHECK_THROWS_AS(qam16_mod(odd), InvalidArgument);
}

TEST_CASE("zero forcing", "[link]")
{
    Rng rng(3);
    for (int t = 0; t < 20; ++t) {
        const CMatrix H = complex_gaussian_matrix(8, 64, rng);
        const auto p = zf_precode(H);
        CHECK((H * p.w_raw - CMatrix::Identity(8, 8)).norm() < 1e-8);
        CHECK(p.w.norm() == Approx(1.0));
    }
    // unitary channel: effective channel diagonal
    const CMatrix Q = Eigen::HouseholderQR<CMatrix>(complex_gaussian_matrix(4, 4, rng)).householderQ();
    const auto p = zf_precode(Q);
    const CMatrix eff = Q * p.w;
    CHECK((eff - CMatrix(eff.diagonal().asDiagonal())).norm() < 1e-12);

    // power audit with unit-power symbols
    const CMatrix H = complex_gaussian_matrix(8, 32, rng);
    const auto q = zf_precode(H);
    double power = 0.0;
    std::vector<std::uint8_t> bits(32);
    std::bernoulli_distribution coin(0.5);
    for (int t = 0; t < 20000; ++t) {
        for (auto &b : bits)
            b = coin(rng);
        power += (q.w * qam16_mod(bits)).squaredNorm();
    }
    CHECK(power / 20000 == Approx(1.0).epsilon(0.02));

    CMatrix rank1(2, 4);
    rank1.row(0) = complex_gaussian_matrix(1, 4, rng);
    rank1.row(1) = 2.0 * rank1.row(0);
    CHECK_THROWS_AS(zf_precode(rank1), SingularSystem);
    CHECK_THROWS_AS(zf_precode(CMatrix::Zero(2, 4)), SingularSystem);
}

TEST_CASE("downlink bit error rate", "[link]")
{
    ChannelSpec spec;
    spec.M = 64;
    Rng rng(12);
    std::vector<CMatrix> truth, zeros, noisy;
    for (int k = 0; k < 8; ++k) {
        const auto ch = generate_channel(spec, rng);
        truth.push_back(cir_matrix(ch.d, spec.L, spec.M, 0));
        zeros.push_back(CMatrix::Zero(spec.M, spec.L));
        noisy.push_back(truth.back() + complex_gaussian_matrix(spec.M, spec.L, rng, 0.01) * 0.0);
        for (int l : ch.support)
            noisy.back().col(l - 1) += complex_gaussian_matrix(spec.M, 1, rng, 0.05);
    }
    BerOptions opt;
    for (int i = 0; i < 64; ++i)
        opt.subcarriers.push_back(1 + 64 * i);
    const LinkConfig link;
    const std::vector<double> snrs{5.0, 15.0, 30.0};
    Rng a(1), b(1), c(1);
    const auto perfect = ber_eval(truth, truth, link, snrs, a, opt);
    const auto est = ber_eval(noisy, truth, link, snrs, b, opt);
    const auto none = ber_eval(zeros, truth, link, snrs, c, opt);
    for (std::size_t i = 0; i < snrs.size(); ++i) {
        CHECK(perfect[i].bits >= 100000);
        CHECK(est[i].ber >= perfect[i].ber);
        CHECK(none[i].ber == Approx(0.5).margin(0.01));
    }
    CHECK(perfect[2].ber < 1e-3);
    CHECK(perfect[0].ber > perfect[1].ber);
}

TEST_CASE("frequency response of a single tap", "[link]")
{
    CMatrix cir = CMatrix::Zero(2, 8);
    cir(0, 0) = 1.0;
    cir(1, 2) = 2.0;
    const std::vector<int> sc{1, 2, 17};
    const CMatrix f = frequency_response(cir, sc, 64);
    const double pi = std::acos(-1.0);
    for (std::size_t i = 0; i < sc.size(); ++i) {
        CHECK(std::abs(f(0, static_cast<Index>(i)) - 1.0) < 1e-14);
        CHECK(std::abs(f(1, static_cast<Index>(i)) - 2.0 * std::polar(1.0, -2 * pi * (sc[i] - 1) * 2 / 64.0)) < 1e-13);
    }
}
