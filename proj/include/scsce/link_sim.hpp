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

// Pilot measurement synthesis, the space-time adaptive pilot scheme
// (antenna grouping, pilot sharing, interpolation) and ZF-precoded 16-QAM
// downlink evaluation.

#ifndef SCSCE_LINK_SIM_HPP
#define SCSCE_LINK_SIM_HPP

#include "channel_model.hpp"
#include "pilots.hpp"
#include "recovery.hpp"
#include "types.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>

namespace scsce {

// ----- Measurement ------------------------------------------------------------

struct MeasurementBatch {
    CMatrix y;        // Np x R
    CMatrix noise;    // W, kept for diagnostics
    double noise_var; // per complex entry
    double snr_db;
};

inline constexpr double noiseless = std::numeric_limits<double>::infinity();

/// Y = Psi D + W. The noise variance is anchored to the analytic
/// E||Psi D||_F^2 = Np R M of a unit-energy-per-antenna channel, so sigma^2 = M / SNR.
/// snr_db = +inf gives W = 0.
inline MeasurementBatch measure(const CMatrix &d, const SensingMatrix &S, double snr_db, Rng &rng)
{
    if (d.rows() != S.psi().cols())
        throw InvalidArgument("channel has " + std::to_string(d.rows()) + " rows, sensing matrix expects " +
                              std::to_string(S.psi().cols()));
    MeasurementBatch out;
    out.snr_db = snr_db;
    out.y = S.psi() * d;
    if (std::isinf(snr_db) && snr_db > 0) {
        out.noise_var = 0.0;
        out.noise = CMatrix::Zero(out.y.rows(), out.y.cols());
        return out;
    }
    out.noise_var = static_cast<double>(S.M()) / db_to_linear(snr_db);
    out.noise = complex_gaussian_matrix(out.y.rows(), out.y.cols(), rng, out.noise_var);
    out.y += out.noise;
    return out;
}

inline MeasurementBatch measure(const ChannelBlock &ch, const SensingMatrix &S, double snr_db, Rng &rng)
{
    return measure(ch.d, S, snr_db, rng);
}

// ----- Space-time adaptive pilots ---------------------------------------------

enum class Interpolation { linear, hold };

inline std::string to_string(Interpolation i) { return i == Interpolation::linear ? "linear" : "hold"; }

struct GroupConfig {
    int N_G = 2;
    int M_G = 32;
    int f_p = 1; // pilot-sharing period in OFDM symbols
    Interpolation interpolation = Interpolation::linear;

    void validate(int M) const
    {
        if (N_G < 1 || M_G < 1 || N_G * M_G != M)
            throw InvalidArgument("antenna grouping must satisfy N_G * M_G = M (N_G=" + std::to_string(N_G) +
                                  ", M_G=" + std::to_string(M_G) + ", M=" + std::to_string(M) + ")");
        if (f_p < 1)
            throw InvalidArgument("pilot-sharing period f_p must be >= 1");
    }
};

/// Linear interpolation between the estimates at the pilot symbols 1 and
/// f_p + 1: h_r = [(f_p + 1 - r) h_1 + (r - 1) h_{f_p+1}] / f_p for 1 < r <= f_p.
inline CMatrix interpolate_channels(const CMatrix &h_first, const CMatrix &h_last, int r, int f_p)
{
    if (f_p < 1 || r <= 1 || r > f_p)
        throw InvalidArgument("interpolation index r=" + std::to_string(r) + " outside (1, f_p=" + std::to_string(f_p) + "]");
    if (h_first.rows() != h_last.rows() || h_first.cols() != h_last.cols())
        throw InvalidArgument("interpolation endpoints differ in shape");
    return (static_cast<double>(f_p + 1 - r) * h_first + static_cast<double>(r - 1) * h_last) / static_cast<double>(f_p);
}

enum class Algorithm { assp, oracle_assp, oracle_ls, asp };

inline std::string to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::assp: return "assp";
    case Algorithm::oracle_assp: return "oracle_assp";
    case Algorithm::oracle_ls: return "oracle_ls";
    case Algorithm::asp: return "asp";
    }
    return "unknown";
}

inline Algorithm algorithm_from_string(const std::string &s)
{
    if (s == "assp") return Algorithm::assp;
    if (s == "oracle_assp") return Algorithm::oracle_assp;
    if (s == "oracle_ls") return Algorithm::oracle_ls;
    if (s == "asp") return Algorithm::asp;
    throw InvalidArgument("unknown algorithm '" + s + "' (expected assp | oracle_assp | oracle_ls | asp)");
}

struct EstimatorConfig {
    Algorithm algorithm = Algorithm::assp;
    StopConfig stop;
    int window_R = 1; // symbols processed jointly when every symbol carries pilots
};

/// Rows of the full-array D that belong to antenna group g.
inline CMatrix group_rows(const CMatrix &d_full, int L, int M, int M_G, int g)
{
    CMatrix out(static_cast<Index>(L) * M_G, d_full.cols());
    for (int l = 0; l < L; ++l)
        out.middleRows(static_cast<Index>(l) * M_G, M_G) =
            d_full.middleRows(static_cast<Index>(l) * M + static_cast<Index>(g) * M_G, M_G);
    return out;
}

inline void set_group_rows(CMatrix &d_full, const CMatrix &d_group, int L, int M, int M_G, int g)
{
    for (int l = 0; l < L; ++l)
        d_full.middleRows(static_cast<Index>(l) * M + static_cast<Index>(g) * M_G, M_G) =
            d_group.middleRows(static_cast<Index>(l) * M_G, M_G);
}

/// One estimator call on a measurement window.
inline RecoveryResult run_estimator(const MeasurementBatch &batch, const SensingMatrix &S, const EstimatorConfig &est,
                                    const Support &true_support, int P)
{
    switch (est.algorithm) {
    case Algorithm::assp: return assp(batch.y, S, est.stop);
    case Algorithm::oracle_assp: return oracle_assp(batch.y, S, P, est.stop.k_max);
    case Algorithm::asp: return asp(batch.y, S, est.stop);
    case Algorithm::oracle_ls: {
        RecoveryResult r;
        r.d_hat = oracle_ls(batch.y, S, true_support);
        r.support = true_support;
        r.s_hat = static_cast<int>(true_support.size());
        return r;
    }
    }
    throw InvalidArgument("unsupported algorithm");
}

struct GroupedEstimate {
    CMatrix d_hat;                    // ML x R_total, full-array ordering
    std::vector<RecoveryResult> runs; // group-major, one per estimated window
    std::vector<double> noise_var;    // per group
};

/// Per-group measurement + recovery on disjoint pilot resources, merged into a
/// full-array estimate. With f_p > 1 only symbols 1, f_p + 1, 2 f_p + 1, ...
/// carry pilots and are estimated one at a time; the symbols between them are
/// interpolated, trailing ones hold the last estimate. Group g draws its noise
/// from Rng(group_seeds[g]).
inline GroupedEstimate estimate_grouped(const ChannelBlock &ch, const GroupConfig &group,
                                        std::span<const SensingMatrix> sensing, double snr_db,
                                        const EstimatorConfig &est, std::span<const std::uint64_t> group_seeds)
{
    const auto &spec = ch.spec;
    group.validate(spec.M);
    if (static_cast<int>(sensing.size()) != group.N_G || static_cast<int>(group_seeds.size()) != group.N_G)
        throw InvalidArgument("need one sensing matrix and one seed per antenna group");
    for (const auto &S : sensing)
        if (S.M() != group.M_G || S.L() != spec.L)
            throw InvalidArgument("group sensing matrix must cover M_G antennas and L taps");

    const int R_total = static_cast<int>(ch.d.cols());
    GroupedEstimate out;
    out.d_hat = CMatrix::Zero(ch.d.rows(), R_total);

    for (int g = 0; g < group.N_G; ++g) {
        Rng rng(group_seeds[static_cast<std::size_t>(g)]);
        const auto &S = sensing[static_cast<std::size_t>(g)];
        const CMatrix d_g = group_rows(ch.d, spec.L, spec.M, group.M_G, g);
        CMatrix est_g = CMatrix::Zero(d_g.rows(), R_total);
        double nv = 0.0;

        auto estimate_window = [&](int first, int count) {
            const auto batch = measure(CMatrix(d_g.middleCols(first, count)), S, snr_db, rng);
            nv = batch.noise_var;
            auto run = run_estimator(batch, S, est, ch.support, spec.P);
            est_g.middleCols(first, count) = run.d_hat;
            out.runs.push_back(std::move(run));
        };

        if (group.f_p == 1) {
            const int w = std::max(1, est.window_R);
            for (int first = 0; first < R_total; first += w)
                estimate_window(first, std::min(w, R_total - first));
        } else {
            int prev = -1;
            for (int c = 0; c < R_total; c += group.f_p) {
                estimate_window(c, 1);
                if (prev >= 0)
                    for (int r = 2; r <= group.f_p; ++r)
                        est_g.col(prev + r - 1) =
                            group.interpolation == Interpolation::linear
                                ? CVector(interpolate_channels(est_g.col(prev), est_g.col(c), r, group.f_p))
                                : CVector(est_g.col(prev));
                prev = c;
            }
            for (int r = prev + 1; r < R_total; ++r)
                est_g.col(r) = est_g.col(prev);
        }
        set_group_rows(out.d_hat, est_g, spec.L, spec.M, group.M_G, g);
        out.noise_var.push_back(nv);
    }
    return out;
}

// ----- 16-QAM -----------------------------------------------------------------

/// Gray-mapped square 16-QAM, unit average energy. Bits b0 b1 pick the
/// in-phase level and b2 b3 the quadrature level:
///   00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3  (scaled by 1/sqrt(10)).
inline const std::array<double, 4> &qam16_levels()
{
    static const std::array<double, 4> lv{-3.0, -1.0, 3.0, 1.0}; // indexed by the 2-bit value b_hi b_lo
    return lv;
}

inline CVector qam16_mod(std::span<const std::uint8_t> bits)
{
    if (bits.size() % 4 != 0)
        throw InvalidArgument("16-QAM needs a bit count that is a multiple of 4 (got " + std::to_string(bits.size()) + ")");
    const double scale = 1.0 / std::sqrt(10.0);
    const auto &lv = qam16_levels();
    CVector out(static_cast<Index>(bits.size() / 4));
    for (Index i = 0; i < out.size(); ++i) {
        const auto *b = &bits[static_cast<std::size_t>(4 * i)];
        const double re = lv[static_cast<std::size_t>((b[0] & 1) << 1 | (b[1] & 1))];
        const double im = lv[static_cast<std::size_t>((b[2] & 1) << 1 | (b[3] & 1))];
        out(i) = cdouble(re, im) * scale;
    }
    return out;
}

namespace detail {

/// Nearest level index on one axis, returned as its 2-bit Gray label.
inline unsigned qam16_slice(double x)
{
    const double v = x * std::sqrt(10.0);
    if (v < -2.0) return 0b00;
    if (v < 0.0) return 0b01;
    if (v < 2.0) return 0b11;
    return 0b10;
}

} // namespace detail

/// Minimum-distance demodulation (per-axis slicing is exact for the square grid).
inline std::vector<std::uint8_t> qam16_demod(const CVector &symbols)
{
    std::vector<std::uint8_t> bits;
    bits.reserve(static_cast<std::size_t>(symbols.size()) * 4);
    for (Index i = 0; i < symbols.size(); ++i) {
        const unsigned re = detail::qam16_slice(symbols(i).real());
        const unsigned im = detail::qam16_slice(symbols(i).imag());
        bits.push_back(static_cast<std::uint8_t>(re >> 1));
        bits.push_back(static_cast<std::uint8_t>(re & 1));
        bits.push_back(static_cast<std::uint8_t>(im >> 1));
        bits.push_back(static_cast<std::uint8_t>(im & 1));
    }
    return bits;
}

// ----- Zero-forcing -------------------------------------------------------------

struct ZfPrecoder {
    CMatrix w_raw; // H^H (H H^H)^{-1}, so H w_raw = I
    CMatrix w;     // w_raw / ||w_raw||_F: unit total power for unit-power symbols
    double scale;  // ||w_raw||_F; receivers multiply by it to undo the normalization
};

/// Throws SingularSystem when H (K x M) does not have full row rank.
inline ZfPrecoder zf_precode(const CMatrix &H)
{
    if (H.rows() > H.cols())
        throw InvalidArgument("zero-forcing needs K <= M");
    const CMatrix gram = H * H.adjoint();
    Eigen::LDLT<CMatrix> ldlt(gram);
    const auto diag = ldlt.vectorD();
    const double hi = diag.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(hi > 0.0) || diag.cwiseAbs().minCoeff() <= hi * 1e-12)
        throw SingularSystem("channel matrix is rank deficient", {});
    ZfPrecoder p;
    p.w_raw = H.adjoint() * ldlt.solve(CMatrix::Identity(H.rows(), H.rows()));
    p.scale = p.w_raw.norm();
    p.w = p.w_raw / p.scale;
    return p;
}

struct LinkConfig {
    int K = 8;
    std::string constellation = "qam16";
    std::string precoder = "zero-forcing";

    void validate(int M) const
    {
        if (K < 1 || K > M)
            throw InvalidArgument("user count K must satisfy 1 <= K <= M");
        if (constellation != "qam16")
            throw InvalidArgument("only qam16 is supported");
        if (precoder != "zero-forcing")
            throw InvalidArgument("only zero-forcing precoding is supported");
    }
};

/// Frequency response (M x subcarriers) of per-antenna CIRs (M x L) at
/// 1-based subcarrier indices.
inline CMatrix frequency_response(const CMatrix &cir, std::span<const int> subcarriers, int N)
{
    CMatrix dft(cir.cols(), static_cast<Index>(subcarriers.size()));
    for (Index l = 0; l < cir.cols(); ++l)
        for (std::size_t i = 0; i < subcarriers.size(); ++i) {
            const long e = (static_cast<long>(subcarriers[i] - 1) * l) % N;
            dft(l, static_cast<Index>(i)) = std::polar(1.0, -two_pi * static_cast<double>(e) / N);
        }
    return cir * dft;
}

/// Per-antenna CIR matrix (M x L) of symbol r from an ML x R equivalent matrix.
inline CMatrix cir_matrix(const CMatrix &d, int L, int M, int r)
{
    CMatrix out(M, L);
    for (int l = 0; l < L; ++l)
        out.col(l) = d.block(static_cast<Index>(l) * M, r, M, 1);
    return out;
}

struct BerOptions {
    int N = 4096;
    std::vector<int> subcarriers; // 1-based data subcarriers
    long min_bits = 100000;
};

struct BerPoint {
    double snr_db;
    double ber;
    long bits;
};

/// Downlink BER: precode with the estimated channels, propagate through the
/// true ones plus CN(0, 1/SNR) noise, demodulate. Users know the precoder
/// scale. A singular estimate means the BS transmits nothing for that
/// subcarrier, so the users decide on noise alone.
inline std::vector<BerPoint> ber_eval(std::span<const CMatrix> est_cir, std::span<const CMatrix> true_cir,
                                      const LinkConfig &link, std::span<const double> snr_db, Rng &rng,
                                      const BerOptions &opt)
{
    if (est_cir.size() != true_cir.size() || static_cast<int>(est_cir.size()) != link.K)
        throw InvalidArgument("need one estimated and one true CIR matrix per user");
    if (opt.subcarriers.empty())
        throw InvalidArgument("no data subcarriers given");
    const Index M = true_cir[0].rows();
    link.validate(static_cast<int>(M));
    const Index nsc = static_cast<Index>(opt.subcarriers.size());

    std::vector<CMatrix> h_est(static_cast<std::size_t>(nsc), CMatrix(link.K, M));
    std::vector<CMatrix> h_true(static_cast<std::size_t>(nsc), CMatrix(link.K, M));
    for (int k = 0; k < link.K; ++k) {
        const CMatrix fe = frequency_response(est_cir[static_cast<std::size_t>(k)], opt.subcarriers, opt.N);
        const CMatrix ft = frequency_response(true_cir[static_cast<std::size_t>(k)], opt.subcarriers, opt.N);
        for (Index i = 0; i < nsc; ++i) {
            h_est[static_cast<std::size_t>(i)].row(k) = fe.col(i).transpose();
            h_true[static_cast<std::size_t>(i)].row(k) = ft.col(i).transpose();
        }
    }
    std::vector<std::optional<ZfPrecoder>> pre(static_cast<std::size_t>(nsc));
    for (Index i = 0; i < nsc; ++i) {
        try {
            pre[static_cast<std::size_t>(i)] = zf_precode(h_est[static_cast<std::size_t>(i)]);
        } catch (const SingularSystem &) {
        }
    }

    std::vector<BerPoint> out;
    std::bernoulli_distribution coin(0.5);
    for (double snr : snr_db) {
        const double nv = 1.0 / db_to_linear(snr);
        long errors = 0, bits = 0;
        while (bits < opt.min_bits) {
            for (Index i = 0; i < nsc; ++i) {
                std::vector<std::uint8_t> tx(static_cast<std::size_t>(4 * link.K));
                for (auto &b : tx)
                    b = coin(rng) ? 1 : 0;
                const CVector s = qam16_mod(tx);
                const auto &p = pre[static_cast<std::size_t>(i)];
                CVector noise(link.K);
                for (Index k = 0; k < link.K; ++k)
                    noise(k) = complex_gaussian(rng, nv);
                CVector rx;
                if (p) {
                    rx = (h_true[static_cast<std::size_t>(i)] * (p->w * s) + noise) * p->scale;
                } else {
                    rx = noise;
                }
                const auto dec = qam16_demod(rx);
                for (std::size_t b = 0; b < tx.size(); ++b)
                    errors += dec[b] != tx[b];
                bits += static_cast<long>(tx.size());
            }
        }
        out.push_back({snr, static_cast<double>(errors) / static_cast<double>(bits), bits});
    }
    return out;
}

} // namespace scsce

#endif // SCSCE_LINK_SIM_HPP
