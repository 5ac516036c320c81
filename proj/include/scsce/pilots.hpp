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

// Non-orthogonal pilot design (uniformly spaced subcarriers, i.i.d. random
// phases) and the sensing operators built from it.
//
// Column ordering: Psi = [Psi_1 ... Psi_L] with Psi_l = [psi_{1,l} ... psi_{M,l}],
// so column (m, l) sits at index (l-1)M + (m-1). Phi = [Phi_1 ... Phi_M] keeps
// the per-antenna order, column (m, l) at (m-1)L + (l-1).

#ifndef SCSCE_PILOTS_HPP
#define SCSCE_PILOTS_HPP

#include "types.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace scsce {

enum class Placement { uniform, random };

inline std::string to_string(Placement p) { return p == Placement::uniform ? "uniform" : "random"; }

inline Placement placement_from_string(const std::string &s)
{
    if (s == "uniform")
        return Placement::uniform;
    if (s == "random")
        return Placement::random;
    throw InvalidArgument("unknown pilot placement '" + s + "' (expected uniform | random)");
}

/// xi = {I0 + (k-1) floor(N/Np) : k = 1..Np}, 1-based.
inline Support uniform_placement(int N, int Np, int I0)
{
    if (Np < 1 || Np > N)
        throw InvalidArgument("pilot count Np=" + std::to_string(Np) + " outside [1, N=" + std::to_string(N) + "]");
    const int interval = N / Np;
    if (I0 < 1 || I0 > interval)
        throw InvalidArgument("first pilot index I0=" + std::to_string(I0) + " outside [1, floor(N/Np)=" +
                              std::to_string(interval) + "]");
    Support xi(static_cast<std::size_t>(Np));
    for (int k = 0; k < Np; ++k)
        xi[static_cast<std::size_t>(k)] = I0 + k * interval;
    return xi;
}

/// Np distinct subcarriers drawn uniformly from {1..N}; `slot` selects the
/// slot-th disjoint slice of one shared random permutation so that several
/// antenna groups drawing from the same rng state never collide.
inline Support random_placement(int N, int Np, Rng &rng, int slot = 0)
{
    if (Np < 1 || static_cast<long>(Np) * (slot + 1) > N)
        throw InvalidArgument("random placement needs (slot+1)*Np <= N");
    Support all(static_cast<std::size_t>(N));
    std::iota(all.begin(), all.end(), 1);
    std::shuffle(all.begin(), all.end(), rng);
    Support xi(all.begin() + static_cast<long>(slot) * Np, all.begin() + static_cast<long>(slot + 1) * Np);
    std::sort(xi.begin(), xi.end());
    return xi;
}

/// Np x M matrix of i.i.d. U[0, 2pi) phases.
inline RMatrix random_phases(int Np, int M, Rng &rng)
{
    if (Np < 1 || M < 1)
        throw InvalidArgument("random_phases needs Np, M >= 1");
    std::uniform_real_distribution<double> u(0.0, two_pi);
    RMatrix theta(Np, M);
    for (Index m = 0; m < M; ++m)
        for (Index k = 0; k < Np; ++k) {
            double v = u(rng);
            theta(k, m) = v >= two_pi ? 0.0 : v;
        }
    return theta;
}

struct PilotConfig {
    int N = 4096;
    int Np = 390;
    int I0 = 1;
    int M = 32;
    std::uint64_t seed = 0;
    Placement placement = Placement::uniform;
    Support xi;
    RMatrix theta; // Np x M

    double occupation() const { return static_cast<double>(Np) / N; }
};

/// Builds xi and theta deterministically from the seed. Phases and (random)
/// placement come from separate streams of the seed.
inline PilotConfig make_pilot_config(int N, int Np, int M, std::uint64_t seed, int I0 = 1,
                                     Placement placement = Placement::uniform, int slot = 0)
{
    PilotConfig cfg{N, Np, I0, M, seed, placement, {}, {}};
    if (placement == Placement::uniform) {
        cfg.xi = uniform_placement(N, Np, I0);
    } else {
        Rng prng(derive_seed(seed, 0x706c6163ULL)); // shared by all slots
        cfg.xi = random_placement(N, Np, prng, slot);
    }
    Rng trng(derive_seed(seed, 0x7068617365ULL, slot));
    cfg.theta = random_phases(Np, M, trng);
    return cfg;
}

// Only the generating parameters are serialized; phases are rebuilt from the seed.
inline nlohmann::json to_json(const PilotConfig &cfg, int slot = 0)
{
    nlohmann::json j{{"N", cfg.N}, {"Np", cfg.Np}, {"I0", cfg.I0}, {"seed", cfg.seed}, {"M", cfg.M}};
    if (cfg.placement != Placement::uniform) {
        j["placement"] = to_string(cfg.placement);
        j["slot"] = slot;
    }
    return j;
}

inline PilotConfig pilot_config_from_json(const nlohmann::json &j)
{
    return make_pilot_config(j.at("N").get<int>(), j.at("Np").get<int>(), j.at("M").get<int>(),
                             j.at("seed").get<std::uint64_t>(), j.value("I0", 1),
                             placement_from_string(j.value("placement", std::string("uniform"))),
                             j.value("slot", 0));
}

class SensingMatrix {
public:
    SensingMatrix() = default;
    SensingMatrix(CMatrix psi, int L, int M, int N) : psi_(std::move(psi)), L_(L), M_(M), N_(N) {}

    const CMatrix &psi() const noexcept { return psi_; }
    int L() const noexcept { return L_; }
    int M() const noexcept { return M_; }
    int N() const noexcept { return N_; }
    int Np() const noexcept { return static_cast<int>(psi_.rows()); }
    double pilot_occupation() const noexcept { return static_cast<double>(Np()) / N_; }

    /// Psi_l, Np x M (l is 1-based).
    auto block(int l) const { return psi_.middleCols(static_cast<Index>(l - 1) * M_, M_); }

    Index psi_column(int m, int l) const noexcept { return static_cast<Index>(l - 1) * M_ + (m - 1); }
    Index phi_column(int m, int l) const noexcept { return static_cast<Index>(m - 1) * L_ + (l - 1); }

    /// Unrearranged Phi = [Phi_1 ... Phi_M].
    CMatrix phi() const
    {
        CMatrix out(psi_.rows(), psi_.cols());
        for (int m = 1; m <= M_; ++m)
            for (int l = 1; l <= L_; ++l)
                out.col(phi_column(m, l)) = psi_.col(psi_column(m, l));
        return out;
    }

    /// Stacked per-antenna CIRs (Phi order) -> equivalent CIR matrix (Psi order).
    CMatrix to_psi_order(const CMatrix &h) const
    {
        CMatrix d(h.rows(), h.cols());
        for (int m = 1; m <= M_; ++m)
            for (int l = 1; l <= L_; ++l)
                d.row(psi_column(m, l)) = h.row(phi_column(m, l));
        return d;
    }

    CMatrix to_phi_order(const CMatrix &d) const
    {
        CMatrix h(d.rows(), d.cols());
        for (int m = 1; m <= M_; ++m)
            for (int l = 1; l <= L_; ++l)
                h.row(phi_column(m, l)) = d.row(psi_column(m, l));
        return h;
    }

    /// Psi restricted to the blocks of a (sorted) support.
    CMatrix columns(const Support &support) const
    {
        CMatrix out(psi_.rows(), static_cast<Index>(support.size()) * M_);
        for (std::size_t i = 0; i < support.size(); ++i)
            out.middleCols(static_cast<Index>(i) * M_, M_) = block(support[i]);
        return out;
    }

private:
    CMatrix psi_;
    int L_ = 0;
    int M_ = 0;
    int N_ = 0;
};

/// Psi_l column m = e^{j theta_{.,m}} o [e^{-j 2 pi (xi(k)-1)(l-1) / N}]_k.
inline SensingMatrix assemble_sensing(const PilotConfig &cfg, int L)
{
    if (L < 1 || L > cfg.N)
        throw InvalidArgument("channel length L=" + std::to_string(L) + " outside [1, N=" + std::to_string(cfg.N) + "]");
    if (cfg.theta.rows() != cfg.Np || cfg.theta.cols() != cfg.M || static_cast<int>(cfg.xi.size()) != cfg.Np)
        throw InvalidArgument("pilot configuration dimensions are inconsistent");
    const Index Np = cfg.Np;
    CMatrix pilots(Np, cfg.M);
    for (Index m = 0; m < cfg.M; ++m)
        for (Index k = 0; k < Np; ++k)
            pilots(k, m) = std::polar(1.0, cfg.theta(k, m));

    CMatrix psi(Np, static_cast<Index>(L) * cfg.M);
    for (int l = 0; l < L; ++l) {
        CVector dft(Np);
        for (Index k = 0; k < Np; ++k) {
            // reduce the exponent mod N before scaling to keep the phase exact
            const long e = (static_cast<long>(cfg.xi[static_cast<std::size_t>(k)] - 1) * l) % cfg.N;
            dft(k) = std::polar(1.0, -two_pi * static_cast<double>(e) / cfg.N);
        }
        for (Index m = 0; m < cfg.M; ++m)
            psi.col(static_cast<Index>(l) * cfg.M + m) = pilots.col(m).cwiseProduct(dft);
    }
    return SensingMatrix(std::move(psi), L, cfg.M, cfg.N);
}

struct CoherenceSummary {
    double mu_max = 0.0;
    double mu_mean = 0.0;
    long pairs = 0;
    std::vector<long> histogram; // equal-width bins over [0, 1]
};

/// Normalized cross-correlation over all distinct column pairs of Psi.
inline CoherenceSummary coherence_stats(const SensingMatrix &S, int bins = 20)
{
    const auto &psi = S.psi();
    if (psi.cols() < 2)
        throw InvalidArgument("coherence needs at least two columns");
    if (bins < 1)
        throw InvalidArgument("histogram needs at least one bin");
    const Eigen::VectorXd norms = psi.colwise().norm().transpose();
    const CMatrix gram = psi.adjoint() * psi;
    CoherenceSummary out;
    out.histogram.assign(static_cast<std::size_t>(bins), 0);
    double sum = 0.0;
    for (Index b = 1; b < gram.cols(); ++b)
        for (Index a = 0; a < b; ++a) {
            const double mu = std::abs(gram(a, b)) / (norms(a) * norms(b));
            out.mu_max = std::max(out.mu_max, mu);
            sum += mu;
            ++out.pairs;
            const auto bin = std::min<long>(bins - 1, static_cast<long>(mu * bins));
            ++out.histogram[static_cast<std::size_t>(bin)];
        }
    out.mu_mean = sum / static_cast<double>(out.pairs);
    return out;
}

/// max(1 - sigma_min^2, sigma_max^2 - 1) of Psi_Omega / sqrt(Np).
inline double isometry_defect(const SensingMatrix &S, const Support &support)
{
    const CMatrix sub = S.columns(support);
    const CMatrix gram = sub.adjoint() * sub / static_cast<double>(S.Np());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    return std::max(1.0 - ev.minCoeff(), ev.maxCoeff() - 1.0);
}

inline double binomial(int n, int k)
{
    double c = 1.0;
    for (int i = 1; i <= k; ++i)
        c = c * (n - k + i) / i;
    return c;
}

/// Monte-Carlo lower bound on the structured RIP constant delta_s. When
/// `trials` covers every size-s support the enumeration is exhaustive and
/// the result is exact.
inline double srip_probe(const SensingMatrix &S, int s, int trials, Rng &rng)
{
    const int L = S.L();
    if (s < 1 || s > L)
        throw InvalidArgument("srip_probe: sparsity s=" + std::to_string(s) + " outside [1, L=" + std::to_string(L) + "]");
    if (trials < 1)
        throw InvalidArgument("srip_probe: trials must be >= 1");
    double delta = 0.0;
    if (static_cast<double>(trials) >= binomial(L, s)) {
        std::vector<bool> pick(static_cast<std::size_t>(L), false);
        std::fill(pick.begin(), pick.begin() + s, true);
        do {
            Support sup;
            for (int l = 0; l < L; ++l)
                if (pick[static_cast<std::size_t>(l)])
                    sup.push_back(l + 1);
            delta = std::max(delta, isometry_defect(S, sup));
        } while (std::prev_permutation(pick.begin(), pick.end()));
        return delta;
    }
    Support all(static_cast<std::size_t>(L));
    std::iota(all.begin(), all.end(), 1);
    for (int t = 0; t < trials; ++t) {
        for (int i = 0; i < s; ++i) {
            std::uniform_int_distribution<int> u(i, L - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(u(rng))]);
        }
        Support sup(all.begin(), all.begin() + s);
        std::sort(sup.begin(), sup.end());
        delta = std::max(delta, isometry_defect(S, sup));
    }
    return delta;
}

} // namespace scsce

#endif // SCSCE_PILOTS_HPP
