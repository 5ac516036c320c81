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

// Delay-domain MIMO channel generation with spatial common support across
// antennas and static support over R symbols.

#ifndef SCSCE_CHANNEL_MODEL_HPP
#define SCSCE_CHANNEL_MODEL_HPP

#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <string>

namespace scsce {

inline constexpr double speed_of_light = 299792458.0;

/// Maximum Doppler shift f_D = v * f_c / c for a speed in km/h.
inline double doppler_from_speed(double speed_kmh, double carrier_hz)
{
    return speed_kmh / 3.6 * carrier_hz / speed_of_light;
}

/// Lag-one correlation of a Jakes-spectrum gain sampled every symbol_duration_s.
inline double gauss_markov_rho(double doppler_hz, double symbol_duration_s)
{
    if (doppler_hz == 0.0)
        return 1.0;
    return std::cyl_bessel_j(0.0, two_pi * doppler_hz * symbol_duration_s);
}

enum class ProfileKind { itu_va, uniform_random };

inline std::string to_string(ProfileKind k)
{
    return k == ProfileKind::itu_va ? "itu-va" : "uniform-random";
}

inline ProfileKind profile_kind_from_string(const std::string &name)
{
    if (name == "itu-va")
        return ProfileKind::itu_va;
    if (name == "uniform-random")
        return ProfileKind::uniform_random;
    throw InvalidSpec("unknown channel profile '" + name + "' (expected itu-va | uniform-random)");
}

struct PowerDelayProfile {
    std::vector<int> tap_delays;       // 1-based sample indices
    std::vector<double> tap_powers_db; // relative powers

    /// Linear powers normalized to sum to one.
    std::vector<double> linear_powers() const
    {
        std::vector<double> p(tap_powers_db.size());
        std::transform(tap_powers_db.begin(), tap_powers_db.end(), p.begin(), db_to_linear);
        const double total = std::accumulate(p.begin(), p.end(), 0.0);
        for (auto &x : p)
            x /= total;
        return p;
    }
};

/// ITU-R M.1225 Vehicular-A, delays rounded to the nearest sample at the
/// given sampling rate.
inline PowerDelayProfile itu_vehicular_a(double bandwidth_hz)
{
    static constexpr double delays_ns[] = {0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0};
    static constexpr double powers_db[] = {0.0, -1.0, -9.0, -10.0, -15.0, -20.0};
    PowerDelayProfile pdp;
    for (std::size_t i = 0; i < std::size(delays_ns); ++i) {
        pdp.tap_delays.push_back(static_cast<int>(std::lround(delays_ns[i] * 1e-9 * bandwidth_hz)) + 1);
        pdp.tap_powers_db.push_back(powers_db[i]);
    }
    return pdp;
}

struct ChannelSpec {
    int L = 64;  // channel length in samples
    int M = 64;  // transmit antennas
    int P = 6;   // paths
    int R = 1;   // jointly generated OFDM symbols
    double carrier_hz = 2e9;
    double bandwidth_hz = 10e6;
    ProfileKind kind = ProfileKind::itu_va;
    PowerDelayProfile profile = itu_vehicular_a(10e6);
    double doppler_hz = 0.0;
    double symbol_duration_s = (4096.0 + 64.0) / 10e6;

    /// Throws InvalidSpec listing the first violated constraint.
    void validate() const
    {
        if (L < 1)
            throw InvalidSpec("channel length L must be >= 1");
        if (P < 1 || P > L)
            throw InvalidSpec("sparsity P must satisfy 0 < P <= L (P=" + std::to_string(P) +
                              ", L=" + std::to_string(L) + ")");
        if (M < 1)
            throw InvalidSpec("antenna count M must be >= 1");
        if (R < 1)
            throw InvalidSpec("symbol count R must be >= 1");
        if (doppler_hz < 0.0 || symbol_duration_s <= 0.0)
            throw InvalidSpec("doppler must be >= 0 and symbol duration > 0");
        if (kind == ProfileKind::itu_va) {
            const auto &d = profile.tap_delays;
            if (d.size() != profile.tap_powers_db.size())
                throw InvalidSpec("profile delay and power lists differ in length");
            if (static_cast<int>(d.size()) != P)
                throw InvalidSpec("profile has " + std::to_string(d.size()) + " taps but P=" + std::to_string(P));
            Support sorted(d.begin(), d.end());
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
                throw InvalidSpec("profile tap delays must be distinct");
            if (sorted.front() < 1 || sorted.back() > L)
                throw InvalidSpec("profile tap delays must lie in [1, L]");
        }
    }
};

/// Structured-sparse equivalent CIR matrix: L stacked M x R blocks.
struct ChannelBlock {
    CMatrix d;       // ML x R, block l occupies rows [(l-1)M, lM)
    Support support; // sorted, 1-based
    ChannelSpec spec;

    auto block(int l) const { return d.middleRows(static_cast<Index>(l - 1) * spec.M, spec.M); }
    auto block(int l) { return d.middleRows(static_cast<Index>(l - 1) * spec.M, spec.M); }

    /// CIR of antenna m (0-based) at symbol r (0-based), length L.
    CVector antenna_cir(int m, int r) const
    {
        CVector h(spec.L);
        for (int l = 0; l < spec.L; ++l)
            h(l) = d(static_cast<Index>(l) * spec.M + m, r);
        return h;
    }
};

namespace detail {

/// Per-tap linear power, aligned with the support order.
inline std::vector<double> tap_powers(const ChannelSpec &spec, const Support &support)
{
    if (spec.kind == ProfileKind::uniform_random)
        return std::vector<double>(support.size(), 1.0 / static_cast<double>(support.size()));
    const auto lin = spec.profile.linear_powers();
    std::vector<double> out;
    for (int l : support) {
        const auto it = std::find(spec.profile.tap_delays.begin(), spec.profile.tap_delays.end(), l);
        out.push_back(it == spec.profile.tap_delays.end()
                          ? 0.0
                          : lin[static_cast<std::size_t>(it - spec.profile.tap_delays.begin())]);
    }
    return out;
}

} // namespace detail

/// Common support: the profile taps (itu-va) or P distinct taps drawn
/// uniformly from [1, L] (uniform-random). Sorted ascending.
inline Support sample_support(const ChannelSpec &spec, Rng &rng)
{
    spec.validate();
    Support out;
    if (spec.kind == ProfileKind::itu_va) {
        out = spec.profile.tap_delays;
    } else {
        Support all(static_cast<std::size_t>(spec.L));
        std::iota(all.begin(), all.end(), 1);
        // partial Fisher-Yates
        for (int i = 0; i < spec.P; ++i) {
            std::uniform_int_distribution<int> pick(i, spec.L - 1);
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng))]);
        }
        out.assign(all.begin(), all.begin() + spec.P);
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Symbol-1 gains: i.i.d. CN(0, p_l) per antenna on every support tap.
/// Columns 2..R are left zero; see evolve_gains.
inline ChannelBlock sample_gains(const ChannelSpec &spec, const Support &support, Rng &rng)
{
    spec.validate();
    if (static_cast<int>(support.size()) != spec.P)
        throw InvalidSpec("support size " + std::to_string(support.size()) + " does not match P=" +
                          std::to_string(spec.P));
    ChannelBlock blk{CMatrix::Zero(static_cast<Index>(spec.L) * spec.M, spec.R), support, spec};
    const auto powers = detail::tap_powers(spec, support);
    for (std::size_t i = 0; i < support.size(); ++i) {
        auto b = blk.block(support[i]);
        for (int m = 0; m < spec.M; ++m)
            b(m, 0) = complex_gaussian(rng, powers[i]);
    }
    return blk;
}

/// Fills symbols 2..R with the Gauss-Markov recursion
/// g_{r+1} = rho g_r + sqrt(1 - rho^2) nu, nu ~ CN(0, p_l).
inline ChannelBlock evolve_gains(ChannelBlock blk, Rng &rng)
{
    const auto &spec = blk.spec;
    const double rho = gauss_markov_rho(spec.doppler_hz, spec.symbol_duration_s);
    const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    const auto powers = detail::tap_powers(spec, blk.support);
    for (std::size_t i = 0; i < blk.support.size(); ++i) {
        auto b = blk.block(blk.support[i]);
        for (int r = 1; r < spec.R; ++r)
            for (int m = 0; m < spec.M; ++m) {
                b(m, r) = rho * b(m, r - 1);
                if (innov > 0.0)
                    b(m, r) += innov * complex_gaussian(rng, powers[i]);
            }
    }
    return blk;
}

/// One full realization: support, symbol-1 gains, then temporal evolution.
inline ChannelBlock generate_channel(const ChannelSpec &spec, Rng &rng)
{
    auto support = sample_support(spec, rng);
    return evolve_gains(sample_gains(spec, support, rng), rng);
}

} // namespace scsce

#endif // SCSCE_CHANNEL_MODEL_HPP
