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

#ifndef SCSCE_TYPES_HPP
#define SCSCE_TYPES_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace scsce {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Ordered set of 1-based tap (block) indices.
using Support = std::vector<int>;

/// Random engine used throughout; one instance per trial/worker.
using Rng = std::mt19937_64;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// ----- Errors ---------------------------------------------------------------

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A least-squares system whose column block selection is rank deficient.
class SingularSystem : public std::runtime_error {
public:
    SingularSystem(const std::string &what, Support support)
        : std::runtime_error(what), support_(std::move(support)) {}

    const Support &support() const noexcept { return support_; }

private:
    Support support_;
};

// ----- Seeding ----------------------------------------------------------------

/// SplitMix64 finalizer; mixes a 64-bit word into a well-distributed one.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a path of indices,
/// e.g. derive_seed(seed, trial, stream).
template <typename... Ts>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Ts... path) noexcept
{
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ mix64(static_cast<std::uint64_t>(path) + 0x632be59bd9b4e019ULL))), ...);
    return h;
}

// ----- Small numeric helpers --------------------------------------------------

/// Circularly-symmetric complex Gaussian sample with E|z|^2 = variance.
inline cdouble complex_gaussian(Rng &rng, double variance = 1.0)
{
    std::normal_distribution<double> nd(0.0, 1.0);
    const double s = std::sqrt(variance / 2.0);
    const double re = nd(rng);
    const double im = nd(rng);
    return {s * re, s * im};
}

/// Matrix of i.i.d. CN(0, variance) entries, filled column-major.
inline CMatrix complex_gaussian_matrix(Index rows, Index cols, Rng &rng, double variance = 1.0)
{
    CMatrix out(rows, cols);
    for (Index c = 0; c < cols; ++c)
        for (Index r = 0; r < rows; ++r)
            out(r, c) = complex_gaussian(rng, variance);
    return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

} // namespace scsce

#endif // SCSCE_TYPES_HPP
