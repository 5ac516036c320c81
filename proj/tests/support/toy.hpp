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

// Small seeded instances shared by the unit tests, the acceptance binary
// and `scsce selftest`.

#ifndef SCSCE_TESTS_TOY_HPP
#define SCSCE_TESTS_TOY_HPP

#include <scsce/channel_model.hpp>
#include <scsce/pilots.hpp>

namespace scsce::toy {

struct Instance {
    SensingMatrix S;
    ChannelBlock ch;
    CMatrix y; // noiseless Psi D
};

struct Shape {
    int L = 8;
    int M = 2;
    int Np = 8;
    int P = 2;
    int R = 1;
    int N = 64;
};

/// Random-phase pilots on uniformly spaced subcarriers and a uniform-random
/// support with equal tap powers, both drawn from `seed`.
inline Instance make(std::uint64_t seed, const Shape &shape = {})
{
    ChannelSpec spec;
    spec.L = shape.L;
    spec.M = shape.M;
    spec.P = shape.P;
    spec.R = shape.R;
    spec.kind = ProfileKind::uniform_random;
    Instance t;
    t.S = assemble_sensing(make_pilot_config(shape.N, shape.Np, shape.M, derive_seed(seed, 1)), shape.L);
    Rng rng(derive_seed(seed, 2));
    t.ch = generate_channel(spec, rng);
    t.y = t.S.psi() * t.ch.d;
    return t;
}

} // namespace scsce::toy

#endif // SCSCE_TESTS_TOY_HPP
