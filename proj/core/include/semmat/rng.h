/*
 * Copyright 2026 The semmat authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef SEMMAT_RNG_H
#define SEMMAT_RNG_H

#include <cstdint>
#include <random>

namespace semmat {

/// Deterministic random source. mt19937_64 output is fixed by the standard
/// and the double mapping below avoids the implementation-defined behavior of
/// std::uniform_real_distribution, so streams are reproducible across
/// platforms and library versions.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound). Rejection-free modulo is fine here:
    /// bounds are far below 2^64 so the bias is negligible for generation,
    /// and determinism is what matters.
    uint64_t next_below(uint64_t bound) { return gen_() % bound; }

private:
    std::mt19937_64 gen_;
};

} // namespace semmat

#endif
