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
#ifndef SEMMAT_TYPES_H
#define SEMMAT_TYPES_H

#include <cstdint>
#include <stdexcept>
#include <string>

namespace semmat {

/// Element payload of a sparse matrix image. Binary matrices store no value
/// bytes; every non-zero is implicitly 1.
enum class ValueKind : uint32_t {
    kBinary = 0,
    kFloat64 = 1,
};

constexpr uint32_t value_bytes(ValueKind kind) {
    return kind == ValueKind::kBinary ? 0u : 8u;
}

struct Edge {
    uint64_t u = 0;
    uint64_t v = 0;
    double w = 1.0;

    friend bool operator==(const Edge &, const Edge &) = default;
};

/// Malformed or inconsistent input data (bad file bytes, ids out of range,
/// duplicate weighted edges, shape mismatches).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Storage-level failure: short read, failed write, missing file.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// A memory or I/O plan cannot be satisfied within its declared budget.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string &msg) : std::runtime_error(msg) {}
};

inline uint64_t div_ceil(uint64_t a, uint64_t b) {
    return (a + b - 1) / b;
}

inline bool is_power_of_two(uint64_t x) {
    return x != 0 && (x & (x - 1)) == 0;
}

} // namespace semmat

#endif
