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
#ifndef SEMMAT_NMF_H
#define SEMMAT_NMF_H

#include "semmat/apps_common.h"

namespace semmat {

struct NmfOptions {
    uint32_t k = 16;
    uint32_t iters = 50;
    /// Factor columns resident during the SpMM steps; below k the factors
    /// are vertically partitioned and multiplied pass by pass. 0 means k.
    uint64_t mem_cols = 0;
    uint64_t seed = 1;
    double eps = 1e-12;
    ExecMode mode = ExecMode::kInMemory;
    EngineConfig engine;
};

struct NmfResult {
    DenseMatrix w; // n x k
    DenseMatrix h; // k x m
    std::vector<double> objective; // ||A - WH||_F after each iteration
    TraceLog trace;
};

/// Multiplicative-update NMF A ~ W*H on a non-negative sparse image. Both A
/// and its transpose must be available: W^T*A is computed as (A^T*W)^T and
/// A*H^T directly. The denominator guard keeps empty rows and columns from
/// dividing by zero; updates preserve non-negativity and the objective is
/// non-increasing.
NmfResult nmf(Storage &storage, const std::string &a_path,
              const std::string &at_path, const NmfOptions &options);

} // namespace semmat

#endif
