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
#ifndef SEMMAT_EIGENSOLVER_H
#define SEMMAT_EIGENSOLVER_H

#include "semmat/apps_common.h"

namespace semmat {

/// Where the subspace block lives between iterations. On-storage residency
/// persists the block through the storage shim after every update and
/// streams it back for the next one; the arithmetic is identical, so both
/// residencies produce the same Ritz values.
enum class SubspaceResidency { kMemory, kStorage };

struct EigenOptions {
    uint32_t k = 8;            // eigenpairs wanted
    uint32_t block = 16;       // subspace width b >= k, at most 64
    uint32_t max_iters = 500;
    double tol = 1e-6;         // residual / |lambda|
    uint64_t seed = 1;
    SubspaceResidency residency = SubspaceResidency::kMemory;
    ExecMode mode = ExecMode::kInMemory;
    EngineConfig engine;
    bool check_symmetry = true;
    uint32_t stagnation_window = 50;
};

struct EigenResult {
    std::vector<double> values;   // k Ritz values, descending by magnitude
    DenseMatrix vectors;          // n x k
    std::vector<double> residuals;
    uint32_t iterations = 0;
    bool converged = false;
    bool stagnated = false;
    TraceLog trace;
};

/// Block subspace iteration on a symmetric sparse image: Y = A*Q, an
/// orthonormalization of Y, and a Rayleigh-Ritz projection per iteration,
/// all driven by the SpMM kernel with p = block.
EigenResult subspace_iteration(Storage &storage, const std::string &spm_path,
                               const EigenOptions &options);

} // namespace semmat

#endif
