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
#ifndef SEMMAT_PAGERANK_H
#define SEMMAT_PAGERANK_H

#include "semmat/apps_common.h"

namespace semmat {

struct PageRankOptions {
    double damping = 0.85;
    uint32_t max_iters = 30;
    /// L1 stopping tolerance; 0 runs exactly max_iters iterations.
    double tol = 0.0;
    /// Spread the rank mass of zero-out-degree vertices uniformly; when off,
    /// dangling rows are skipped and mass leaks.
    bool dangling_redistribution = true;
    ExecMode mode = ExecMode::kInMemory;
    EngineConfig engine;
};

struct PageRankResult {
    std::vector<double> ranks;
    uint64_t out_degree_sum = 0;
    uint32_t iterations = 0;
    double last_delta_l1 = 0;
    TraceLog trace;
};

/// PageRank over the transposed adjacency image (row u holds the
/// in-neighbors of u). Out-degrees come from a column scan of the same
/// image, which equals the forward graph's row sums. Each iteration is one
/// SpMM with a single dense column.
PageRankResult pagerank(Storage &storage, const std::string &adjt_path,
                        const PageRankOptions &options);

} // namespace semmat

#endif
