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
#ifndef SEMMAT_GENERATORS_H
#define SEMMAT_GENERATORS_H

#include <vector>

#include "semmat/rng.h"
#include "semmat/types.h"

namespace semmat {

struct RmatParams {
    uint32_t scale = 10;  // n = 2^scale vertices
    double edge_factor = 8.0;
    double a = 0.57, b = 0.19, c = 0.19, d = 0.05;
    uint64_t seed = 1;
    bool directed = true;
};

/// Recursive-matrix graph. Deterministic for a fixed seed; self loops are
/// excluded and duplicates redrawn until the target unique edge count is
/// met (capped at 10x attempts). Undirected graphs emit each edge once with
/// u < v. Output is sorted by (u, v).
std::vector<Edge> gen_rmat(const RmatParams &params);

enum class SbmOrdering { kClustered, kUnclustered };

struct SbmParams {
    uint64_t n = 1024;
    uint32_t num_clusters = 8;
    uint64_t edges = 8192;
    /// Ratio of edges inside clusters to edges between clusters.
    double in_out_ratio = 4.0;
    SbmOrdering ordering = SbmOrdering::kClustered;
    uint64_t seed = 1;
};

/// Stochastic block model. Vertices are split evenly into clusters (the
/// remainder goes to the last one); each edge is intra-cluster with
/// probability ratio/(1+ratio) and endpoints are uniform within the chosen
/// scope. Undirected, canonical u < v, sorted, deduplicated. Unclustered
/// ordering composes the clustered graph with a seeded vertex permutation.
std::vector<Edge> gen_sbm(const SbmParams &params);

/// Vertex permutation used by the unclustered ordering, exposed so tests can
/// relate the two orderings.
std::vector<uint64_t> sbm_permutation(uint64_t n, uint64_t seed);

/// Cluster id of a vertex under clustered ordering.
uint32_t sbm_cluster_of(uint64_t vertex, uint64_t n, uint32_t num_clusters);

namespace detail {
/// One R-MAT coordinate draw: descends `scale` levels choosing a quadrant
/// by (a, b, c, d) each time.
std::pair<uint64_t, uint64_t> rmat_draw(Rng &rng, uint32_t scale, double a,
                                        double b, double c);
} // namespace detail

} // namespace semmat

#endif
