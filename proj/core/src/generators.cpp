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
#include "semmat/generators.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace semmat {

namespace detail {

std::pair<uint64_t, uint64_t> rmat_draw(Rng &rng, uint32_t scale, double a,
                                        double b, double c) {
    uint64_t u = 0, v = 0;
    for (uint32_t level = 0; level < scale; ++level) {
        const double x = rng.next_double();
        u <<= 1;
        v <<= 1;
        if (x < a) {
            // top-left
        } else if (x < a + b) {
            v |= 1;
        } else if (x < a + b + c) {
            u |= 1;
        } else {
            u |= 1;
            v |= 1;
        }
    }
    return {u, v};
}

} // namespace detail

namespace {

uint64_t pack(uint64_t u, uint64_t v) { return (u << 32) | v; }

std::vector<Edge> canonicalize(std::unordered_set<uint64_t> &keys) {
    std::vector<Edge> edges;
    edges.reserve(keys.size());
    for (uint64_t key : keys)
        edges.push_back({key >> 32, key & 0xFFFFFFFFull, 1.0});
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return edges;
}

} // namespace

std::vector<Edge> gen_rmat(const RmatParams &params) {
    if (params.scale > 30)
        throw data_error("gen_rmat: scale above 30 is rejected");
    if (std::abs(params.a + params.b + params.c + params.d - 1.0) > 1e-12)
        throw data_error("gen_rmat: quadrant probabilities must sum to 1");

    const uint64_t n = 1ull << params.scale;
    const uint64_t target = static_cast<uint64_t>(
        std::llround(params.edge_factor * static_cast<double>(n)));
    Rng rng(params.seed);

    std::unordered_set<uint64_t> keys;
    keys.reserve(target * 2);
    const uint64_t max_attempts = 10 * std::max<uint64_t>(target, 1);
    uint64_t attempts = 0;
    while (keys.size() < target && attempts < max_attempts) {
        ++attempts;
        auto [u, v] = detail::rmat_draw(rng, params.scale, params.a, params.b,
                                        params.c);
        if (u == v)
            continue;
        if (!params.directed && u > v)
            std::swap(u, v);
        keys.insert(pack(u, v));
    }
    return canonicalize(keys);
}

uint32_t sbm_cluster_of(uint64_t vertex, uint64_t n, uint32_t num_clusters) {
    const uint64_t per = n / num_clusters;
    const uint64_t c = per == 0 ? 0 : vertex / per;
    // The remainder belongs to the last cluster.
    return static_cast<uint32_t>(std::min<uint64_t>(c, num_clusters - 1));
}

std::vector<uint64_t> sbm_permutation(uint64_t n, uint64_t seed) {
    std::vector<uint64_t> perm(n);
    for (uint64_t i = 0; i < n; ++i)
        perm[i] = i;
    Rng rng(seed ^ 0x5b3779b97f4a7c15ull);
    for (uint64_t i = n; i > 1; --i)
        std::swap(perm[i - 1], perm[rng.next_below(i)]);
    return perm;
}

std::vector<Edge> gen_sbm(const SbmParams &params) {
    if (params.n < 2 || params.num_clusters == 0 ||
        params.num_clusters > params.n)
        throw data_error("gen_sbm: bad vertex or cluster count");
    if (!(params.in_out_ratio > 0))
        throw data_error("gen_sbm: in/out ratio must be positive");

    const uint64_t n = params.n;
    const uint32_t k = params.num_clusters;
    const uint64_t per = n / k;
    const double p_intra = params.in_out_ratio / (1.0 + params.in_out_ratio);
    Rng rng(params.seed);

    auto cluster_bounds = [&](uint32_t c) -> std::pair<uint64_t, uint64_t> {
        const uint64_t begin = uint64_t(c) * per;
        const uint64_t end = (c + 1 == k) ? n : begin + per;
        return {begin, end};
    };

    std::unordered_set<uint64_t> keys;
    keys.reserve(params.edges * 2);
    const uint64_t max_attempts = 10 * std::max<uint64_t>(params.edges, 1);
    uint64_t attempts = 0;
    while (keys.size() < params.edges && attempts < max_attempts) {
        ++attempts;
        uint64_t u, v;
        if (rng.next_double() < p_intra) {
            const uint32_t c = static_cast<uint32_t>(rng.next_below(k));
            auto [begin, end] = cluster_bounds(c);
            if (end - begin < 2)
                continue;
            u = begin + rng.next_below(end - begin);
            v = begin + rng.next_below(end - begin);
        } else {
            u = rng.next_below(n);
            v = rng.next_below(n);
            if (sbm_cluster_of(u, n, k) == sbm_cluster_of(v, n, k))
                continue;
        }
        if (u == v)
            continue;
        if (u > v)
            std::swap(u, v);
        keys.insert(pack(u, v));
    }

    auto edges = canonicalize(keys);
    if (params.ordering == SbmOrdering::kUnclustered) {
        const auto perm = sbm_permutation(n, params.seed);
        for (Edge &e : edges) {
            e.u = perm[e.u];
            e.v = perm[e.v];
            if (e.u > e.v)
                std::swap(e.u, e.v);
        }
        std::sort(edges.begin(), edges.end(),
                  [](const Edge &a, const Edge &b) {
                      return a.u != b.u ? a.u < b.u : a.v < b.v;
                  });
    }
    return edges;
}

} // namespace semmat
