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
#ifndef SEMMAT_TEST_UTIL_H
#define SEMMAT_TEST_UTIL_H

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "semmat/convert.h"
#include "semmat/dense.h"
#include "semmat/storage.h"
#include "semmat/types.h"

namespace semmat::testing {

// ---------------------------------------------------------------------------
// Independent oracles. These deliberately share no code with the library
// paths they check: plain CSR arrays, row-by-row loops, their own Jacobi.
// ---------------------------------------------------------------------------

/// Brute-force CSR multiply oracle built straight from an edge list.
class CsrOracle {
public:
    CsrOracle(const std::vector<Edge> &edges, uint64_t n_rows, uint64_t n_cols)
        : n_rows_(n_rows), n_cols_(n_cols) {
        row_ptr_.assign(n_rows + 1, 0);
        for (const Edge &e : edges)
            ++row_ptr_[e.u + 1];
        for (uint64_t r = 0; r < n_rows; ++r)
            row_ptr_[r + 1] += row_ptr_[r];
        cols_.resize(edges.size());
        vals_.resize(edges.size());
        std::vector<uint64_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
        for (const Edge &e : edges) {
            cols_[fill[e.u]] = e.v;
            vals_[fill[e.u]] = e.w;
            ++fill[e.u];
        }
        // Column-sorted rows give the oracle a definite accumulation order.
        for (uint64_t r = 0; r < n_rows; ++r) {
            std::vector<std::pair<uint64_t, double>> row;
            for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i)
                row.push_back({cols_[i], vals_[i]});
            std::sort(row.begin(), row.end());
            for (uint64_t i = 0; i < row.size(); ++i) {
                cols_[row_ptr_[r] + i] = row[i].first;
                vals_[row_ptr_[r] + i] = row[i].second;
            }
        }
    }

    DenseMatrix multiply(const DenseMatrix &in) const {
        DenseMatrix out(n_rows_, in.cols());
        for (uint64_t r = 0; r < n_rows_; ++r) {
            double *o = out.row(r);
            for (uint64_t i = row_ptr_[r]; i < row_ptr_[r + 1]; ++i) {
                const double v = vals_[i];
                const double *b = in.row(cols_[i]);
                for (uint64_t c = 0; c < in.cols(); ++c)
                    o[c] += v * b[c];
            }
        }
        return out;
    }

    uint64_t nnz() const { return cols_.size(); }

private:
    uint64_t n_rows_, n_cols_;
    std::vector<uint64_t> row_ptr_;
    std::vector<uint64_t> cols_;
    std::vector<double> vals_;
};

/// Dense power-iteration PageRank oracle on the forward edge list.
inline std::vector<double>
pagerank_oracle(const std::vector<Edge> &forward_edges, uint64_t n, double d,
                uint32_t iters, bool dangling_redistribution) {
    std::vector<uint64_t> out_deg(n, 0);
    for (const Edge &e : forward_edges)
        ++out_deg[e.u];
    std::vector<double> x(n, 1.0 / double(n)), next(n);
    for (uint32_t it = 0; it < iters; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        double dangling = 0.0;
        for (uint64_t v = 0; v < n; ++v)
            if (out_deg[v] == 0)
                dangling += x[v];
        for (const Edge &e : forward_edges)
            next[e.v] += x[e.u] / double(out_deg[e.u]);
        const double base = (1.0 - d) / double(n) +
                            (dangling_redistribution ? d * dangling / double(n)
                                                     : 0.0);
        for (uint64_t u = 0; u < n; ++u)
            next[u] = base + d * next[u];
        x = next;
    }
    return x;
}

/// Dense symmetric eigenvalue oracle: cyclic Jacobi on a full dense copy,
/// written independently of the library's projected solver.
inline std::vector<double>
jacobi_oracle_eigenvalues(const std::vector<std::vector<double>> &sym) {
    const size_t n = sym.size();
    std::vector<std::vector<double>> a = sym;
    for (uint32_t sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                off += a[i][j] * a[i][j];
        if (std::sqrt(off) < 1e-12)
            break;
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300)
                    continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t =
                    (theta >= 0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> values(n);
    for (size_t i = 0; i < n; ++i)
        values[i] = a[i][i];
    std::sort(values.begin(), values.end(), [](double x, double y) {
        if (std::abs(x) != std::abs(y))
            return std::abs(x) > std::abs(y);
        return x > y;
    });
    return values;
}

// ---------------------------------------------------------------------------
// Small helpers.
// ---------------------------------------------------------------------------

inline std::vector<Edge> sorted_dedup(std::vector<Edge> edges) {
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const Edge &a, const Edge &b) {
                                return a.u == b.u && a.v == b.v;
                            }),
                edges.end());
    return edges;
}

inline std::vector<Edge> symmetrized(std::vector<Edge> edges) {
    const size_t n = edges.size();
    for (size_t i = 0; i < n; ++i)
        if (edges[i].u != edges[i].v)
            edges.push_back({edges[i].v, edges[i].u, edges[i].w});
    return sorted_dedup(std::move(edges));
}

/// Builds an image in mem storage from edges and returns its path.
inline std::string make_image(MemStorage &storage, const std::vector<Edge> &edges,
                              uint64_t n_rows, uint64_t n_cols,
                              uint32_t tile_size,
                              ValueKind kind = ValueKind::kBinary,
                              const std::string &name = "m.spm",
                              bool transpose = false) {
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = n_rows;
    opt.n_cols = n_cols;
    opt.tile_size = tile_size;
    opt.value_kind = kind;
    opt.transpose = transpose;
    convert(src, storage, name, opt);
    return name;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / (1.0 + std::abs(want));
}

} // namespace semmat::testing

#endif
