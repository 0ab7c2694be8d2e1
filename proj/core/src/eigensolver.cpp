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
#include "semmat/eigensolver.h"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "semmat/dense_ops.h"
#include "semmat/rng.h"

namespace semmat {

namespace {

void check_symmetric(Storage &storage, const std::string &path) {
    TiledImage image = TiledImage::load(storage, path);
    auto edges = decode_image(image);
    auto swapped = edges;
    for (Edge &e : swapped)
        std::swap(e.u, e.v);
    std::sort(swapped.begin(), swapped.end(),
              [](const Edge &a, const Edge &b) {
                  return a.u != b.u ? a.u < b.u : a.v < b.v;
              });
    if (edges.size() != swapped.size())
        throw data_error("eigensolver: matrix is not symmetric");
    for (size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].u != swapped[i].u || edges[i].v != swapped[i].v ||
            edges[i].w != swapped[i].w)
            throw data_error("eigensolver: matrix is not symmetric");
    }
}

/// Replaces dropped (rank-deficient) columns with fresh seeded random
/// directions and re-orthogonalizes until the block has full rank.
DenseMatrix full_rank_basis(DenseMatrix y, uint64_t seed) {
    for (uint32_t round = 0;; ++round) {
        QrResult qr = mgs_qr(y);
        if (qr.dropped.empty())
            return std::move(qr.q);
        if (round >= 8)
            throw data_error("eigensolver: cannot build a full-rank basis");
        Rng rng(seed + 0x9e3779b9ull * (round + 1));
        for (uint32_t col : qr.dropped)
            for (uint64_t r = 0; r < qr.q.rows(); ++r)
                qr.q.at(r, col) = rng.next_double() - 0.5;
        y = std::move(qr.q);
    }
}

} // namespace

EigenResult subspace_iteration(Storage &storage, const std::string &spm_path,
                               const EigenOptions &options) {
    const uint32_t b = std::max(options.block, options.k);
    if (options.k == 0)
        throw data_error("eigensolver: k must be positive");
    if (b > 64)
        throw data_error("eigensolver: block width above 64 is unsupported");
    if (options.block < options.k)
        throw data_error("eigensolver: block width below k");

    if (options.check_symmetry)
        check_symmetric(storage, spm_path);

    SpmmDriver driver(storage, spm_path, options.mode, options.engine);
    const MatrixHeader &header = driver.header();
    if (header.n_rows != header.n_cols)
        throw data_error("eigensolver: matrix must be square");
    const uint64_t n = header.n_rows;
    if (b > n)
        throw data_error("eigensolver: block width exceeds the matrix order");

    const std::string q_path = spm_path + ".subspace.q";
    const std::string z_path = spm_path + ".subspace.z";
    const bool on_storage = options.residency == SubspaceResidency::kStorage;

    // Persist-and-reload keeps the subspace on the shim between steps in
    // storage residency; the loaded bytes are what the next step computes
    // with, so the two residencies stay bit-identical.
    auto checkpoint = [&](const DenseMatrix &m,
                          const std::string &path) -> DenseMatrix {
        if (!on_storage)
            return m;
        m.store(storage, path);
        return DenseMatrix::load(storage, path);
    };

    DenseMatrix q = full_rank_basis(
        DenseMatrix::random(n, b, options.seed), options.seed);
    q = checkpoint(q, q_path);

    EigenResult result;
    double best_residual = INFINITY;
    uint32_t stagnant_iters = 0;
    const auto start = std::chrono::steady_clock::now();

    for (uint32_t iter = 0; iter < options.max_iters; ++iter) {
        DenseMatrix z = driver.multiply(q); // n x b
        z = checkpoint(z, z_path);

        // Rayleigh-Ritz on the projected block; S is symmetric up to
        // rounding, so fold it before the Jacobi sweep.
        DenseMatrix s = transpose_multiply(q, z);
        for (uint64_t i = 0; i < b; ++i)
            for (uint64_t j = i + 1; j < b; ++j) {
                const double avg = 0.5 * (s.at(i, j) + s.at(j, i));
                s.at(i, j) = avg;
                s.at(j, i) = avg;
            }
        SymEigResult eig = jacobi_eigen_sym(s);

        // Ritz vectors X = Q*V and residuals ||A x - lambda x|| =
        // ||Z v - lambda Q v|| column by column.
        DenseMatrix x = multiply(q, eig.vectors);
        DenseMatrix ax = multiply(z, eig.vectors);
        std::vector<double> residuals(options.k);
        double max_rel = 0.0;
        for (uint32_t j = 0; j < options.k; ++j) {
            double sq = 0.0;
            for (uint64_t r = 0; r < n; ++r) {
                const double diff = ax.at(r, j) - eig.values[j] * x.at(r, j);
                sq += diff * diff;
            }
            residuals[j] = std::sqrt(sq);
            const double denom = std::max(std::abs(eig.values[j]), 1e-300);
            max_rel = std::max(max_rel, residuals[j] / denom);
        }

        result.iterations = iter + 1;
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        result.trace.add(iter + 1, "max_rel_residual", max_rel, wall);

        if (max_rel < options.tol) {
            result.converged = true;
            result.values.assign(eig.values.begin(),
                                 eig.values.begin() + options.k);
            result.residuals = residuals;
            result.vectors = DenseMatrix(n, options.k);
            for (uint64_t r = 0; r < n; ++r)
                for (uint32_t j = 0; j < options.k; ++j)
                    result.vectors.at(r, j) = x.at(r, j);
            return result;
        }

        if (max_rel < best_residual * (1.0 - 1e-12)) {
            best_residual = max_rel;
            stagnant_iters = 0;
        } else if (++stagnant_iters >= options.stagnation_window) {
            result.stagnated = true;
        }

        result.values.assign(eig.values.begin(),
                             eig.values.begin() + options.k);
        result.residuals = residuals;
        result.vectors = DenseMatrix(n, options.k);
        for (uint64_t r = 0; r < n; ++r)
            for (uint32_t j = 0; j < options.k; ++j)
                result.vectors.at(r, j) = x.at(r, j);
        if (result.stagnated)
            return result;

        q = full_rank_basis(std::move(z), options.seed + iter + 1);
        q = checkpoint(q, q_path);
    }
    return result;
}

} // namespace semmat
