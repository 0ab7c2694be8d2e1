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
#include "semmat/nmf.h"

#include <chrono>
#include <cmath>

#include "semmat/dense_ops.h"

namespace semmat {

namespace {

DenseMatrix transpose(const DenseMatrix &m) {
    DenseMatrix t(m.cols(), m.rows());
    for (uint64_t r = 0; r < m.rows(); ++r)
        for (uint64_t c = 0; c < m.cols(); ++c)
            t.at(c, r) = m.at(r, c);
    return t;
}

/// Routes a factor multiply through the vertical-partition path when the
/// resident column budget is below the factor width. Pass boundaries do not
/// change the arithmetic, so any budget yields the same bits.
DenseMatrix factor_multiply(SpmmDriver &driver, Storage &storage,
                            const std::string &image_path,
                            const DenseMatrix &in, uint64_t mem_cols,
                            const EngineConfig &config,
                            const std::string &scratch_prefix) {
    if (mem_cols >= in.cols())
        return driver.multiply(in);
    const std::string in_path = scratch_prefix + ".in";
    const std::string out_path = scratch_prefix + ".out";
    in.store(storage, in_path);
    spmm_large_dense(storage, image_path, storage, in_path, out_path, mem_cols,
                     config);
    DenseMatrix out = DenseMatrix::load(storage, out_path);
    storage.remove(in_path);
    storage.remove(out_path);
    return out;
}

} // namespace

NmfResult nmf(Storage &storage, const std::string &a_path,
              const std::string &at_path, const NmfOptions &options) {
    if (options.k == 0)
        throw data_error("nmf: rank k must be positive");

    SpmmDriver a_driver(storage, a_path, options.mode, options.engine);
    SpmmDriver at_driver(storage, at_path, options.mode, options.engine);
    const MatrixHeader &ah = a_driver.header();
    const MatrixHeader &ath = at_driver.header();
    if (ah.n_rows != ath.n_cols || ah.n_cols != ath.n_rows)
        throw data_error("nmf: transposed image shape does not match");

    const uint64_t n = ah.n_rows;
    const uint64_t m = ah.n_cols;
    const uint32_t k = options.k;
    const uint64_t mem_cols = options.mem_cols == 0 ? k : options.mem_cols;

    // The objective needs the non-zeros; decode once and validate
    // non-negativity while at it.
    const std::vector<Edge> entries = [&] {
        TiledImage image = TiledImage::load(storage, a_path);
        auto edges = decode_image(image);
        for (const Edge &e : edges)
            if (e.w < 0)
                throw data_error("nmf: matrix has negative entries");
        return edges;
    }();
    double a_sq = 0.0;
    for (const Edge &e : entries)
        a_sq += e.w * e.w;

    NmfResult result;
    result.w = DenseMatrix::random(n, k, options.seed);
    result.h = DenseMatrix::random(k, m, options.seed + 1);

    auto objective = [&] {
        // ||A - WH||_F^2 = ||A||^2 - 2 <A, WH> + tr((W^T W)(H H^T)),
        // evaluated without forming the dense product.
        double cross = 0.0;
        for (const Edge &e : entries) {
            const double *wr = result.w.row(e.u);
            double dot = 0.0;
            for (uint32_t i = 0; i < k; ++i)
                dot += wr[i] * result.h.at(i, e.v);
            cross += e.w * dot;
        }
        const DenseMatrix wtw = transpose_multiply(result.w, result.w);
        const DenseMatrix hht = transpose_multiply(transpose(result.h),
                                                   transpose(result.h));
        double tr = 0.0;
        for (uint32_t i = 0; i < k; ++i)
            for (uint32_t j = 0; j < k; ++j)
                tr += wtw.at(i, j) * hht.at(j, i);
        return std::sqrt(std::max(0.0, a_sq - 2.0 * cross + tr));
    };

    const auto start = std::chrono::steady_clock::now();
    for (uint32_t iter = 0; iter < options.iters; ++iter) {
        // H update: H <- H * (W^T A) / (W^T W H + eps); the numerator is
        // computed as (A^T W)^T.
        DenseMatrix atw = factor_multiply(at_driver, storage, at_path,
                                          result.w, mem_cols, options.engine,
                                          a_path + ".nmf.h");
        DenseMatrix num_h = transpose(atw); // k x m
        DenseMatrix den_h =
            multiply(transpose_multiply(result.w, result.w), result.h);
        hadamard_scale(result.h, num_h, den_h, options.eps);

        // W update: W <- W * (A H^T) / (W (H H^T) + eps).
        DenseMatrix ht = transpose(result.h); // m x k
        DenseMatrix num_w = factor_multiply(a_driver, storage, a_path, ht,
                                            mem_cols, options.engine,
                                            a_path + ".nmf.w");
        DenseMatrix den_w =
            multiply(result.w, transpose_multiply(ht, ht));
        hadamard_scale(result.w, num_w, den_w, options.eps);

        const double obj = objective();
        result.objective.push_back(obj);
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        result.trace.add(iter + 1, "frobenius_objective", obj, wall);
    }
    return result;
}

} // namespace semmat
