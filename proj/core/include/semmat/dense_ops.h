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
#ifndef SEMMAT_DENSE_OPS_H
#define SEMMAT_DENSE_OPS_H

#include "semmat/dense.h"

namespace semmat {

/// C = A^T * B for conforming A (n x k), B (n x m). Deterministic: each
/// output column accumulates over rows in ascending order.
DenseMatrix transpose_multiply(const DenseMatrix &a, const DenseMatrix &b,
                               uint32_t threads = 1);

/// C = A * B.
DenseMatrix multiply(const DenseMatrix &a, const DenseMatrix &b,
                     uint32_t threads = 1);

/// x <- x * num / (den + eps), elementwise. The guard keeps empty rows or
/// columns from dividing by zero.
void hadamard_scale(DenseMatrix &x, const DenseMatrix &num,
                    const DenseMatrix &den, double eps = 1e-12);

double frobenius_norm(const DenseMatrix &m);

struct QrResult {
    DenseMatrix q; // n x k, orthonormal columns (dropped columns are zero)
    DenseMatrix r; // k x k upper triangular
    uint32_t rank = 0;
    std::vector<uint32_t> dropped; // columns below the rank tolerance
};

/// Modified Gram-Schmidt with a second orthogonalization pass on a
/// tall-skinny block. Columns whose remaining norm falls below
/// drop_tol * ||a_j|| are reported and dropped (zeroed).
QrResult mgs_qr(const DenseMatrix &a, double drop_tol = 1e-10);

struct SymEigResult {
    std::vector<double> values; // sorted descending by magnitude
    DenseMatrix vectors;        // columns follow the value order
};

/// Cyclic Jacobi eigendecomposition of a small symmetric matrix (the k x k
/// projections the applications need).
SymEigResult jacobi_eigen_sym(const DenseMatrix &s, uint32_t max_sweeps = 64);

} // namespace semmat

#endif
