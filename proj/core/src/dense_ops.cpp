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
#include "semmat/dense_ops.h"

#include <algorithm>
#include <cmath>
#include <thread>

namespace semmat {

namespace {

/// Runs fn(begin, end) over a row partition. Partitions are fixed by the
/// row count and thread count only, so results never depend on scheduling.
template <typename Fn>
void parallel_ranges(uint64_t n, uint32_t threads, Fn &&fn) {
    if (threads <= 1 || n < 1024) {
        fn(uint64_t(0), n);
        return;
    }
    const uint64_t per = div_ceil(n, threads);
    std::vector<std::thread> pool;
    for (uint64_t begin = 0; begin < n; begin += per) {
        const uint64_t end = std::min(begin + per, n);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto &t : pool)
        t.join();
}

} // namespace

DenseMatrix transpose_multiply(const DenseMatrix &a, const DenseMatrix &b,
                               uint32_t threads) {
    if (a.rows() != b.rows())
        throw data_error("transpose_multiply: row counts differ");
    const uint64_t k = a.cols(), m = b.cols(), n = a.rows();
    DenseMatrix c(k, m);
    // Partition over output rows (columns of A); each is an independent
    // accumulation over the shared row stream.
    parallel_ranges(k, threads, [&](uint64_t begin, uint64_t end) {
        for (uint64_t r = 0; r < n; ++r) {
            const double *ar = a.row(r);
            const double *br = b.row(r);
            for (uint64_t i = begin; i < end; ++i) {
                const double av = ar[i];
                double *ci = c.row(i);
                for (uint64_t j = 0; j < m; ++j)
                    ci[j] += av * br[j];
            }
        }
    });
    return c;
}

DenseMatrix multiply(const DenseMatrix &a, const DenseMatrix &b,
                     uint32_t threads) {
    if (a.cols() != b.rows())
        throw data_error("multiply: inner dimensions differ");
    const uint64_t n = a.rows(), k = a.cols(), m = b.cols();
    DenseMatrix c(n, m);
    parallel_ranges(n, threads, [&](uint64_t begin, uint64_t end) {
        for (uint64_t r = begin; r < end; ++r) {
            const double *ar = a.row(r);
            double *cr = c.row(r);
            for (uint64_t i = 0; i < k; ++i) {
                const double av = ar[i];
                const double *bi = b.row(i);
                for (uint64_t j = 0; j < m; ++j)
                    cr[j] += av * bi[j];
            }
        }
    });
    return c;
}

void hadamard_scale(DenseMatrix &x, const DenseMatrix &num,
                    const DenseMatrix &den, double eps) {
    if (x.rows() != num.rows() || x.cols() != num.cols() ||
        x.rows() != den.rows() || x.cols() != den.cols())
        throw data_error("hadamard_scale: shape mismatch");
    auto xd = x.data();
    auto nd = num.data();
    auto dd = den.data();
    for (size_t i = 0; i < xd.size(); ++i)
        xd[i] = xd[i] * nd[i] / (dd[i] + eps);
}

double frobenius_norm(const DenseMatrix &m) {
    double sum = 0.0;
    for (double v : m.data())
        sum += v * v;
    return std::sqrt(sum);
}

QrResult mgs_qr(const DenseMatrix &a, double drop_tol) {
    const uint64_t n = a.rows(), k = a.cols();
    QrResult res{DenseMatrix(n, k), DenseMatrix(k, k), 0, {}};

    std::vector<double> col(n);
    auto col_dot = [&](const DenseMatrix &m, uint64_t cj,
                       const std::vector<double> &v) {
        double s = 0.0;
        for (uint64_t r = 0; r < n; ++r)
            s += m.at(r, cj) * v[r];
        return s;
    };

    for (uint64_t j = 0; j < k; ++j) {
        double orig_norm = 0.0;
        for (uint64_t r = 0; r < n; ++r) {
            col[r] = a.at(r, j);
            orig_norm += col[r] * col[r];
        }
        orig_norm = std::sqrt(orig_norm);

        // Two orthogonalization passes; the second one repairs the
        // cancellation MGS leaves behind on nearly dependent columns.
        for (int pass = 0; pass < 2; ++pass) {
            for (uint64_t i = 0; i < j; ++i) {
                const double rij = col_dot(res.q, i, col);
                if (pass == 0)
                    res.r.at(i, j) = rij;
                else
                    res.r.at(i, j) += rij;
                for (uint64_t r = 0; r < n; ++r)
                    col[r] -= rij * res.q.at(r, i);
            }
        }

        double norm = 0.0;
        for (double v : col)
            norm += v * v;
        norm = std::sqrt(norm);
        if (norm <= drop_tol * std::max(orig_norm, 1e-300)) {
            res.dropped.push_back(static_cast<uint32_t>(j));
            // Column stays zero in Q; R records the residual norm as zero.
            continue;
        }
        res.r.at(j, j) = norm;
        const double inv = 1.0 / norm;
        for (uint64_t r = 0; r < n; ++r)
            res.q.at(r, j) = col[r] * inv;
        ++res.rank;
    }
    return res;
}

SymEigResult jacobi_eigen_sym(const DenseMatrix &s, uint32_t max_sweeps) {
    if (s.rows() != s.cols())
        throw data_error("jacobi_eigen_sym: matrix must be square");
    const uint64_t n = s.rows();
    DenseMatrix a = s;
    DenseMatrix v = DenseMatrix::identity(n);

    auto off_norm = [&] {
        double sum = 0.0;
        for (uint64_t i = 0; i < n; ++i)
            for (uint64_t j = i + 1; j < n; ++j)
                sum += a.at(i, j) * a.at(i, j);
        return std::sqrt(sum);
    };

    const double scale = frobenius_norm(a);
    const double tol = 1e-14 * std::max(scale, 1e-300);
    for (uint32_t sweep = 0; sweep < max_sweeps && off_norm() > tol; ++sweep) {
        for (uint64_t p = 0; p < n; ++p) {
            for (uint64_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) <= tol / (n * n + 1))
                    continue;
                const double app = a.at(p, p), aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) +
                                  std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (uint64_t i = 0; i < n; ++i) {
                    const double aip = a.at(i, p), aiq = a.at(i, q);
                    a.at(i, p) = c * aip - sn * aiq;
                    a.at(i, q) = sn * aip + c * aiq;
                }
                for (uint64_t i = 0; i < n; ++i) {
                    const double api = a.at(p, i), aqi = a.at(q, i);
                    a.at(p, i) = c * api - sn * aqi;
                    a.at(q, i) = sn * api + c * aqi;
                }
                for (uint64_t i = 0; i < n; ++i) {
                    const double vip = v.at(i, p), viq = v.at(i, q);
                    v.at(i, p) = c * vip - sn * viq;
                    v.at(i, q) = sn * vip + c * viq;
                }
            }
        }
    }

    std::vector<uint64_t> order(n);
    for (uint64_t i = 0; i < n; ++i)
        order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint64_t x, uint64_t y) {
        const double ax = std::abs(a.at(x, x)), ay = std::abs(a.at(y, y));
        if (ax != ay)
            return ax > ay;
        return a.at(x, x) > a.at(y, y);
    });

    SymEigResult res;
    res.values.resize(n);
    res.vectors = DenseMatrix(n, n);
    for (uint64_t c = 0; c < n; ++c) {
        res.values[c] = a.at(order[c], order[c]);
        for (uint64_t r = 0; r < n; ++r)
            res.vectors.at(r, c) = v.at(r, order[c]);
    }
    return res;
}

} // namespace semmat
