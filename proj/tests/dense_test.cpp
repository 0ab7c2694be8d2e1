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
#include "semmat/dense.h"

#include <gtest/gtest.h>

#include "semmat/dense_ops.h"
#include "semmat/rng.h"
#include "test_util.h"

using namespace semmat;
using namespace semmat::testing;

TEST(VerticalPlan, Arithmetic) {
    auto plan = VerticalPartitionPlan::even(32, 8);
    EXPECT_EQ(plan.num_passes(), 4u);
    const auto range = plan.pass_range(2);
    EXPECT_EQ(range.begin, 16u);
    EXPECT_EQ(range.end, 24u);
    EXPECT_THROW(plan.pass_range(4), data_error);

    // Degenerate plan: p' = P, a single pass covering everything.
    auto whole = VerticalPartitionPlan::even(32, 32);
    EXPECT_EQ(whole.num_passes(), 1u);
    EXPECT_EQ(whole.pass_range(0).width(), 32u);

    // Ranges are disjoint, ordered and cover [0, P).
    auto ragged = VerticalPartitionPlan::even(10, 4);
    uint64_t covered = 0;
    for (uint64_t k = 0; k < ragged.num_passes(); ++k) {
        const auto r = ragged.pass_range(k);
        EXPECT_EQ(r.begin, covered);
        covered = r.end;
    }
    EXPECT_EQ(covered, 10u);
}

TEST(DenseImage, StoreLoadRoundTrip) {
    MemStorage storage;
    const DenseMatrix m = DenseMatrix::random(64, 32, 11);
    m.store(storage, "m.dm");
    const DenseMatrix back = DenseMatrix::load(storage, "m.dm");
    EXPECT_EQ(m, back);
}

TEST(DenseImage, VerticalReassembly) {
    MemStorage storage;
    const DenseMatrix m = DenseMatrix::random(64, 32, 17);
    m.store(storage, "m.dm");

    auto plan = VerticalPartitionPlan::even(32, 8);
    DenseMatrix rebuilt(64, 32);
    for (uint64_t k = 0; k < plan.num_passes(); ++k) {
        const auto range = plan.pass_range(k);
        const DenseMatrix part =
            load_vertical_partition(storage, "m.dm", range);
        EXPECT_EQ(part.rows(), 64u);
        EXPECT_EQ(part.cols(), 8u);
        for (uint64_t r = 0; r < 64; ++r)
            for (uint64_t c = 0; c < 8; ++c)
                rebuilt.at(r, range.begin + c) = part.at(r, c);
    }
    EXPECT_EQ(rebuilt, m);
}

TEST(DenseImage, PartitionReadsEachByteOnce) {
    MemStorage storage;
    const DenseMatrix m = DenseMatrix::random(64, 32, 4);
    m.store(storage, "m.dm");
    storage.reset_counters();
    (void)load_vertical_partition(storage, "m.dm", {8, 16});
    const auto counters = storage.counters("m.dm");
    EXPECT_EQ(counters.bytes_read, kDenseHeaderBytes + 64 * 8 * 8u);
}

TEST(DenseImage, BudgetAndTruncation) {
    MemStorage storage;
    const DenseMatrix m = DenseMatrix::random(16, 8, 1);
    m.store(storage, "m.dm");
    EXPECT_THROW(load_vertical_partition(storage, "m.dm", {0, 8}, 64),
                 budget_error);
    EXPECT_THROW(load_vertical_partition(storage, "m.dm", {0, 9}), data_error);

    auto bytes = storage.read_all("m.dm");
    bytes.resize(bytes.size() - 8);
    storage.put("short.dm", std::move(bytes));
    EXPECT_THROW(DenseMatrix::load(storage, "short.dm"), data_error);
}

TEST(RowIntervals, ArithmeticAndTileContainment) {
    DenseMatrix m(1 << 20, 1, 65536, 4);
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const uint64_t r = rng.next_below(1 << 20);
        EXPECT_EQ(m.interval_of(r), r / 65536);
    }
    // Any aligned tile of t rows lands in exactly one interval as long as
    // the interval size is a multiple of t.
    const uint64_t t = 16384;
    for (int i = 0; i < 1000; ++i) {
        const uint64_t tile_base = rng.next_below((1 << 20) / t) * t;
        EXPECT_EQ(m.interval_of(tile_base), m.interval_of(tile_base + t - 1));
    }
    // Domains are assigned round-robin.
    EXPECT_EQ(m.domain_of_interval(0), 0u);
    EXPECT_EQ(m.domain_of_interval(5), 1u);
}

TEST(DenseOps, TransposeMultiplyIdentity) {
    const DenseMatrix b = DenseMatrix::random(3, 5, 2);
    const DenseMatrix i3 = DenseMatrix::identity(3);
    EXPECT_EQ(transpose_multiply(i3, b), b);
}

TEST(DenseOps, MultiplySmall) {
    DenseMatrix a(2, 2);
    a.at(0, 0) = 1;
    a.at(0, 1) = 2;
    a.at(1, 0) = 3;
    a.at(1, 1) = 4;
    DenseMatrix b(2, 1);
    b.at(0, 0) = 5;
    b.at(1, 0) = 6;
    const auto c = multiply(a, b);
    EXPECT_DOUBLE_EQ(c.at(0, 0), 17.0);
    EXPECT_DOUBLE_EQ(c.at(1, 0), 39.0);
    EXPECT_THROW(multiply(b, a), data_error);
}

TEST(DenseOps, ParallelMatchesSerial) {
    const DenseMatrix a = DenseMatrix::random(2048, 8, 3);
    const DenseMatrix b = DenseMatrix::random(2048, 5, 4);
    EXPECT_EQ(transpose_multiply(a, b, 1), transpose_multiply(a, b, 4));
    const DenseMatrix c = DenseMatrix::random(8, 2048, 5);
    const DenseMatrix big = DenseMatrix::random(2048, 8, 6);
    EXPECT_EQ(multiply(big, c, 1), multiply(big, c, 4));
}

TEST(DenseOps, HadamardScale) {
    DenseMatrix x(1, 1), num(1, 1), den(1, 1);
    x.at(0, 0) = 2;
    num.at(0, 0) = 6;
    den.at(0, 0) = 3;
    hadamard_scale(x, num, den, 0.0);
    EXPECT_DOUBLE_EQ(x.at(0, 0), 4.0);

    // The epsilon guard rescues zero denominators.
    x.at(0, 0) = 2;
    den.at(0, 0) = 0;
    hadamard_scale(x, num, den, 1e-12);
    EXPECT_TRUE(std::isfinite(x.at(0, 0)));
}

TEST(DenseOps, QrReconstructsAndOrthonormal) {
    const DenseMatrix a = DenseMatrix::random(100, 4, 9);
    const QrResult qr = mgs_qr(a);
    EXPECT_EQ(qr.rank, 4u);

    const DenseMatrix qtq = transpose_multiply(qr.q, qr.q);
    for (uint64_t i = 0; i < 4; ++i)
        for (uint64_t j = 0; j < 4; ++j)
            EXPECT_NEAR(qtq.at(i, j), i == j ? 1.0 : 0.0, 1e-12);

    const DenseMatrix back = multiply(qr.q, qr.r);
    double diff = 0, scale = 0;
    for (uint64_t r = 0; r < 100; ++r)
        for (uint64_t c = 0; c < 4; ++c) {
            diff += (back.at(r, c) - a.at(r, c)) * (back.at(r, c) - a.at(r, c));
            scale += a.at(r, c) * a.at(r, c);
        }
    EXPECT_LE(std::sqrt(diff), 1e-10 * std::sqrt(scale));
}

TEST(DenseOps, QrReportsRankDeficiency) {
    DenseMatrix a = DenseMatrix::random(50, 3, 12);
    for (uint64_t r = 0; r < 50; ++r)
        a.at(r, 2) = 2.0 * a.at(r, 0) - a.at(r, 1);
    const QrResult qr = mgs_qr(a);
    EXPECT_EQ(qr.rank, 2u);
    ASSERT_EQ(qr.dropped.size(), 1u);
    EXPECT_EQ(qr.dropped[0], 2u);
}

TEST(DenseOps, FrobeniusNorm) {
    DenseMatrix m(2, 2);
    m.at(0, 0) = 3;
    m.at(1, 1) = 4;
    EXPECT_DOUBLE_EQ(frobenius_norm(m), 5.0);
}

TEST(DenseOps, JacobiSmallSpectrum) {
    // diag(4, -9, 1) rotated by nothing: eigenvalues sorted by magnitude.
    DenseMatrix s(3, 3);
    s.at(0, 0) = 4;
    s.at(1, 1) = -9;
    s.at(2, 2) = 1;
    const auto eig = jacobi_eigen_sym(s);
    ASSERT_EQ(eig.values.size(), 3u);
    EXPECT_DOUBLE_EQ(eig.values[0], -9.0);
    EXPECT_DOUBLE_EQ(eig.values[1], 4.0);
    EXPECT_DOUBLE_EQ(eig.values[2], 1.0);

    // A 2x2 with known spectrum {3, 1}.
    DenseMatrix p(2, 2);
    p.at(0, 0) = 2;
    p.at(0, 1) = 1;
    p.at(1, 0) = 1;
    p.at(1, 1) = 2;
    const auto e2 = jacobi_eigen_sym(p);
    EXPECT_NEAR(e2.values[0], 3.0, 1e-12);
    EXPECT_NEAR(e2.values[1], 1.0, 1e-12);
}
