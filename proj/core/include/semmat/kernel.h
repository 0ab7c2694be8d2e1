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
#ifndef SEMMAT_KERNEL_H
#define SEMMAT_KERNEL_H

#include <atomic>
#include <functional>
#include <optional>

#include "semmat/dense.h"
#include "semmat/scsr.h"

namespace semmat {

struct KernelConfig {
    /// Effective per-worker cache budget; the super block is sized so two
    /// dense bands of this many bytes stay resident.
    uint64_t cache_bytes = 512 * 1024;
    uint32_t threads = 1;

    static constexpr uint32_t kDenseElemBytes = 8;

    /// Tile rows per large task: cache_bytes / (2 * p * elem * t),
    /// floored at 1 and capped at the tile row count.
    uint64_t tile_rows_per_task(uint32_t tile_size, uint64_t p,
                                uint64_t num_tile_rows) const {
        const uint64_t denom = 2ull * p * kDenseElemBytes * tile_size;
        uint64_t num_trs = denom == 0 ? 1 : cache_bytes / denom;
        num_trs = std::max<uint64_t>(num_trs, 1);
        return std::min(num_trs, std::max<uint64_t>(num_tile_rows, 1));
    }
};

/// Global task queue over tile rows. Dispatches `batch` contiguous rows per
/// task while more than `threshold` rows remain, then single rows, so the
/// tail of the computation load-balances across workers.
class TaskQueue {
public:
    struct Task {
        uint64_t first = 0;
        uint64_t count = 0;
    };

    TaskQueue(uint64_t total, uint64_t batch, uint32_t threshold)
        : total_(total), batch_(std::max<uint64_t>(batch, 1)),
          threshold_(threshold) {}

    std::optional<Task> pop() {
        uint64_t cur = next_.load(std::memory_order_relaxed);
        for (;;) {
            if (cur >= total_)
                return std::nullopt;
            const uint64_t remaining = total_ - cur;
            const uint64_t take =
                remaining <= threshold_ ? 1 : std::min(batch_, remaining);
            if (next_.compare_exchange_weak(cur, cur + take,
                                            std::memory_order_relaxed))
                return Task{cur, take};
        }
    }

    uint64_t total() const { return total_; }
    uint64_t batch() const { return batch_; }

private:
    uint64_t total_;
    uint64_t batch_;
    uint32_t threshold_;
    std::atomic<uint64_t> next_ = 0;
};

/// out_row += value * in_row over p columns. Branch-free over p so the
/// optimizer can vectorize it.
inline void inner_product_accumulate(double value, const double *in_row,
                                     double *out_row, uint64_t p) {
    for (uint64_t c = 0; c < p; ++c)
        out_row[c] += value * in_row[c];
}

/// Binary specialization: the non-zero is an implicit 1.
inline void inner_product_accumulate(const double *in_row, double *out_row,
                                     uint64_t p) {
    for (uint64_t c = 0; c < p; ++c)
        out_row[c] += in_row[c];
}

/// A contiguous band of tile rows plus the metadata needed to traverse it.
struct BandView {
    const MatrixHeader *header = nullptr;
    uint64_t first_tile_row = 0;
    uint64_t num_tile_rows = 0;
    /// Concatenated payload of the band's tile rows.
    std::span<const std::byte> bytes;

    std::span<const std::byte> row_bytes(uint64_t tr) const;
    /// Output rows the band covers.
    uint64_t first_row() const { return first_tile_row * header->tile_size; }
    uint64_t num_rows() const;
};

struct KernelHooks {
    /// Called once per non-empty tile in visit order (tests pin the
    /// super-block traversal with this).
    std::function<void(uint64_t tile_row, uint64_t tile_col)> on_tile;
    /// Called once per bulk output-row write with (first_row, num_rows).
    std::function<void(uint64_t, uint64_t)> on_row_write;
};

/// Multiplies a band of tile rows with the input matrix into a zeroed
/// band-local buffer (band rows x p, row-major). Tiles are visited in
/// super-block order: tile columns advance in groups of the band height, and
/// within a group every band row is processed before moving right.
void mul_tile_rows(const BandView &band, const DenseMatrix &in, double *out,
                   const KernelHooks *hooks = nullptr);

/// In-memory SpMM: out = spm * in. The output accumulation order per row is
/// a pure function of the matrix, so the result is bit-identical for any
/// thread count.
DenseMatrix spmm(const TiledImage &spm, const DenseMatrix &in,
                 const KernelConfig &config,
                 const KernelHooks *hooks = nullptr);

} // namespace semmat

#endif
