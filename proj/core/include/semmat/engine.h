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
#ifndef SEMMAT_ENGINE_H
#define SEMMAT_ENGINE_H

#include <atomic>
#include <functional>
#include <map>

#include "semmat/dense.h"
#include "semmat/kernel.h"
#include "semmat/scsr.h"
#include "semmat/storage.h"

namespace semmat {

/// Memory/I-O cost model of a semi-external run. M' bytes of the budget M
/// hold dense columns; the leftover M - M' may cache a sparse prefix (cost
/// model only; the engine always gives the dense matrix all of M).
struct IoPlan {
    uint64_t n = 0;               // dense rows
    uint64_t p = 0;               // dense columns overall
    uint32_t elem_bytes = 8;      // c
    uint64_t sparse_bytes = 0;    // E
    uint64_t memory_budget = 0;   // M
    uint64_t dense_budget = 0;    // M'
    uint64_t per_thread_buffer = 64ull << 20; // epsilon
    uint32_t threads = 1;

    /// Columns resident per pass: floor(M' / (n c)).
    uint64_t p_mem() const;
    uint64_t num_passes() const;
    /// Predicted sparse-read volume: ceil(p / p_mem) * max(0, E - (M - M')).
    uint64_t predicted_io() const;
    /// Minimum feasible budget: M >= n c + threads * epsilon.
    void validate() const;
};

/// Tracks engine-owned allocations against an optional budget. Peak value
/// backs the memory-ceiling checks in test builds.
class MemTracker {
public:
    void set_budget(uint64_t bytes) { budget_ = bytes; }
    void add(uint64_t bytes);
    void sub(uint64_t bytes) { current_.fetch_sub(bytes); }
    uint64_t current() const { return current_.load(); }
    uint64_t peak() const { return peak_.load(); }

private:
    std::atomic<uint64_t> current_{0};
    std::atomic<uint64_t> peak_{0};
    uint64_t budget_ = 0;
};

/// Per-worker pool of reusable byte buffers. Tile rows vary in size, so a
/// too-small buffer is resized rather than freed and reallocated.
class BufferPool {
public:
    explicit BufferPool(MemTracker *tracker = nullptr) : tracker_(tracker) {}
    ~BufferPool();

    std::vector<std::byte> acquire(size_t bytes);
    void release(std::vector<std::byte> buf);

    struct Stats {
        uint64_t allocs = 0;
        uint64_t resizes = 0;
        uint64_t reuses = 0;
    };
    const Stats &stats() const { return stats_; }

private:
    MemTracker *tracker_;
    std::vector<std::vector<std::byte>> free_;
    Stats stats_;
};

/// Orders and merges output batches from many workers into ascending,
/// bounded-size writes: a batch below the merge threshold waits for its
/// neighbors, and every emitted write except the last is at least
/// `merge_threshold` bytes.
class WriteCoalescer {
public:
    using WriteFn =
        std::function<void(uint64_t first_row, uint64_t num_rows,
                           std::span<const std::byte> bytes)>;

    WriteCoalescer(WriteFn write, uint64_t total_rows, uint64_t row_bytes,
                   uint64_t merge_threshold, MemTracker *tracker = nullptr);

    void submit(uint64_t first_row, uint64_t num_rows,
                std::span<const std::byte> bytes);
    /// Flushes the final batch; throws if the submitted ranges do not tile
    /// [0, total_rows).
    void finish();

private:
    void drain_locked();
    void flush_locked();

    WriteFn write_;
    uint64_t total_rows_;
    uint64_t row_bytes_;
    uint64_t merge_threshold_;
    MemTracker *tracker_;

    std::mutex mutex_;
    std::map<uint64_t, std::vector<std::byte>> stash_;
    std::vector<std::byte> pending_;
    uint64_t pending_first_row_ = 0;
    uint64_t next_row_ = 0;
};

struct EngineConfig {
    KernelConfig kernel;
    uint64_t merge_threshold = 8ull << 20;
    uint64_t per_thread_buffer = 64ull << 20;
    /// Engine-tracked allocation ceiling; 0 disables enforcement.
    uint64_t memory_budget = 0;
};

struct JobStats {
    uint64_t sparse_bytes_read = 0;   // header + index + streamed tile rows
    uint64_t dense_bytes_written = 0; // output payload via the sink
    uint64_t write_batches = 0;
    uint64_t min_write_batch = 0;
    uint64_t max_write_batch = 0;
    /// Merged batches below the merge threshold; the coalescer permits at
    /// most one (the final batch).
    uint64_t sub_threshold_batches = 0;
    uint64_t pool_allocs = 0;
    uint64_t pool_resizes = 0;
    uint64_t pool_reuses = 0;
    uint64_t peak_tracked_bytes = 0;
    uint64_t passes = 0;
    double seconds = 0;

    void merge(const JobStats &other);
};

/// Semi-external SpMM with the result kept in memory. Numerically
/// bit-identical to the in-memory kernel: only the transport differs.
DenseMatrix spmm_sem(Storage &storage, const std::string &spm_path,
                     const DenseMatrix &in, const EngineConfig &config,
                     JobStats *stats = nullptr);

/// Semi-external SpMM streaming the result to a dense image on storage,
/// written in ascending row order through the coalescer.
void spmm_sem_to_storage(Storage &storage, const std::string &spm_path,
                         const DenseMatrix &in, Storage &out_storage,
                         const std::string &out_path,
                         const EngineConfig &config, JobStats *stats = nullptr);

/// Multi-pass SpMM for an on-storage dense input wider than memory: one
/// semi-external pass per vertical partition of `mem_cols` columns, output
/// assembled into a single n x P image. Pass boundaries never change the
/// arithmetic, so any mem_cols yields byte-identical output.
void spmm_large_dense(Storage &storage, const std::string &spm_path,
                      Storage &dense_storage, const std::string &in_path,
                      const std::string &out_path, uint64_t mem_cols,
                      const EngineConfig &config, JobStats *stats = nullptr);

} // namespace semmat

#endif
