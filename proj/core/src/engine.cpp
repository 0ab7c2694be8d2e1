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
#include "semmat/engine.h"

#include <chrono>
#include <cstring>
#include <future>
#include <thread>

namespace semmat {

uint64_t IoPlan::p_mem() const {
    const uint64_t per_col = n * elem_bytes;
    if (per_col == 0)
        throw budget_error("io plan: empty dense matrix");
    if (dense_budget < per_col)
        throw budget_error("io plan: dense budget below one column");
    return dense_budget / per_col;
}

uint64_t IoPlan::num_passes() const {
    if (p == 0)
        return 0;
    return div_ceil(p, std::min(p_mem(), p));
}

uint64_t IoPlan::predicted_io() const {
    if (dense_budget > memory_budget)
        throw budget_error("io plan: M' exceeds M");
    const uint64_t cache = memory_budget - dense_budget;
    const uint64_t per_pass = sparse_bytes > cache ? sparse_bytes - cache : 0;
    return num_passes() * per_pass;
}

void IoPlan::validate() const {
    const uint64_t minimum =
        n * uint64_t(elem_bytes) + uint64_t(threads) * per_thread_buffer;
    if (memory_budget < minimum)
        throw budget_error("io plan: budget below the n*c + t*eps minimum");
    p_mem();
}

void MemTracker::add(uint64_t bytes) {
    const uint64_t now = current_.fetch_add(bytes) + bytes;
    if (budget_ != 0 && now > budget_) {
        current_.fetch_sub(bytes);
        throw budget_error("engine allocations exceed the memory budget");
    }
    uint64_t peak = peak_.load();
    while (now > peak && !peak_.compare_exchange_weak(peak, now))
        ;
}

BufferPool::~BufferPool() {
    if (!tracker_)
        return;
    for (const auto &buf : free_)
        tracker_->sub(buf.capacity());
}

std::vector<std::byte> BufferPool::acquire(size_t bytes) {
    if (free_.empty()) {
        ++stats_.allocs;
        std::vector<std::byte> buf(bytes);
        if (tracker_)
            tracker_->add(buf.capacity());
        return buf;
    }
    // Prefer the smallest free buffer that already fits; otherwise resize
    // the largest one instead of allocating fresh.
    size_t best = free_.size();
    size_t largest = 0;
    for (size_t i = 0; i < free_.size(); ++i) {
        if (free_[i].capacity() >= bytes &&
            (best == free_.size() ||
             free_[i].capacity() < free_[best].capacity()))
            best = i;
        if (free_[i].capacity() > free_[largest].capacity())
            largest = i;
    }
    const size_t pick = best != free_.size() ? best : largest;
    std::vector<std::byte> buf = std::move(free_[pick]);
    free_.erase(free_.begin() + pick);
    if (buf.capacity() >= bytes) {
        ++stats_.reuses;
        buf.resize(bytes);
        return buf;
    }
    ++stats_.resizes;
    const size_t before = buf.capacity();
    buf.resize(bytes);
    if (tracker_)
        tracker_->add(buf.capacity() - before);
    return buf;
}

void BufferPool::release(std::vector<std::byte> buf) {
    free_.push_back(std::move(buf));
}

WriteCoalescer::WriteCoalescer(WriteFn write, uint64_t total_rows,
                               uint64_t row_bytes, uint64_t merge_threshold,
                               MemTracker *tracker)
    : write_(std::move(write)), total_rows_(total_rows), row_bytes_(row_bytes),
      merge_threshold_(merge_threshold), tracker_(tracker) {}

void WriteCoalescer::submit(uint64_t first_row, uint64_t num_rows,
                            std::span<const std::byte> bytes) {
    if (bytes.size() != num_rows * row_bytes_)
        throw data_error("write batch size does not match its row range");
    std::lock_guard lock(mutex_);
    if (first_row < next_row_)
        throw data_error("write batch overlaps rows already sequenced");
    if (tracker_)
        tracker_->add(bytes.size());
    stash_.emplace(first_row,
                   std::vector<std::byte>(bytes.begin(), bytes.end()));
    drain_locked();
}

void WriteCoalescer::drain_locked() {
    while (!stash_.empty() && stash_.begin()->first == next_row_) {
        auto node = stash_.extract(stash_.begin());
        auto &bytes = node.mapped();
        if (pending_.empty())
            pending_first_row_ = next_row_;
        pending_.insert(pending_.end(), bytes.begin(), bytes.end());
        next_row_ += bytes.size() / row_bytes_;
    }
    if (pending_.size() >= merge_threshold_)
        flush_locked();
}

void WriteCoalescer::flush_locked() {
    if (pending_.empty())
        return;
    write_(pending_first_row_, pending_.size() / row_bytes_, pending_);
    if (tracker_)
        tracker_->sub(pending_.size());
    pending_.clear();
    pending_first_row_ = next_row_;
}

void WriteCoalescer::finish() {
    std::lock_guard lock(mutex_);
    if (!stash_.empty() || next_row_ != total_rows_)
        throw data_error("output rows do not tile the matrix: stalled at row " +
                         std::to_string(next_row_));
    flush_locked();
}

void JobStats::merge(const JobStats &other) {
    sparse_bytes_read += other.sparse_bytes_read;
    dense_bytes_written += other.dense_bytes_written;
    const bool had_batches = write_batches > 0;
    write_batches += other.write_batches;
    if (other.write_batches) {
        min_write_batch = had_batches
                              ? std::min(min_write_batch, other.min_write_batch)
                              : other.min_write_batch;
        max_write_batch = std::max(max_write_batch, other.max_write_batch);
    }
    sub_threshold_batches += other.sub_threshold_batches;
    pool_allocs += other.pool_allocs;
    pool_resizes += other.pool_resizes;
    pool_reuses += other.pool_reuses;
    peak_tracked_bytes = std::max(peak_tracked_bytes, other.peak_tracked_bytes);
    passes += other.passes;
    seconds += other.seconds;
}

namespace {

struct JobAccum {
    std::atomic<uint64_t> sparse_bytes_read{0};
    std::atomic<uint64_t> dense_bytes_written{0};
    std::atomic<uint64_t> write_batches{0};
    std::atomic<uint64_t> min_write_batch{UINT64_MAX};
    std::atomic<uint64_t> max_write_batch{0};
    std::atomic<uint64_t> sub_threshold_batches{0};
    std::atomic<uint64_t> pool_allocs{0};
    std::atomic<uint64_t> pool_resizes{0};
    std::atomic<uint64_t> pool_reuses{0};
};

void atomic_min(std::atomic<uint64_t> &slot, uint64_t value) {
    uint64_t cur = slot.load();
    while (value < cur && !slot.compare_exchange_weak(cur, value))
        ;
}

void atomic_max(std::atomic<uint64_t> &slot, uint64_t value) {
    uint64_t cur = slot.load();
    while (value > cur && !slot.compare_exchange_weak(cur, value))
        ;
}

struct OpenImage {
    std::unique_ptr<ReadFile> file;
    MatrixHeader header;
};

OpenImage open_image(Storage &storage, const std::string &path) {
    auto file = storage.open_read(path);
    MatrixHeader header = MatrixHeader::read(*file);
    if (header.file_bytes() != file->size())
        throw data_error("sparse image size does not match its index");
    return {std::move(file), std::move(header)};
}

using RowWriter = std::function<void(uint64_t first_row, uint64_t num_rows,
                                     const double *data)>;

/// One semi-external pass: stream tile-row bands from storage, multiply
/// against the resident dense matrix, hand finished row batches to `writer`.
/// The caller opened (and paid the header read for) `image`.
void run_sem_pass(const OpenImage &image, const DenseMatrix &in,
                  const EngineConfig &config, MemTracker &tracker,
                  JobAccum &accum, const RowWriter &writer) {
    const MatrixHeader &header = image.header;
    ReadFile *file = image.file.get();
    if (header.n_cols != in.rows())
        throw data_error("spmm_sem: sparse columns do not match dense rows");
    if (in.cols() == 0)
        throw data_error("spmm_sem: dense matrix must have at least one column");
    accum.sparse_bytes_read.fetch_add(header.header_bytes());

    const uint64_t p = in.cols();
    const uint64_t t = header.tile_size;
    const uint64_t num_trs = header.num_tile_rows();
    const uint64_t batch =
        config.kernel.tile_rows_per_task(header.tile_size, p, num_trs);
    const uint32_t threads = std::max<uint32_t>(config.kernel.threads, 1);

    TaskQueue queue(num_trs, batch, threads);

    auto band_extent = [&](const TaskQueue::Task &task) {
        uint64_t bytes = 0;
        for (uint64_t i = task.first; i < task.first + task.count; ++i)
            bytes += header.tile_rows[i].bytes;
        return std::pair{header.tile_rows[task.first].offset, bytes};
    };

    auto worker = [&] {
        BufferPool pool(&tracker);
        std::vector<double> outbuf(batch * t * p);
        tracker.add(outbuf.size() * sizeof(double));

        // The pool is single-threaded: buffers are acquired and released on
        // the worker thread only; the prefetch thread just fills one.
        auto start_read =
            [&](const TaskQueue::Task &task) -> std::future<std::vector<std::byte>> {
            auto [offset, bytes] = band_extent(task);
            std::vector<std::byte> buf = pool.acquire(bytes);
            return std::async(std::launch::async,
                              [file, &accum, offset, bytes,
                               b = std::move(buf)]() mutable {
                                  if (bytes > 0)
                                      file->read_at(offset, b);
                                  accum.sparse_bytes_read.fetch_add(bytes);
                                  return std::move(b);
                              });
        };

        std::optional<TaskQueue::Task> cur = queue.pop();
        if (!cur) {
            tracker.sub(outbuf.size() * sizeof(double));
            return;
        }
        std::vector<std::byte> buf = start_read(*cur).get();
        for (;;) {
            // Double buffering: the next band's transport overlaps this
            // band's computation.
            std::optional<TaskQueue::Task> nxt = queue.pop();
            std::future<std::vector<std::byte>> fut;
            if (nxt)
                fut = start_read(*nxt);

            BandView band{&header, cur->first, cur->count, buf};
            const uint64_t rows = band.num_rows();
            std::fill(outbuf.begin(), outbuf.begin() + cur->count * t * p, 0.0);
            mul_tile_rows(band, in, outbuf.data());
            writer(band.first_row(), rows, outbuf.data());
            pool.release(std::move(buf));

            if (!nxt)
                break;
            buf = fut.get();
            cur = nxt;
        }
        const auto &ps = pool.stats();
        accum.pool_allocs.fetch_add(ps.allocs);
        accum.pool_resizes.fetch_add(ps.resizes);
        accum.pool_reuses.fetch_add(ps.reuses);
        tracker.sub(outbuf.size() * sizeof(double));
    };

    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr error;
        std::mutex error_mutex;
        for (uint32_t i = 0; i < threads; ++i)
            pool.emplace_back([&] {
                try {
                    worker();
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            });
        for (auto &th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }
}

void finish_stats(JobStats *stats, const JobAccum &accum,
                  const MemTracker &tracker,
                  std::chrono::steady_clock::time_point start,
                  uint64_t passes) {
    if (!stats)
        return;
    JobStats s;
    s.sparse_bytes_read = accum.sparse_bytes_read.load();
    s.dense_bytes_written = accum.dense_bytes_written.load();
    s.write_batches = accum.write_batches.load();
    s.min_write_batch = s.write_batches ? accum.min_write_batch.load() : 0;
    s.sub_threshold_batches = accum.sub_threshold_batches.load();
    s.max_write_batch = accum.max_write_batch.load();
    s.pool_allocs = accum.pool_allocs.load();
    s.pool_resizes = accum.pool_resizes.load();
    s.pool_reuses = accum.pool_reuses.load();
    s.peak_tracked_bytes = tracker.peak();
    s.passes = passes;
    s.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    *stats = s;
}

/// Places merged batches into a dense image: contiguous writes when the
/// pass covers the full width, per-row segment writes otherwise.
class ImageRegionWriter {
public:
    ImageRegionWriter(WriteFile &file, uint64_t total_cols, uint64_t col_begin,
                      uint64_t width, uint64_t merge_threshold,
                      JobAccum &accum)
        : file_(file), total_cols_(total_cols), col_begin_(col_begin),
          width_(width), merge_threshold_(merge_threshold), accum_(accum) {}

    void operator()(uint64_t first_row, uint64_t num_rows,
                    std::span<const std::byte> bytes) {
        if (width_ == total_cols_) {
            file_.write_at(kDenseHeaderBytes + first_row * total_cols_ * 8,
                           bytes);
        } else {
            const uint64_t seg = width_ * 8;
            for (uint64_t r = 0; r < num_rows; ++r) {
                const uint64_t row = first_row + r;
                file_.write_at(kDenseHeaderBytes +
                                   (row * total_cols_ + col_begin_) * 8,
                               bytes.subspan(r * seg, seg));
            }
        }
        accum_.dense_bytes_written.fetch_add(bytes.size());
        accum_.write_batches.fetch_add(1);
        if (bytes.size() < merge_threshold_)
            accum_.sub_threshold_batches.fetch_add(1);
        atomic_min(accum_.min_write_batch, bytes.size());
        atomic_max(accum_.max_write_batch, bytes.size());
    }

private:
    WriteFile &file_;
    uint64_t total_cols_;
    uint64_t col_begin_;
    uint64_t width_;
    uint64_t merge_threshold_;
    JobAccum &accum_;
};

void write_dense_header(WriteFile &file, uint64_t rows, uint64_t cols) {
    std::byte header[kDenseHeaderBytes] = {};
    std::memcpy(header, kDenseMagic, 8);
    const uint32_t version = 1;
    std::memcpy(header + 8, &version, 4);
    std::memcpy(header + 16, &rows, 8);
    std::memcpy(header + 24, &cols, 8);
    file.write_at(0, header);
}

} // namespace

DenseMatrix spmm_sem(Storage &storage, const std::string &spm_path,
                     const DenseMatrix &in, const EngineConfig &config,
                     JobStats *stats) {
    const auto start = std::chrono::steady_clock::now();
    MemTracker tracker;
    tracker.set_budget(config.memory_budget);
    JobAccum accum;

    OpenImage image = open_image(storage, spm_path);
    const uint64_t p = in.cols();
    DenseMatrix out(image.header.n_rows, p,
                    std::max<uint64_t>(in.row_interval_size(),
                                       image.header.tile_size));

    run_sem_pass(image, in, config, tracker, accum,
                 [&](uint64_t first_row, uint64_t num_rows,
                     const double *data) {
                     std::memcpy(out.row(first_row), data,
                                 num_rows * p * sizeof(double));
                     accum.dense_bytes_written.fetch_add(num_rows * p * 8);
                 });
    finish_stats(stats, accum, tracker, start, 1);
    return out;
}

void spmm_sem_to_storage(Storage &storage, const std::string &spm_path,
                         const DenseMatrix &in, Storage &out_storage,
                         const std::string &out_path,
                         const EngineConfig &config, JobStats *stats) {
    const auto start = std::chrono::steady_clock::now();
    MemTracker tracker;
    tracker.set_budget(config.memory_budget);
    JobAccum accum;

    OpenImage image = open_image(storage, spm_path);
    const uint64_t n = image.header.n_rows;
    const uint64_t p = in.cols();

    auto out_file = out_storage.create(out_path, kDenseHeaderBytes + n * p * 8);
    write_dense_header(*out_file, n, p);

    ImageRegionWriter region(*out_file, p, 0, p, config.merge_threshold,
                             accum);
    WriteCoalescer coalescer(
        [&region](uint64_t first_row, uint64_t num_rows,
                  std::span<const std::byte> bytes) {
            region(first_row, num_rows, bytes);
        },
        n, p * 8, config.merge_threshold, &tracker);

    run_sem_pass(image, in, config, tracker, accum,
                 [&](uint64_t first_row, uint64_t num_rows,
                     const double *data) {
                     coalescer.submit(
                         first_row, num_rows,
                         std::as_bytes(std::span(data, num_rows * p)));
                 });
    coalescer.finish();
    out_file->flush();
    finish_stats(stats, accum, tracker, start, 1);
}

void spmm_large_dense(Storage &storage, const std::string &spm_path,
                      Storage &dense_storage, const std::string &in_path,
                      const std::string &out_path, uint64_t mem_cols,
                      const EngineConfig &config, JobStats *stats) {
    const auto start = std::chrono::steady_clock::now();
    MemTracker tracker;
    tracker.set_budget(config.memory_budget);
    JobAccum accum;

    if (mem_cols == 0)
        throw budget_error("spmm_large_dense: mem_cols must be positive");
    const DenseImageInfo info = dense_image_info(dense_storage, in_path);
    const auto plan = VerticalPartitionPlan::even(info.n_cols, mem_cols);

    std::unique_ptr<WriteFile> out_file;
    for (uint64_t pass = 0; pass < plan.num_passes(); ++pass) {
        // Each pass is an independent semi-external job: it re-reads the
        // sparse image end to end, header and index included.
        OpenImage image = open_image(storage, spm_path);
        if (pass == 0) {
            if (image.header.n_cols != info.n_rows)
                throw data_error("spmm_large_dense: shape mismatch");
            out_file = dense_storage.create(
                out_path,
                kDenseHeaderBytes + image.header.n_rows * info.n_cols * 8);
            write_dense_header(*out_file, image.header.n_rows, info.n_cols);
        }

        const ColRange range = plan.pass_range(pass);
        DenseMatrix partition =
            load_vertical_partition(dense_storage, in_path, range);
        tracker.add(partition.bytes());

        ImageRegionWriter region(*out_file, info.n_cols, range.begin,
                                 range.width(), config.merge_threshold,
                                 accum);
        WriteCoalescer coalescer(
            [&region](uint64_t first_row, uint64_t num_rows,
                      std::span<const std::byte> bytes) {
                region(first_row, num_rows, bytes);
            },
            image.header.n_rows, range.width() * 8, config.merge_threshold,
            &tracker);

        run_sem_pass(image, partition, config, tracker, accum,
                     [&](uint64_t first_row, uint64_t num_rows,
                         const double *data) {
                         coalescer.submit(first_row, num_rows,
                                          std::as_bytes(std::span(
                                              data,
                                              num_rows * range.width())));
                     });
        coalescer.finish();
        tracker.sub(partition.bytes());
    }
    if (out_file)
        out_file->flush();
    finish_stats(stats, accum, tracker, start, plan.num_passes());
}

} // namespace semmat
