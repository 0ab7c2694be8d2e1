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
#include "semmat/kernel.h"

#include <cstring>
#include <mutex>
#include <thread>

namespace semmat {

std::span<const std::byte> BandView::row_bytes(uint64_t tr) const {
    const auto &rows = header->tile_rows;
    const uint64_t base = rows[first_tile_row].offset;
    return bytes.subspan(rows[tr].offset - base, rows[tr].bytes);
}

uint64_t BandView::num_rows() const {
    const uint64_t begin = first_row();
    const uint64_t end = std::min(header->n_rows,
                                  (first_tile_row + num_tile_rows) *
                                      uint64_t(header->tile_size));
    return end - begin;
}

namespace {

/// Forward cursor over the tile records of one tile row. The super-block
/// traversal visits ascending tile columns for each band row, so a single
/// monotonic cursor per row suffices.
struct RowCursor {
    std::span<const std::byte> rest;
    ValueKind kind;
    std::optional<TileRecordView> current;
    int64_t prev_col = -1;

    void advance() {
        if (rest.empty()) {
            current.reset();
            return;
        }
        auto rec = parse_tile_record(rest, kind);
        if (static_cast<int64_t>(rec.tile_col_id) <= prev_col)
            throw data_error("tile records not ascending by column");
        prev_col = rec.tile_col_id;
        rest = rest.subspan(rec.record_len);
        current = rec;
    }
};

void multiply_record(const TileRecordView &rec, const MatrixHeader &header,
                     uint64_t tile_row, const DenseMatrix &in, double *out,
                     uint64_t p) {
    const uint64_t col_base = uint64_t(rec.tile_col_id) * header.tile_size;
    const uint32_t row_limit = header.tile_row_height(tile_row);
    const uint32_t col_limit = header.tile_col_width(rec.tile_col_id);
    if (header.value_kind == ValueKind::kBinary) {
        detail::walk_tile_record(
            rec, ValueKind::kBinary, row_limit, col_limit,
            [&](uint32_t r, uint32_t c, double) {
                inner_product_accumulate(in.row(col_base + c),
                                         out + uint64_t(r) * p, p);
            });
    } else {
        detail::walk_tile_record(
            rec, ValueKind::kFloat64, row_limit, col_limit,
            [&](uint32_t r, uint32_t c, double v) {
                inner_product_accumulate(v, in.row(col_base + c),
                                         out + uint64_t(r) * p, p);
            });
    }
}

} // namespace

void mul_tile_rows(const BandView &band, const DenseMatrix &in, double *out,
                   const KernelHooks *hooks) {
    const MatrixHeader &header = *band.header;
    const uint64_t p = in.cols();
    const uint64_t t = header.tile_size;
    const uint64_t band_rows = band.num_tile_rows;
    const uint64_t num_tile_cols = header.num_tile_cols();

    std::vector<RowCursor> cursors(band_rows);
    for (uint64_t i = 0; i < band_rows; ++i) {
        cursors[i] = {band.row_bytes(band.first_tile_row + i),
                      header.value_kind,
                      std::nullopt,
                      -1};
        cursors[i].advance();
    }

    // Super-block traversal: k steps by the band height; within a super
    // block rows are processed before columns.
    for (uint64_t k = 0; k < num_tile_cols; k += band_rows) {
        for (uint64_t i = 0; i < band_rows; ++i) {
            RowCursor &cursor = cursors[i];
            double *row_out = out + (i * t) * p;
            for (uint64_t j = 0; j < band_rows && k + j < num_tile_cols; ++j) {
                const uint64_t target = k + j;
                if (!cursor.current || cursor.current->tile_col_id != target)
                    continue;
                if (hooks && hooks->on_tile)
                    hooks->on_tile(band.first_tile_row + i, target);
                multiply_record(*cursor.current, header,
                                band.first_tile_row + i, in, row_out, p);
                cursor.advance();
            }
        }
    }
    for (const auto &cursor : cursors)
        if (cursor.current)
            throw data_error("tile column id beyond the matrix width");
}

DenseMatrix spmm(const TiledImage &spm, const DenseMatrix &in,
                 const KernelConfig &config, const KernelHooks *hooks) {
    const MatrixHeader &header = spm.header();
    if (header.n_cols != in.rows())
        throw data_error("spmm: sparse columns do not match dense rows");
    if (in.cols() == 0)
        throw data_error("spmm: dense matrix must have at least one column");

    const uint64_t p = in.cols();
    const uint64_t t = header.tile_size;
    const uint64_t num_trs = header.num_tile_rows();
    const uint64_t batch = config.tile_rows_per_task(header.tile_size, p,
                                                     num_trs);
    const uint32_t threads = std::max<uint32_t>(config.threads, 1);

    DenseMatrix out(header.n_rows, p, std::max<uint64_t>(in.row_interval_size(),
                                                         t));
    TaskQueue queue(num_trs, batch, threads);

    auto worker = [&] {
        std::vector<double> buf(batch * t * p);
        for (;;) {
            auto task = queue.pop();
            if (!task)
                break;
            BandView band{&header, task->first, task->count,
                          spm.tile_row_bytes(task->first, task->count)};
            const uint64_t rows = band.num_rows();
            std::fill(buf.begin(), buf.begin() + task->count * t * p, 0.0);
            mul_tile_rows(band, in, buf.data(), hooks);
            // One bulk write per output row, from the band-local buffer.
            std::memcpy(out.row(band.first_row()), buf.data(),
                        rows * p * sizeof(double));
            if (hooks && hooks->on_row_write)
                hooks->on_row_write(band.first_row(), rows);
        }
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
    return out;
}

} // namespace semmat
