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
#include "semmat/convert.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <queue>

namespace semmat {

namespace {

// Sort key is (tile row, tile col, row, col). With power-of-two tiles the
// shifted comparison below is exactly that order.
struct EdgeLess {
    uint32_t shift;
    bool operator()(const Edge &a, const Edge &b) const {
        const uint64_t atr = a.u >> shift, btr = b.u >> shift;
        if (atr != btr)
            return atr < btr;
        const uint64_t atc = a.v >> shift, btc = b.v >> shift;
        if (atc != btc)
            return atc < btc;
        if (a.u != b.u)
            return a.u < b.u;
        return a.v < b.v;
    }
};

struct PackedEdge {
    uint64_t u, v;
    double w;
};
static_assert(sizeof(PackedEdge) == 24);

/// Spilled sorted run reader with a small refill buffer.
class RunReader {
public:
    RunReader(Storage &storage, std::string path)
        : path_(std::move(path)), file_(storage.open_read(path_)) {
        count_ = file_->size() / sizeof(PackedEdge);
        refill();
    }

    bool empty() const { return pos_ == fill_ && next_ >= count_; }
    const Edge &head() const { return head_; }

    void pop() {
        if (pos_ == fill_)
            refill();
        PackedEdge pe;
        std::memcpy(&pe, buf_.data() + pos_ * sizeof(PackedEdge),
                    sizeof(PackedEdge));
        ++pos_;
        head_ = Edge{pe.u, pe.v, pe.w};
    }

    bool advance() {
        if (pos_ == fill_ && next_ >= count_)
            return false;
        pop();
        return true;
    }

private:
    void refill() {
        const uint64_t n = std::min<uint64_t>(kBatch, count_ - next_);
        buf_.resize(n * sizeof(PackedEdge));
        if (n > 0)
            file_->read_at(next_ * sizeof(PackedEdge), buf_);
        next_ += n;
        fill_ = n;
        pos_ = 0;
    }

    static constexpr uint64_t kBatch = 65536;
    std::string path_;
    std::unique_ptr<ReadFile> file_;
    uint64_t count_ = 0;
    uint64_t next_ = 0;
    std::vector<std::byte> buf_;
    uint64_t pos_ = 0;
    uint64_t fill_ = 0;
    Edge head_;
};

/// Streams the destination image: payload first, header backfilled once at
/// the end, so the image bytes are produced exactly once.
class ImageWriter {
public:
    ImageWriter(Storage &storage, const std::string &path, MatrixHeader header)
        : header_(std::move(header)) {
        header_.tile_rows.assign(header_.num_tile_rows(), {});
        cursor_ = header_.header_bytes();
        file_ = storage.create(path, cursor_);
        next_tile_row_ = 0;
    }

    void append_tile_row(std::span<const std::byte> records) {
        auto &extent = header_.tile_rows.at(next_tile_row_++);
        extent.offset = cursor_;
        extent.bytes = records.size();
        if (!records.empty()) {
            file_->write_at(cursor_, records);
            cursor_ += records.size();
        }
    }

    void finish() {
        while (next_tile_row_ < header_.tile_rows.size())
            append_tile_row({});
        file_->write_at(0, header_.serialize());
        file_->flush();
    }

private:
    MatrixHeader header_;
    std::unique_ptr<WriteFile> file_;
    uint64_t cursor_ = 0;
    uint64_t next_tile_row_ = 0;
};

/// Consumes globally sorted, deduplicated edges and emits tile records.
class TileBuilder {
public:
    TileBuilder(ImageWriter &writer, const MatrixHeader &header)
        : writer_(writer), header_(header) {}

    void add(const Edge &e) {
        const uint64_t tr = e.u / header_.tile_size;
        const uint64_t tc = e.v / header_.tile_size;
        if (tr != cur_tile_row_) {
            flush_tile();
            flush_tile_row(tr);
        } else if (tc != cur_tile_col_) {
            flush_tile();
        }
        cur_tile_col_ = tc;
        triples_.push_back({static_cast<uint32_t>(e.u % header_.tile_size),
                            static_cast<uint32_t>(e.v % header_.tile_size),
                            e.w});
    }

    void finish() {
        flush_tile();
        flush_tile_row(header_.num_tile_rows());
        writer_.finish();
    }

private:
    void flush_tile() {
        if (triples_.empty())
            return;
        encode_tile(static_cast<uint32_t>(cur_tile_col_), triples_,
                    header_.value_kind, row_buf_);
        triples_.clear();
    }

    void flush_tile_row(uint64_t next_row) {
        writer_.append_tile_row(row_buf_);
        row_buf_.clear();
        // Empty tile rows between the last and the next one.
        for (uint64_t tr = cur_tile_row_ + 1; tr < next_row; ++tr)
            writer_.append_tile_row({});
        cur_tile_row_ = next_row;
        cur_tile_col_ = UINT64_MAX;
    }

    ImageWriter &writer_;
    const MatrixHeader &header_;
    uint64_t cur_tile_row_ = 0;
    uint64_t cur_tile_col_ = UINT64_MAX;
    std::vector<Triple> triples_;
    std::vector<std::byte> row_buf_;
};

void spill_run(Storage &storage, const std::string &path,
               std::span<const Edge> edges) {
    auto file = storage.create(path, 0);
    std::vector<std::byte> buf(edges.size() * sizeof(PackedEdge));
    for (size_t i = 0; i < edges.size(); ++i) {
        PackedEdge pe{edges[i].u, edges[i].v, edges[i].w};
        std::memcpy(buf.data() + i * sizeof(PackedEdge), &pe, sizeof(PackedEdge));
    }
    file->write_at(0, buf);
    file->flush();
}

} // namespace

void convert(EdgeSource &edges, Storage &dst, const std::string &dst_path,
             const ConvertOptions &options) {
    if (options.n_rows == 0 || options.n_cols == 0)
        throw data_error("convert: matrix dimensions must be positive");
    if (!is_power_of_two(options.tile_size) ||
        options.tile_size > kMaxTileSize)
        throw data_error("convert: tile size must be a power of two <= 32768");

    MatrixHeader header;
    header.n_rows = options.transpose ? options.n_cols : options.n_rows;
    header.n_cols = options.transpose ? options.n_rows : options.n_cols;
    header.tile_size = options.tile_size;
    header.value_kind = options.value_kind;

    const EdgeLess less{
        static_cast<uint32_t>(std::countr_zero(uint64_t(options.tile_size)))};
    const uint64_t chunk_edges =
        std::max<uint64_t>(1024, options.sort_memory_budget / sizeof(Edge));

    Storage &temp = options.temp_storage ? *options.temp_storage : dst;
    std::vector<std::string> runs;
    std::vector<Edge> chunk;
    chunk.reserve(std::min<uint64_t>(chunk_edges, 1 << 22));

    auto intake = [&](Edge e) {
        if (options.transpose)
            std::swap(e.u, e.v);
        if (e.u >= header.n_rows || e.v >= header.n_cols)
            throw data_error("convert: vertex id out of range: (" +
                             std::to_string(e.u) + ", " + std::to_string(e.v) +
                             ")");
        chunk.push_back(e);
        if (chunk.size() >= chunk_edges) {
            std::sort(chunk.begin(), chunk.end(), less);
            runs.push_back(dst_path + ".sort." + std::to_string(runs.size()));
            spill_run(temp, runs.back(), chunk);
            chunk.clear();
        }
    };

    Edge e;
    while (edges.next(e)) {
        intake(e);
        if (options.symmetrize && e.u != e.v)
            intake(Edge{e.v, e.u, e.w});
    }
    std::sort(chunk.begin(), chunk.end(), less);

    ImageWriter writer(dst, dst_path, header);
    TileBuilder builder(writer, header);

    bool have_prev = false;
    Edge prev;
    auto emit = [&](const Edge &edge) {
        if (have_prev && prev.u == edge.u && prev.v == edge.v) {
            if (header.value_kind == ValueKind::kFloat64)
                throw data_error("convert: duplicate weighted edge (" +
                                 std::to_string(edge.u) + ", " +
                                 std::to_string(edge.v) + ")");
            return; // binary: deduplicate
        }
        if (have_prev)
            builder.add(prev);
        prev = edge;
        have_prev = true;
    };

    if (runs.empty()) {
        for (const Edge &edge : chunk)
            emit(edge);
    } else {
        // K-way merge of the spilled runs plus the in-memory tail.
        std::vector<std::unique_ptr<RunReader>> readers;
        for (const auto &path : runs)
            readers.push_back(std::make_unique<RunReader>(temp, path));

        struct HeapItem {
            Edge edge;
            size_t src; // index into readers; SIZE_MAX = in-memory chunk
        };
        auto heap_less = [&](const HeapItem &a, const HeapItem &b) {
            return less(b.edge, a.edge); // min-heap
        };
        std::priority_queue<HeapItem, std::vector<HeapItem>, decltype(heap_less)>
            heap(heap_less);

        size_t chunk_pos = 0;
        for (size_t i = 0; i < readers.size(); ++i)
            if (readers[i]->advance())
                heap.push({readers[i]->head(), i});
        if (chunk_pos < chunk.size())
            heap.push({chunk[chunk_pos++], SIZE_MAX});

        while (!heap.empty()) {
            HeapItem item = heap.top();
            heap.pop();
            emit(item.edge);
            if (item.src == SIZE_MAX) {
                if (chunk_pos < chunk.size())
                    heap.push({chunk[chunk_pos++], SIZE_MAX});
            } else if (readers[item.src]->advance()) {
                heap.push({readers[item.src]->head(), item.src});
            }
        }
        readers.clear();
        for (const auto &path : runs)
            temp.remove(path);
    }
    if (have_prev)
        builder.add(prev);
    builder.finish();
}

} // namespace semmat
