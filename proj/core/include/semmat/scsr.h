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
#ifndef SEMMAT_SCSR_H
#define SEMMAT_SCSR_H

#include <cstring>
#include <span>
#include <vector>

#include "semmat/storage.h"
#include "semmat/types.h"

namespace semmat {

// Sparse matrix image layout (all integers little-endian):
//
//   [0)   magic "SCSRCOO1"
//   [8)   u32 version
//   [12)  u32 tile_size
//   [16)  u64 n_rows
//   [24)  u64 n_cols
//   [32)  u32 value_kind
//   [36)  u32 reserved
//   [40)  u64 num_tile_rows
//   [48)  num_tile_rows x { u64 byte_offset, u64 byte_length }
//   then tile-row payloads, contiguous and in tile-row order.
//
// Each tile-row payload is a sequence of tile records ascending by tile
// column. A record is a 16-byte header (u32 tile_col_id, u32 record_len,
// u32 nnz_scsr, u32 num_coo) followed by the index region and the value
// region. The index region holds SCSR rows (a u16 row header with the MSB
// set, then u16 column entries with the MSB clear) for rows with two or more
// non-zeros, then num_coo (u16 row, u16 col) pairs for single-entry rows.
// Values follow in index order, SCSR first, then COO; binary matrices store
// no value region.

inline constexpr char kSparseMagic[8] = {'S', 'C', 'S', 'R', 'C', 'O', 'O', '1'};
inline constexpr uint32_t kFormatVersion = 1;
inline constexpr uint32_t kSparseHeaderFixedBytes = 48;
inline constexpr uint32_t kTileRecordHeaderBytes = 16;
inline constexpr uint32_t kMaxTileSize = 32768;
inline constexpr uint32_t kDefaultTileSize = 16384;

struct TileRowExtent {
    uint64_t offset = 0;
    uint64_t bytes = 0;
};

struct MatrixHeader {
    uint64_t n_rows = 0;
    uint64_t n_cols = 0;
    uint32_t tile_size = kDefaultTileSize;
    ValueKind value_kind = ValueKind::kBinary;
    std::vector<TileRowExtent> tile_rows;

    uint64_t num_tile_rows() const { return div_ceil(n_rows, tile_size); }
    uint64_t num_tile_cols() const { return div_ceil(n_cols, tile_size); }
    uint64_t header_bytes() const {
        return kSparseHeaderFixedBytes + 16 * tile_rows.size();
    }
    uint64_t payload_bytes() const;
    uint64_t file_bytes() const { return header_bytes() + payload_bytes(); }
    /// Rows in tile row `tr` (the last tile row may be short).
    uint32_t tile_row_height(uint64_t tr) const;
    /// Columns in tile column `tc`.
    uint32_t tile_col_width(uint64_t tc) const;

    void validate() const;
    std::vector<std::byte> serialize() const;
    static MatrixHeader parse(std::span<const std::byte> bytes);
    static MatrixHeader read(ReadFile &file);
};

/// One non-zero with tile-relative coordinates.
struct Triple {
    uint32_t row = 0;
    uint32_t col = 0;
    double value = 1.0;

    friend bool operator==(const Triple &, const Triple &) = default;
};

/// Measured occupancy of one tile (or an aggregate over tiles).
struct TileStats {
    uint64_t nnr = 0; // non-empty rows
    uint64_t nnc = 0; // non-empty columns
    uint64_t nnz = 0; // non-zeros
    uint32_t value_width = 0;
};

/// Analytic index+value size of a tile in SCSR: 2*nnr + (2+c)*nnz.
uint64_t scsr_size(const TileStats &stats);
/// Analytic index+value size of the same tile in DCSC: 8*nnc + (2+c)*nnz.
uint64_t dcsc_size(const TileStats &stats);

/// Appends one encoded tile record to `out`. Triples must be tile-relative,
/// sorted by (row, col), and duplicate-free; rows with a single entry go to
/// the COO region, the rest to SCSR.
void encode_tile(uint32_t tile_col_id, std::span<const Triple> triples,
                 ValueKind kind, std::vector<std::byte> &out);

struct TileRecordView {
    uint32_t tile_col_id = 0;
    uint32_t record_len = 0;
    uint32_t nnz_scsr = 0;
    uint32_t num_coo = 0;
    std::span<const std::byte> index_region;
    std::span<const std::byte> value_region;

    uint64_t nnz() const { return uint64_t(nnz_scsr) + num_coo; }
};

/// Parses and length-checks the record at the start of `bytes`.
TileRecordView parse_tile_record(std::span<const std::byte> bytes,
                                 ValueKind kind);

/// Decodes a record into (row, col, value) triples sorted by (row, col),
/// with full structural validation (MSB sequence, ordering, bounds, and the
/// SCSR/COO row split).
std::vector<Triple> decode_tile(const TileRecordView &record, ValueKind kind,
                                uint32_t row_limit, uint32_t col_limit);

namespace detail {

inline uint16_t get_u16(const std::byte *p) {
    uint16_t v;
    std::memcpy(&v, p, 2);
    return v;
}

inline double get_f64(const std::byte *p) {
    double v;
    std::memcpy(&v, p, 8);
    return v;
}

/// Streams the non-zeros of a record in storage order (SCSR rows, then COO
/// pairs) without materializing triples. Validates structure and bounds as
/// it goes; `fn(row, col, value)` is invoked per non-zero. This is the
/// multiply path, so it stays allocation-free.
template <typename Fn>
void walk_tile_record(const TileRecordView &rec, ValueKind kind,
                      uint32_t row_limit, uint32_t col_limit, Fn &&fn) {
    const std::byte *p = rec.index_region.data();
    const std::byte *const index_end = p + rec.index_region.size();
    const uint32_t value_width = value_bytes(kind);
    const std::byte *values = rec.value_region.data();
    uint64_t value_idx = 0;
    auto next_value = [&]() -> double {
        if (value_width == 0)
            return 1.0;
        return get_f64(values + 8 * value_idx++);
    };

    // SCSR region: row headers (MSB set) interleaved with column entries.
    uint32_t cols_seen = 0;
    int64_t row = -1;
    uint32_t row_cols = 0;
    int64_t prev_row = -1;
    int64_t prev_col = -1;
    while (cols_seen < rec.nnz_scsr) {
        if (p + 2 > index_end - 4ull * rec.num_coo)
            throw data_error("tile record index region truncated");
        const uint16_t word = get_u16(p);
        p += 2;
        if (word & 0x8000) {
            if (row >= 0 && row_cols < 2)
                throw data_error("SCSR row with fewer than two entries");
            row = word & 0x7FFF;
            if (row <= prev_row)
                throw data_error("SCSR row ids not strictly ascending");
            if (row >= row_limit)
                throw data_error("SCSR row id out of range");
            prev_row = row;
            row_cols = 0;
            prev_col = -1;
        } else {
            if (row < 0)
                throw data_error("column entry before any SCSR row header");
            const uint16_t col = word;
            if (col >= col_limit)
                throw data_error("column id out of range");
            if (col <= prev_col)
                throw data_error("columns not strictly ascending within a row");
            prev_col = col;
            ++row_cols;
            ++cols_seen;
            fn(static_cast<uint32_t>(row), static_cast<uint32_t>(col),
               next_value());
        }
    }
    if (row >= 0 && row_cols < 2)
        throw data_error("SCSR row with fewer than two entries");

    // COO region: (row, col) pairs sorted by (row, col), one entry per row.
    prev_row = -1;
    for (uint32_t i = 0; i < rec.num_coo; ++i) {
        const uint16_t r = get_u16(p);
        const uint16_t c = get_u16(p + 2);
        p += 4;
        if ((r & 0x8000) || (c & 0x8000))
            throw data_error("COO pair with MSB set");
        if (r >= row_limit || c >= col_limit)
            throw data_error("COO id out of range");
        if (static_cast<int64_t>(r) <= prev_row)
            throw data_error("COO rows not strictly ascending");
        prev_row = r;
        fn(r, c, next_value());
    }
}

} // namespace detail

/// A whole sparse image held in memory: the transport for the in-memory
/// kernel and the decode target for small tools.
class TiledImage {
public:
    static TiledImage load(Storage &storage, const std::string &path);
    static TiledImage from_bytes(std::vector<std::byte> bytes);

    const MatrixHeader &header() const { return header_; }
    std::span<const std::byte> bytes() const { return bytes_; }
    /// Payload bytes of tile rows [first, first + count).
    std::span<const std::byte> tile_row_bytes(uint64_t first,
                                              uint64_t count = 1) const;

private:
    MatrixHeader header_;
    std::vector<std::byte> bytes_;
};

struct MatrixStats {
    TileStats aggregate;
    uint64_t num_tiles = 0;
    uint64_t file_bytes = 0;
    uint64_t index_bytes = 0;         // SCSR+COO index regions only
    uint64_t record_header_bytes = 0; // 16 bytes per tile record
    uint64_t scsr_formula_bytes = 0;  // sum of scsr_size over tiles
    uint64_t dcsc_formula_bytes = 0;  // sum of dcsc_size over tiles
    std::vector<TileStats> per_tile;
};

/// Read-only scan of an image. Collects per-tile stats when
/// `keep_per_tile` is set (desk-scale graphs only).
MatrixStats matrix_stats(Storage &storage, const std::string &path,
                         bool keep_per_tile = false);
MatrixStats matrix_stats(const TiledImage &image, bool keep_per_tile = false);

/// Decodes a whole image back to global (u, v, w) edges sorted by (u, v).
std::vector<Edge> decode_image(const TiledImage &image);

/// Streaming scan counting non-zeros per column. For a transposed adjacency
/// image this is the out-degree vector of the forward graph.
std::vector<uint64_t> column_nnz_counts(Storage &storage,
                                        const std::string &path);

} // namespace semmat

#endif
