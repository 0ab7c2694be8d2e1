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
#include "semmat/scsr.h"

#include <algorithm>
#include <cstring>

namespace semmat {

namespace {

void put_bytes(std::vector<std::byte> &out, const void *src, size_t n) {
    const auto *p = static_cast<const std::byte *>(src);
    out.insert(out.end(), p, p + n);
}

void put_u16(std::vector<std::byte> &out, uint16_t v) { put_bytes(out, &v, 2); }
void put_u32(std::vector<std::byte> &out, uint32_t v) { put_bytes(out, &v, 4); }
void put_u64(std::vector<std::byte> &out, uint64_t v) { put_bytes(out, &v, 8); }
void put_f64(std::vector<std::byte> &out, double v) { put_bytes(out, &v, 8); }

uint32_t get_u32(const std::byte *p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

uint64_t get_u64(const std::byte *p) {
    uint64_t v;
    std::memcpy(&v, p, 8);
    return v;
}

} // namespace

uint64_t MatrixHeader::payload_bytes() const {
    uint64_t total = 0;
    for (const auto &tr : tile_rows)
        total += tr.bytes;
    return total;
}

uint32_t MatrixHeader::tile_row_height(uint64_t tr) const {
    const uint64_t begin = tr * tile_size;
    return static_cast<uint32_t>(std::min<uint64_t>(tile_size, n_rows - begin));
}

uint32_t MatrixHeader::tile_col_width(uint64_t tc) const {
    const uint64_t begin = tc * tile_size;
    return static_cast<uint32_t>(std::min<uint64_t>(tile_size, n_cols - begin));
}

void MatrixHeader::validate() const {
    if (!is_power_of_two(tile_size))
        throw data_error("tile size must be a power of two");
    if (tile_size > kMaxTileSize)
        throw data_error("tile size exceeds the 32768 format limit");
    if (n_rows == 0 || n_cols == 0)
        throw data_error("matrix dimensions must be positive");
    if (tile_rows.size() != num_tile_rows())
        throw data_error("tile row index size does not match dimensions");
    uint64_t expect = header_bytes();
    for (size_t i = 0; i < tile_rows.size(); ++i) {
        if (tile_rows[i].offset != expect)
            throw data_error("tile row ranges are not contiguous");
        expect += tile_rows[i].bytes;
    }
}

std::vector<std::byte> MatrixHeader::serialize() const {
    std::vector<std::byte> out;
    out.reserve(header_bytes());
    put_bytes(out, kSparseMagic, 8);
    put_u32(out, kFormatVersion);
    put_u32(out, tile_size);
    put_u64(out, n_rows);
    put_u64(out, n_cols);
    put_u32(out, static_cast<uint32_t>(value_kind));
    put_u32(out, 0);
    put_u64(out, tile_rows.size());
    for (const auto &tr : tile_rows) {
        put_u64(out, tr.offset);
        put_u64(out, tr.bytes);
    }
    return out;
}

MatrixHeader MatrixHeader::parse(std::span<const std::byte> bytes) {
    if (bytes.size() < kSparseHeaderFixedBytes)
        throw data_error("sparse image too small for header");
    if (std::memcmp(bytes.data(), kSparseMagic, 8) != 0)
        throw data_error("bad sparse image magic");
    MatrixHeader h;
    const std::byte *p = bytes.data();
    const uint32_t version = get_u32(p + 8);
    if (version != kFormatVersion)
        throw data_error("unsupported sparse image version");
    h.tile_size = get_u32(p + 12);
    h.n_rows = get_u64(p + 16);
    h.n_cols = get_u64(p + 24);
    const uint32_t kind = get_u32(p + 32);
    if (kind > 1)
        throw data_error("unknown value kind");
    h.value_kind = static_cast<ValueKind>(kind);
    const uint64_t ntr = get_u64(p + 40);
    if (bytes.size() < kSparseHeaderFixedBytes + 16 * ntr)
        throw data_error("sparse image truncated in tile row index");
    h.tile_rows.resize(ntr);
    for (uint64_t i = 0; i < ntr; ++i) {
        h.tile_rows[i].offset = get_u64(p + 48 + 16 * i);
        h.tile_rows[i].bytes = get_u64(p + 48 + 16 * i + 8);
    }
    h.validate();
    return h;
}

MatrixHeader MatrixHeader::read(ReadFile &file) {
    std::vector<std::byte> fixed(kSparseHeaderFixedBytes);
    if (file.size() < fixed.size())
        throw data_error("sparse image too small for header");
    file.read_at(0, fixed);
    const uint64_t ntr = get_u64(fixed.data() + 40);
    std::vector<std::byte> full(kSparseHeaderFixedBytes + 16 * ntr);
    if (file.size() < full.size())
        throw data_error("sparse image truncated in tile row index");
    std::memcpy(full.data(), fixed.data(), fixed.size());
    file.read_at(kSparseHeaderFixedBytes,
                 std::span(full).subspan(kSparseHeaderFixedBytes));
    return parse(full);
}

uint64_t scsr_size(const TileStats &stats) {
    if (stats.nnz < stats.nnr || stats.nnz < stats.nnc)
        throw data_error("tile stats violate nnr <= nnz and nnc <= nnz");
    return 2 * stats.nnr + (2 + uint64_t(stats.value_width)) * stats.nnz;
}

uint64_t dcsc_size(const TileStats &stats) {
    if (stats.nnz < stats.nnr || stats.nnz < stats.nnc)
        throw data_error("tile stats violate nnr <= nnz and nnc <= nnz");
    return (2 + 2 + 4) * stats.nnc + (2 + uint64_t(stats.value_width)) * stats.nnz;
}

void encode_tile(uint32_t tile_col_id, std::span<const Triple> triples,
                 ValueKind kind, std::vector<std::byte> &out) {
    if (triples.empty())
        return;

    uint32_t nnz_scsr = 0;
    uint32_t num_coo = 0;
    for (size_t i = 0; i < triples.size();) {
        size_t j = i;
        while (j < triples.size() && triples[j].row == triples[i].row)
            ++j;
        const size_t run = j - i;
        if (run == 1)
            ++num_coo;
        else
            nnz_scsr += static_cast<uint32_t>(run);
        i = j;
    }

    const uint32_t c = value_bytes(kind);
    const size_t header_at = out.size();
    put_u32(out, tile_col_id);
    put_u32(out, 0); // record_len, patched below
    put_u32(out, nnz_scsr);
    put_u32(out, num_coo);

    std::vector<double> values;
    values.reserve(c ? triples.size() : 0);

    // SCSR region: multi-entry rows in ascending row order.
    int64_t prev = -1;
    for (size_t i = 0; i < triples.size();) {
        size_t j = i;
        while (j < triples.size() && triples[j].row == triples[i].row)
            ++j;
        if (j - i >= 2) {
            const uint32_t row = triples[i].row;
            if (static_cast<int64_t>(row) <= prev ||
                row >= kMaxTileSize)
                throw data_error("encode: bad row ordering or range");
            prev = row;
            put_u16(out, static_cast<uint16_t>(0x8000u | row));
            int64_t prev_col = -1;
            for (size_t e = i; e < j; ++e) {
                if (static_cast<int64_t>(triples[e].col) <= prev_col)
                    throw data_error("encode: duplicate or unsorted column");
                if (triples[e].col >= kMaxTileSize)
                    throw data_error("encode: column id out of range");
                prev_col = triples[e].col;
                put_u16(out, static_cast<uint16_t>(triples[e].col));
                if (c)
                    values.push_back(triples[e].value);
            }
        }
        i = j;
    }

    // COO region: single-entry rows, already in ascending row order.
    for (size_t i = 0; i < triples.size();) {
        size_t j = i;
        while (j < triples.size() && triples[j].row == triples[i].row)
            ++j;
        if (j - i == 1) {
            put_u16(out, static_cast<uint16_t>(triples[i].row));
            put_u16(out, static_cast<uint16_t>(triples[i].col));
            if (c)
                values.push_back(triples[i].value);
        }
        i = j;
    }

    for (double v : values)
        put_f64(out, v);

    const uint32_t record_len = static_cast<uint32_t>(out.size() - header_at);
    std::memcpy(out.data() + header_at + 4, &record_len, 4);
}

TileRecordView parse_tile_record(std::span<const std::byte> bytes,
                                 ValueKind kind) {
    if (bytes.size() < kTileRecordHeaderBytes)
        throw data_error("tile record truncated in header");
    TileRecordView rec;
    rec.tile_col_id = get_u32(bytes.data());
    rec.record_len = get_u32(bytes.data() + 4);
    rec.nnz_scsr = get_u32(bytes.data() + 8);
    rec.num_coo = get_u32(bytes.data() + 12);
    if (rec.record_len < kTileRecordHeaderBytes || rec.record_len > bytes.size())
        throw data_error("tile record length out of bounds");

    const uint64_t value_len = uint64_t(value_bytes(kind)) * rec.nnz();
    const uint64_t body = rec.record_len - kTileRecordHeaderBytes;
    if (body < value_len + 4ull * rec.num_coo + 2ull * rec.nnz_scsr)
        throw data_error("tile record truncated in value region");
    const uint64_t index_len = body - value_len;
    rec.index_region = bytes.subspan(kTileRecordHeaderBytes, index_len);
    rec.value_region =
        bytes.subspan(kTileRecordHeaderBytes + index_len, value_len);
    return rec;
}

std::vector<Triple> decode_tile(const TileRecordView &record, ValueKind kind,
                                uint32_t row_limit, uint32_t col_limit) {
    std::vector<Triple> scsr;
    std::vector<Triple> coo;
    scsr.reserve(record.nnz_scsr);
    coo.reserve(record.num_coo);
    uint64_t seen = 0;
    detail::walk_tile_record(record, kind, row_limit, col_limit,
                             [&](uint32_t r, uint32_t c, double v) {
                                 if (seen < record.nnz_scsr)
                                     scsr.push_back({r, c, v});
                                 else
                                     coo.push_back({r, c, v});
                                 ++seen;
                             });
    // The region lengths implied by the walk must consume the index region
    // exactly.
    const uint64_t scsr_rows = [&] {
        uint64_t rows = 0;
        int64_t prev = -1;
        for (const auto &t : scsr)
            if (static_cast<int64_t>(t.row) != prev) {
                ++rows;
                prev = t.row;
            }
        return rows;
    }();
    const uint64_t expect_index =
        2 * scsr_rows + 2ull * record.nnz_scsr + 4ull * record.num_coo;
    if (expect_index != record.index_region.size())
        throw data_error("tile record index region has trailing bytes");

    std::vector<Triple> out;
    out.reserve(scsr.size() + coo.size());
    size_t i = 0, j = 0;
    while (i < scsr.size() && j < coo.size()) {
        if (scsr[i].row == coo[j].row)
            throw data_error("COO row also present among SCSR rows");
        if (scsr[i].row < coo[j].row)
            out.push_back(scsr[i++]);
        else
            out.push_back(coo[j++]);
    }
    out.insert(out.end(), scsr.begin() + i, scsr.end());
    out.insert(out.end(), coo.begin() + j, coo.end());
    return out;
}

TiledImage TiledImage::load(Storage &storage, const std::string &path) {
    auto file = storage.open_read(path);
    std::vector<std::byte> bytes(file->size());
    file->read_at(0, bytes);
    return from_bytes(std::move(bytes));
}

TiledImage TiledImage::from_bytes(std::vector<std::byte> bytes) {
    TiledImage img;
    img.header_ = MatrixHeader::parse(bytes);
    if (img.header_.file_bytes() != bytes.size())
        throw data_error("sparse image size does not match its index");
    img.bytes_ = std::move(bytes);
    return img;
}

std::span<const std::byte> TiledImage::tile_row_bytes(uint64_t first,
                                                      uint64_t count) const {
    const auto &rows = header_.tile_rows;
    if (first + count > rows.size())
        throw data_error("tile row range out of bounds");
    uint64_t bytes = 0;
    for (uint64_t i = first; i < first + count; ++i)
        bytes += rows[i].bytes;
    return std::span(bytes_).subspan(rows[first].offset, bytes);
}

namespace {

template <typename RowBytesFn>
MatrixStats scan_stats(const MatrixHeader &header, RowBytesFn &&row_bytes,
                       bool keep_per_tile) {
    MatrixStats stats;
    stats.aggregate.value_width = value_bytes(header.value_kind);
    stats.file_bytes = header.file_bytes();
    std::vector<uint32_t> cols;
    for (uint64_t tr = 0; tr < header.num_tile_rows(); ++tr) {
        std::vector<std::byte> buf = row_bytes(tr);
        std::span<const std::byte> rest(buf);
        const uint32_t row_limit = header.tile_row_height(tr);
        int64_t prev_col_id = -1;
        while (!rest.empty()) {
            auto rec = parse_tile_record(rest, header.value_kind);
            if (static_cast<int64_t>(rec.tile_col_id) <= prev_col_id)
                throw data_error("tile records not ascending by column");
            if (rec.tile_col_id >= header.num_tile_cols())
                throw data_error("tile column id out of range");
            prev_col_id = rec.tile_col_id;

            TileStats tile;
            tile.value_width = value_bytes(header.value_kind);
            cols.clear();
            int64_t prev_row = -1;
            detail::walk_tile_record(
                rec, header.value_kind, row_limit,
                header.tile_col_width(rec.tile_col_id),
                [&](uint32_t r, uint32_t c, double) {
                    ++tile.nnz;
                    if (static_cast<int64_t>(r) != prev_row) {
                        ++tile.nnr;
                        prev_row = r;
                    }
                    cols.push_back(c);
                });
            // COO rows restart the walk's row sequence, so recount columns
            // for nnc and rows via the sorted union.
            std::sort(cols.begin(), cols.end());
            tile.nnc = std::unique(cols.begin(), cols.end()) - cols.begin();

            stats.num_tiles += 1;
            stats.aggregate.nnz += tile.nnz;
            stats.aggregate.nnr += tile.nnr;
            stats.aggregate.nnc += tile.nnc;
            stats.index_bytes += rec.index_region.size();
            stats.record_header_bytes += kTileRecordHeaderBytes;
            stats.scsr_formula_bytes += scsr_size(tile);
            stats.dcsc_formula_bytes += dcsc_size(tile);
            if (keep_per_tile)
                stats.per_tile.push_back(tile);
            rest = rest.subspan(rec.record_len);
        }
    }
    return stats;
}

} // namespace

MatrixStats matrix_stats(Storage &storage, const std::string &path,
                         bool keep_per_tile) {
    auto file = storage.open_read(path);
    MatrixHeader header = MatrixHeader::read(*file);
    if (header.file_bytes() != file->size())
        throw data_error("sparse image size does not match its index");
    return scan_stats(
        header,
        [&](uint64_t tr) {
            std::vector<std::byte> buf(header.tile_rows[tr].bytes);
            if (!buf.empty())
                file->read_at(header.tile_rows[tr].offset, buf);
            return buf;
        },
        keep_per_tile);
}

MatrixStats matrix_stats(const TiledImage &image, bool keep_per_tile) {
    return scan_stats(
        image.header(),
        [&](uint64_t tr) {
            auto s = image.tile_row_bytes(tr);
            return std::vector<std::byte>(s.begin(), s.end());
        },
        keep_per_tile);
}

std::vector<uint64_t> column_nnz_counts(Storage &storage,
                                        const std::string &path) {
    auto file = storage.open_read(path);
    const MatrixHeader header = MatrixHeader::read(*file);
    std::vector<uint64_t> counts(header.n_cols, 0);
    std::vector<std::byte> buf;
    for (uint64_t tr = 0; tr < header.num_tile_rows(); ++tr) {
        buf.resize(header.tile_rows[tr].bytes);
        if (buf.empty())
            continue;
        file->read_at(header.tile_rows[tr].offset, buf);
        std::span<const std::byte> rest(buf);
        while (!rest.empty()) {
            auto rec = parse_tile_record(rest, header.value_kind);
            const uint64_t col_base = uint64_t(rec.tile_col_id) * header.tile_size;
            detail::walk_tile_record(rec, header.value_kind,
                                     header.tile_row_height(tr),
                                     header.tile_col_width(rec.tile_col_id),
                                     [&](uint32_t, uint32_t c, double) {
                                         ++counts[col_base + c];
                                     });
            rest = rest.subspan(rec.record_len);
        }
    }
    return counts;
}

std::vector<Edge> decode_image(const TiledImage &image) {
    const MatrixHeader &h = image.header();
    std::vector<Edge> edges;
    for (uint64_t tr = 0; tr < h.num_tile_rows(); ++tr) {
        std::span<const std::byte> rest = image.tile_row_bytes(tr);
        const uint64_t row_base = tr * h.tile_size;
        while (!rest.empty()) {
            auto rec = parse_tile_record(rest, h.value_kind);
            const uint64_t col_base = uint64_t(rec.tile_col_id) * h.tile_size;
            auto triples = decode_tile(rec, h.value_kind, h.tile_row_height(tr),
                                       h.tile_col_width(rec.tile_col_id));
            for (const auto &t : triples)
                edges.push_back({row_base + t.row, col_base + t.col, t.value});
            rest = rest.subspan(rec.record_len);
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return a.u != b.u ? a.u < b.u : a.v < b.v;
    });
    return edges;
}

} // namespace semmat
