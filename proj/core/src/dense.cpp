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

#include <cstring>

#include "semmat/rng.h"

namespace semmat {

namespace {

void put_header(std::byte *out, uint64_t rows, uint64_t cols) {
    std::memcpy(out, kDenseMagic, 8);
    const uint32_t version = 1, reserved = 0;
    std::memcpy(out + 8, &version, 4);
    std::memcpy(out + 12, &reserved, 4);
    std::memcpy(out + 16, &rows, 8);
    std::memcpy(out + 24, &cols, 8);
}

DenseImageInfo parse_header(std::span<const std::byte> bytes,
                            const std::string &path) {
    if (bytes.size() < kDenseHeaderBytes)
        throw data_error("dense image too small: " + path);
    if (std::memcmp(bytes.data(), kDenseMagic, 8) != 0)
        throw data_error("bad dense image magic: " + path);
    uint32_t version;
    std::memcpy(&version, bytes.data() + 8, 4);
    if (version != 1)
        throw data_error("unsupported dense image version: " + path);
    DenseImageInfo info;
    std::memcpy(&info.n_rows, bytes.data() + 16, 8);
    std::memcpy(&info.n_cols, bytes.data() + 24, 8);
    return info;
}

} // namespace

DenseMatrix::DenseMatrix(uint64_t rows, uint64_t cols,
                         uint64_t row_interval_size, uint32_t num_domains)
    : rows_(rows), cols_(cols), row_interval_size_(row_interval_size),
      num_domains_(num_domains), data_(rows * cols, 0.0) {
    if (!is_power_of_two(row_interval_size_))
        throw data_error("row interval size must be a power of two");
    if (num_domains_ == 0)
        throw data_error("at least one placement domain is required");
}

DenseMatrix DenseMatrix::random(uint64_t rows, uint64_t cols, uint64_t seed) {
    DenseMatrix m(rows, cols);
    Rng rng(seed);
    for (double &x : m.data_)
        x = rng.next_double();
    return m;
}

DenseMatrix DenseMatrix::identity(uint64_t n) {
    DenseMatrix m(n, n);
    for (uint64_t i = 0; i < n; ++i)
        m.at(i, i) = 1.0;
    return m;
}

void DenseMatrix::store(Storage &storage, const std::string &path) const {
    auto file = storage.create(path, kDenseHeaderBytes + bytes());
    std::byte header[kDenseHeaderBytes];
    put_header(header, rows_, cols_);
    file->write_at(0, header);
    // Stream the payload in large chunks.
    const auto *src = reinterpret_cast<const std::byte *>(data_.data());
    const uint64_t total = bytes();
    const uint64_t chunk = 8ull << 20;
    for (uint64_t off = 0; off < total; off += chunk) {
        const uint64_t n = std::min(chunk, total - off);
        file->write_at(kDenseHeaderBytes + off, std::span(src + off, n));
    }
    file->flush();
}

DenseMatrix DenseMatrix::load(Storage &storage, const std::string &path) {
    auto file = storage.open_read(path);
    std::vector<std::byte> header(kDenseHeaderBytes);
    file->read_at(0, header);
    const DenseImageInfo info = parse_header(header, path);
    DenseMatrix m(info.n_rows, info.n_cols);
    if (file->size() != kDenseHeaderBytes + m.bytes())
        throw data_error("dense image truncated: " + path);
    auto *dst = reinterpret_cast<std::byte *>(m.data_.data());
    const uint64_t total = m.bytes();
    const uint64_t chunk = 8ull << 20;
    for (uint64_t off = 0; off < total; off += chunk) {
        const uint64_t n = std::min(chunk, total - off);
        file->read_at(kDenseHeaderBytes + off, std::span(dst + off, n));
    }
    return m;
}

VerticalPartitionPlan VerticalPartitionPlan::even(uint64_t total_cols,
                                                  uint64_t cols_per_pass) {
    if (total_cols == 0 || cols_per_pass == 0)
        throw data_error("vertical partition plan needs positive widths");
    return {total_cols, std::min(cols_per_pass, total_cols)};
}

ColRange VerticalPartitionPlan::pass_range(uint64_t pass) const {
    if (pass >= num_passes())
        throw data_error("vertical partition pass out of range");
    const uint64_t begin = pass * cols_per_pass;
    return {begin, std::min(begin + cols_per_pass, total_cols)};
}

DenseImageInfo dense_image_info(Storage &storage, const std::string &path) {
    auto file = storage.open_read(path);
    std::vector<std::byte> header(kDenseHeaderBytes);
    file->read_at(0, header);
    return parse_header(header, path);
}

DenseMatrix load_vertical_partition(Storage &storage, const std::string &path,
                                    ColRange range, uint64_t budget_bytes) {
    auto file = storage.open_read(path);
    std::vector<std::byte> header(kDenseHeaderBytes);
    file->read_at(0, header);
    const DenseImageInfo info = parse_header(header, path);
    if (range.begin >= range.end || range.end > info.n_cols)
        throw data_error("column range out of bounds for " + path);
    if (file->size() != kDenseHeaderBytes + info.n_rows * info.n_cols * 8)
        throw data_error("dense image truncated: " + path);

    const uint64_t width = range.width();
    const uint64_t need = info.n_rows * width * 8;
    if (budget_bytes != 0 && need > budget_bytes)
        throw budget_error("vertical partition of " + std::to_string(need) +
                           " bytes exceeds budget of " +
                           std::to_string(budget_bytes));

    DenseMatrix m(info.n_rows, width);
    auto *dst = reinterpret_cast<std::byte *>(m.data().data());
    if (width == info.n_cols) {
        // Full width: one sequential streamed read.
        const uint64_t total = need;
        const uint64_t chunk = 8ull << 20;
        for (uint64_t off = 0; off < total; off += chunk) {
            const uint64_t n = std::min(chunk, total - off);
            file->read_at(kDenseHeaderBytes + off, std::span(dst + off, n));
        }
        return m;
    }
    // Column slice: one read per row segment, ascending offsets, each needed
    // byte read exactly once.
    const uint64_t row_bytes = info.n_cols * 8;
    const uint64_t seg = width * 8;
    for (uint64_t r = 0; r < info.n_rows; ++r) {
        file->read_at(kDenseHeaderBytes + r * row_bytes + range.begin * 8,
                      std::span(dst + r * seg, seg));
    }
    return m;
}

} // namespace semmat
