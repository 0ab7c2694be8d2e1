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
#ifndef SEMMAT_DENSE_H
#define SEMMAT_DENSE_H

#include <span>
#include <vector>

#include "semmat/storage.h"
#include "semmat/types.h"

namespace semmat {

// Dense image layout (little-endian):
//   [0)  magic "SEMDENS1"
//   [8)  u32 version
//   [12) u32 reserved
//   [16) u64 n_rows
//   [24) u64 n_cols
//   [32) row-major IEEE-754 binary64 values.

inline constexpr char kDenseMagic[8] = {'S', 'E', 'M', 'D', 'E', 'N', 'S', '1'};
inline constexpr uint32_t kDenseHeaderBytes = 32;
inline constexpr uint64_t kDefaultRowInterval = 65536;

/// Row-major dense matrix. Rows are grouped into power-of-two row intervals
/// (a multiple of the sparse tile size), each owned by one logical placement
/// domain; on a UMA host the domain map is round-robin over one domain.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(uint64_t rows, uint64_t cols,
                uint64_t row_interval_size = kDefaultRowInterval,
                uint32_t num_domains = 1);

    static DenseMatrix random(uint64_t rows, uint64_t cols, uint64_t seed);
    static DenseMatrix identity(uint64_t n);

    uint64_t rows() const { return rows_; }
    uint64_t cols() const { return cols_; }
    uint64_t row_interval_size() const { return row_interval_size_; }
    uint32_t num_domains() const { return num_domains_; }

    double *row(uint64_t r) { return data_.data() + r * cols_; }
    const double *row(uint64_t r) const { return data_.data() + r * cols_; }
    double &at(uint64_t r, uint64_t c) { return data_[r * cols_ + c]; }
    double at(uint64_t r, uint64_t c) const { return data_[r * cols_ + c]; }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    uint64_t bytes() const { return data_.size() * sizeof(double); }

    uint64_t interval_of(uint64_t r) const { return r / row_interval_size_; }
    uint32_t domain_of_interval(uint64_t interval) const {
        return static_cast<uint32_t>(interval % num_domains_);
    }

    friend bool operator==(const DenseMatrix &a, const DenseMatrix &b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    // Image I/O.
    void store(Storage &storage, const std::string &path) const;
    static DenseMatrix load(Storage &storage, const std::string &path);

private:
    uint64_t rows_ = 0;
    uint64_t cols_ = 0;
    uint64_t row_interval_size_ = kDefaultRowInterval;
    uint32_t num_domains_ = 1;
    std::vector<double> data_;
};

struct ColRange {
    uint64_t begin = 0;
    uint64_t end = 0;
    uint64_t width() const { return end - begin; }
};

/// Vertical split of a P-column matrix into ceil(P / p') passes of complete
/// columns; ranges are disjoint, ordered and cover [0, P).
struct VerticalPartitionPlan {
    uint64_t total_cols = 0;
    uint64_t cols_per_pass = 0;

    static VerticalPartitionPlan even(uint64_t total_cols,
                                      uint64_t cols_per_pass);
    uint64_t num_passes() const {
        return div_ceil(total_cols, cols_per_pass);
    }
    ColRange pass_range(uint64_t pass) const;
};

struct DenseImageInfo {
    uint64_t n_rows = 0;
    uint64_t n_cols = 0;
};

DenseImageInfo dense_image_info(Storage &storage, const std::string &path);

/// Loads a column range of an on-storage dense image into memory. Each
/// needed byte is read exactly once, sequentially per row block. Throws
/// budget_error if the partition exceeds `budget_bytes` (0 = unlimited).
DenseMatrix load_vertical_partition(Storage &storage, const std::string &path,
                                    ColRange range, uint64_t budget_bytes = 0);

} // namespace semmat

#endif
