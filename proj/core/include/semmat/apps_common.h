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
#ifndef SEMMAT_APPS_COMMON_H
#define SEMMAT_APPS_COMMON_H

#include <string>
#include <vector>

#include "semmat/engine.h"

namespace semmat {

/// Whether an application drives the in-memory kernel or streams the sparse
/// matrix through the semi-external engine each iteration.
enum class ExecMode { kInMemory, kSemiExternal };

struct TraceRow {
    uint32_t iter = 0;
    std::string metric;
    double value = 0;
    double wall_seconds = 0;
};

/// Iteration trace, emitted as CSV: iter,metric,value,wall_seconds.
class TraceLog {
public:
    void add(uint32_t iter, std::string metric, double value,
             double wall_seconds) {
        rows_.push_back({iter, std::move(metric), value, wall_seconds});
    }
    const std::vector<TraceRow> &rows() const { return rows_; }
    std::string to_csv() const;
    void write_csv(Storage &storage, const std::string &path) const;

private:
    std::vector<TraceRow> rows_;
};

/// Runs one SpMM either in memory (image loaded once by the caller) or
/// semi-externally. Both paths produce bit-identical results.
class SpmmDriver {
public:
    SpmmDriver(Storage &storage, std::string image_path, ExecMode mode,
               EngineConfig config);

    DenseMatrix multiply(const DenseMatrix &in);

    const MatrixHeader &header() const { return header_; }
    const JobStats &last_stats() const { return stats_; }

private:
    Storage &storage_;
    std::string path_;
    ExecMode mode_;
    EngineConfig config_;
    MatrixHeader header_;
    std::unique_ptr<TiledImage> resident_; // in-memory mode only
    JobStats stats_;
};

} // namespace semmat

#endif
