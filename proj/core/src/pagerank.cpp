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
#include "semmat/pagerank.h"

#include <chrono>
#include <cmath>

namespace semmat {

namespace {

std::string csv_escape(const std::string &s) {
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace

std::string TraceLog::to_csv() const {
    std::string out = "iter,metric,value,wall_seconds\n";
    char buf[128];
    for (const auto &row : rows_) {
        snprintf(buf, sizeof buf, "%u,%s,%.17g,%.6f\n", row.iter,
                 csv_escape(row.metric).c_str(), row.value, row.wall_seconds);
        out += buf;
    }
    return out;
}

void TraceLog::write_csv(Storage &storage, const std::string &path) const {
    const std::string csv = to_csv();
    auto file = storage.create(path, 0);
    file->write_at(0, std::as_bytes(std::span(csv.data(), csv.size())));
    file->flush();
}

SpmmDriver::SpmmDriver(Storage &storage, std::string image_path, ExecMode mode,
                       EngineConfig config)
    : storage_(storage), path_(std::move(image_path)), mode_(mode),
      config_(std::move(config)) {
    if (mode_ == ExecMode::kInMemory) {
        resident_ =
            std::make_unique<TiledImage>(TiledImage::load(storage_, path_));
        header_ = resident_->header();
    } else {
        auto file = storage_.open_read(path_);
        header_ = MatrixHeader::read(*file);
    }
}

DenseMatrix SpmmDriver::multiply(const DenseMatrix &in) {
    if (mode_ == ExecMode::kInMemory)
        return spmm(*resident_, in, config_.kernel);
    return spmm_sem(storage_, path_, in, config_, &stats_);
}

PageRankResult pagerank(Storage &storage, const std::string &adjt_path,
                        const PageRankOptions &options) {
    if (!(options.damping > 0.0) || !(options.damping < 1.0))
        throw data_error("pagerank: damping factor must lie in (0, 1)");

    SpmmDriver driver(storage, adjt_path, options.mode, options.engine);
    const MatrixHeader &header = driver.header();
    if (header.n_rows != header.n_cols)
        throw data_error("pagerank: adjacency matrix must be square");
    const uint64_t n = header.n_rows;
    const double d = options.damping;

    // Out-degree of vertex v = non-zeros in column v of the transposed image.
    const std::vector<uint64_t> degree = column_nnz_counts(storage, adjt_path);

    PageRankResult result;
    result.ranks.assign(n, 1.0 / static_cast<double>(n));
    for (uint64_t deg : degree)
        result.out_degree_sum += deg;

    DenseMatrix scaled(n, 1);
    const auto start = std::chrono::steady_clock::now();
    for (uint32_t iter = 0; iter < options.max_iters; ++iter) {
        double dangling_mass = 0.0;
        for (uint64_t v = 0; v < n; ++v) {
            if (degree[v] > 0) {
                scaled.at(v, 0) =
                    result.ranks[v] / static_cast<double>(degree[v]);
            } else {
                scaled.at(v, 0) = 0.0;
                dangling_mass += result.ranks[v];
            }
        }

        DenseMatrix contrib = driver.multiply(scaled);

        const double base =
            (1.0 - d) / static_cast<double>(n) +
            (options.dangling_redistribution
                 ? d * dangling_mass / static_cast<double>(n)
                 : 0.0);
        double delta = 0.0;
        for (uint64_t u = 0; u < n; ++u) {
            const double next = base + d * contrib.at(u, 0);
            delta += std::abs(next - result.ranks[u]);
            result.ranks[u] = next;
        }

        result.iterations = iter + 1;
        result.last_delta_l1 = delta;
        const double wall = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - start)
                                .count();
        result.trace.add(iter + 1, "delta_l1", delta, wall);
        if (options.tol > 0 && delta < options.tol)
            break;
    }
    return result;
}

} // namespace semmat
