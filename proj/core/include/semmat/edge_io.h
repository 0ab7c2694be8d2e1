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
#ifndef SEMMAT_EDGE_IO_H
#define SEMMAT_EDGE_IO_H

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "semmat/storage.h"
#include "semmat/types.h"

namespace semmat {

/// Pull-based edge stream feeding the converter.
class EdgeSource {
public:
    virtual ~EdgeSource() = default;
    /// Returns false at end of stream.
    virtual bool next(Edge &edge) = 0;
};

class VectorEdgeSource final : public EdgeSource {
public:
    explicit VectorEdgeSource(std::vector<Edge> edges)
        : edges_(std::move(edges)) {}
    bool next(Edge &edge) override {
        if (pos_ >= edges_.size())
            return false;
        edge = edges_[pos_++];
        return true;
    }

private:
    std::vector<Edge> edges_;
    size_t pos_ = 0;
};

/// Text edge list: one "u v [w]" per line, `#` comments, whitespace
/// separated, 0-based vertex ids.
class EdgeListTextSource final : public EdgeSource {
public:
    EdgeListTextSource(Storage &storage, const std::string &path);
    ~EdgeListTextSource() override;
    bool next(Edge &edge) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Matrix Market coordinate format (pattern, real or integer; general or
/// symmetric). Symmetric inputs emit both (u,v) and (v,u) for off-diagonal
/// entries. Ids are converted to 0-based.
class MatrixMarketSource final : public EdgeSource {
public:
    MatrixMarketSource(Storage &storage, const std::string &path);
    ~MatrixMarketSource() override;
    bool next(Edge &edge) override;

    uint64_t n_rows() const;
    uint64_t n_cols() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Writes edges as the text edge list format, sorted order preserved.
void write_edge_list(Storage &storage, const std::string &path,
                     const std::vector<Edge> &edges, bool with_weights = false);

} // namespace semmat

#endif
