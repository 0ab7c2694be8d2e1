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
#ifndef SEMMAT_CONVERT_H
#define SEMMAT_CONVERT_H

#include <string>

#include "semmat/edge_io.h"
#include "semmat/scsr.h"
#include "semmat/storage.h"

namespace semmat {

struct ConvertOptions {
    uint64_t n_rows = 0;
    uint64_t n_cols = 0;
    uint32_t tile_size = kDefaultTileSize;
    ValueKind value_kind = ValueKind::kBinary;
    /// Emit the image of the transposed matrix.
    bool transpose = false;
    /// Emit both (u,v) and (v,u); self loops are emitted once.
    bool symmetrize = false;
    /// Edge buffer size before spilling sorted runs to temp storage.
    uint64_t sort_memory_budget = 512ull << 20;
    /// Where sorted runs spill. Defaults to the destination storage under
    /// `<dst_path>.sort.*` when null.
    Storage *temp_storage = nullptr;
};

/// Builds a tiled SCSR+COO image from an edge stream. The destination is
/// written once: payload sequentially, then a single backfill of the header
/// and tile-row index. Duplicate edges are deduplicated for binary matrices
/// and rejected for weighted ones. Ids at or beyond the declared dimensions
/// are an error.
void convert(EdgeSource &edges, Storage &dst, const std::string &dst_path,
             const ConvertOptions &options);

} // namespace semmat

#endif
