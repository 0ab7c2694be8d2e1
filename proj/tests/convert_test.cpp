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

#include <gtest/gtest.h>

#include "semmat/generators.h"
#include "test_util.h"

using namespace semmat;
using namespace semmat::testing;

TEST(Convert, EmptyStream) {
    MemStorage storage;
    const auto path = make_image(storage, {}, 16, 16, 16);
    TiledImage image = TiledImage::load(storage, path);
    EXPECT_EQ(image.header().n_rows, 16u);
    EXPECT_EQ(image.header().num_tile_rows(), 1u);
    EXPECT_EQ(image.header().tile_rows[0].bytes, 0u);
    EXPECT_TRUE(decode_image(image).empty());
}

TEST(Convert, ThreeEdgeToy) {
    MemStorage storage;
    const std::vector<Edge> edges{{0, 1}, {0, 3}, {5, 2}};
    const auto path = make_image(storage, edges, 16, 16, 16);

    TiledImage image = TiledImage::load(storage, path);
    auto rest = image.tile_row_bytes(0);
    auto rec = parse_tile_record(rest, ValueKind::kBinary);
    EXPECT_EQ(rec.nnz_scsr, 2u);
    EXPECT_EQ(rec.num_coo, 1u);
    EXPECT_EQ(rec.record_len, rest.size());
    EXPECT_EQ(decode_image(image), edges);
}

TEST(Convert, RmatRoundTripAgainstRawEdgeOracle) {
    RmatParams params;
    params.scale = 10;
    params.edge_factor = 10;
    params.seed = 5;
    auto edges = gen_rmat(params);
    ASSERT_GE(edges.size(), 9000u); // ~10k unique edges

    // Oracle: independently sorted, deduplicated edge set.
    auto expected = sorted_dedup(edges);

    MemStorage storage;
    const auto path =
        make_image(storage, edges, 1ull << 10, 1ull << 10, 128);
    TiledImage image = TiledImage::load(storage, path);
    EXPECT_EQ(decode_image(image), expected);
}

TEST(Convert, TransposeEmitsTransposedImage) {
    MemStorage storage;
    const std::vector<Edge> edges{{0, 5}, {2, 1}, {3, 3}};
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = 8;
    opt.n_cols = 8;
    opt.tile_size = 8;
    opt.transpose = true;
    convert(src, storage, "t.spm", opt);

    TiledImage image = TiledImage::load(storage, "t.spm");
    const std::vector<Edge> expected{{1, 2}, {3, 3}, {5, 0}};
    EXPECT_EQ(decode_image(image), expected);
}

TEST(Convert, SymmetrizeAddsMirrorEdges) {
    MemStorage storage;
    const std::vector<Edge> edges{{0, 5}, {2, 2}};
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = 8;
    opt.n_cols = 8;
    opt.tile_size = 8;
    opt.symmetrize = true;
    convert(src, storage, "s.spm", opt);

    TiledImage image = TiledImage::load(storage, "s.spm");
    const std::vector<Edge> expected{{0, 5}, {2, 2}, {5, 0}};
    EXPECT_EQ(decode_image(image), expected);
}

TEST(Convert, IdempotentByteForByte) {
    RmatParams params;
    params.scale = 8;
    params.edge_factor = 6;
    params.seed = 21;
    auto edges = gen_rmat(params);

    MemStorage storage;
    const auto path = make_image(storage, edges, 256, 256, 64);
    TiledImage image = TiledImage::load(storage, path);
    auto decoded = decode_image(image);

    VectorEdgeSource src(decoded);
    ConvertOptions opt;
    opt.n_rows = 256;
    opt.n_cols = 256;
    opt.tile_size = 64;
    convert(src, storage, "again.spm", opt);
    EXPECT_EQ(storage.read_all(path), storage.read_all("again.spm"));
}

TEST(Convert, ExternalSortMatchesInMemorySort) {
    RmatParams params;
    params.scale = 9;
    params.edge_factor = 8;
    params.seed = 77;
    auto edges = gen_rmat(params);

    MemStorage storage;
    const auto big = make_image(storage, edges, 512, 512, 64);

    // Force spills: a budget of ~100 edges produces dozens of runs.
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = 512;
    opt.n_cols = 512;
    opt.tile_size = 64;
    opt.sort_memory_budget = 100 * sizeof(Edge);
    MemStorage temp;
    opt.temp_storage = &temp;
    convert(src, storage, "ext.spm", opt);

    EXPECT_EQ(storage.read_all(big), storage.read_all("ext.spm"));
    // Spilled runs are cleaned up.
    EXPECT_EQ(temp.totals().bytes_written, temp.totals().bytes_read);
}

TEST(Convert, DuplicatePolicy) {
    MemStorage storage;
    // Binary: duplicates collapse.
    {
        std::vector<Edge> edges{{1, 2}, {1, 2}, {0, 1}};
        VectorEdgeSource src(edges);
        ConvertOptions opt;
        opt.n_rows = opt.n_cols = 8;
        opt.tile_size = 8;
        convert(src, storage, "dup.spm", opt);
        TiledImage image = TiledImage::load(storage, "dup.spm");
        EXPECT_EQ(decode_image(image).size(), 2u);
    }
    // Float64: duplicates are an error.
    {
        std::vector<Edge> edges{{1, 2, 0.5}, {1, 2, 0.7}};
        VectorEdgeSource src(edges);
        ConvertOptions opt;
        opt.n_rows = opt.n_cols = 8;
        opt.tile_size = 8;
        opt.value_kind = ValueKind::kFloat64;
        EXPECT_THROW(convert(src, storage, "dupw.spm", opt), data_error);
    }
}

TEST(Convert, IdOutOfRange) {
    MemStorage storage;
    std::vector<Edge> edges{{7, 9}};
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = opt.n_cols = 8;
    opt.tile_size = 8;
    EXPECT_THROW(convert(src, storage, "oob.spm", opt), data_error);
}

TEST(Convert, WeightedValuesSurviveRoundTrip) {
    MemStorage storage;
    std::vector<Edge> edges{{0, 0, 2.5}, {0, 1, -1.25}, {3, 2, 1e-9}};
    VectorEdgeSource src(edges);
    ConvertOptions opt;
    opt.n_rows = opt.n_cols = 8;
    opt.tile_size = 8;
    opt.value_kind = ValueKind::kFloat64;
    convert(src, storage, "w.spm", opt);
    TiledImage image = TiledImage::load(storage, "w.spm");
    EXPECT_EQ(decode_image(image), edges);
}

TEST(Convert, OnePassIoAccounting) {
    // The edge source is read once and the image written once: per-path
    // byte counters equal the file sizes (the header backfill lands inside
    // the one-block slack).
    RmatParams params;
    params.scale = 9;
    params.edge_factor = 8;
    params.seed = 3;
    auto edges = gen_rmat(params);

    MemStorage storage;
    write_edge_list(storage, "edges.txt", edges);
    storage.reset_counters();

    EdgeListTextSource src(storage, "edges.txt");
    ConvertOptions opt;
    opt.n_rows = opt.n_cols = 512;
    opt.tile_size = 64;
    convert(src, storage, "img.spm", opt);

    const auto src_counters = storage.counters("edges.txt");
    const auto dst_counters = storage.counters("img.spm");
    EXPECT_EQ(src_counters.bytes_read, storage.file_size("edges.txt"));
    EXPECT_EQ(src_counters.bytes_written, 0u);
    // Payload written once in order plus one header backfill.
    const uint64_t image_size = storage.file_size("img.spm");
    EXPECT_GE(dst_counters.bytes_written, image_size);
    EXPECT_LE(dst_counters.bytes_written, image_size + 4096);
    EXPECT_EQ(dst_counters.bytes_read, 0u);
}

TEST(EdgeListText, ParsesCommentsAndWeights) {
    MemStorage storage;
    const std::string text =
        "# a comment\n"
        "0 1\n"
        "  2 3 0.5\n"
        "\n"
        "4 5\n";
    std::vector<std::byte> bytes(text.size());
    std::memcpy(bytes.data(), text.data(), text.size());
    storage.put("e.txt", std::move(bytes));

    EdgeListTextSource src(storage, "e.txt");
    std::vector<Edge> edges;
    Edge e;
    while (src.next(e))
        edges.push_back(e);
    ASSERT_EQ(edges.size(), 3u);
    EXPECT_EQ(edges[0], (Edge{0, 1, 1.0}));
    EXPECT_EQ(edges[1], (Edge{2, 3, 0.5}));
    EXPECT_EQ(edges[2], (Edge{4, 5, 1.0}));
}

TEST(MatrixMarket, SymmetricPattern) {
    MemStorage storage;
    const std::string text =
        "%%MatrixMarket matrix coordinate pattern symmetric\n"
        "% comment\n"
        "4 4 3\n"
        "1 1\n"
        "2 1\n"
        "4 3\n";
    std::vector<std::byte> bytes(text.size());
    std::memcpy(bytes.data(), text.data(), text.size());
    storage.put("m.mtx", std::move(bytes));

    MatrixMarketSource src(storage, "m.mtx");
    EXPECT_EQ(src.n_rows(), 4u);
    std::vector<Edge> edges;
    Edge e;
    while (src.next(e))
        edges.push_back(e);
    // (0,0) once, (1,0)+(0,1), (3,2)+(2,3).
    EXPECT_EQ(edges.size(), 5u);

    ConvertOptions opt;
    opt.n_rows = src.n_rows();
    opt.n_cols = src.n_cols();
    opt.tile_size = 4;
    VectorEdgeSource vsrc(edges);
    convert(vsrc, storage, "mm.spm", opt);
    TiledImage image = TiledImage::load(storage, "mm.spm");
    EXPECT_EQ(decode_image(image).size(), 5u);
}
