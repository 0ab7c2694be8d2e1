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
#include "semmat/edge_io.h"

#include <charconv>
#include <cstring>

namespace semmat {

namespace {

/// Sequential line reader over a ReadFile, 1 MiB read granularity.
class LineReader {
public:
    LineReader(Storage &storage, const std::string &path)
        : file_(storage.open_read(path)), size_(file_->size()) {}

    bool next_line(std::string &line) {
        line.clear();
        for (;;) {
            if (pos_ >= fill_) {
                if (!refill())
                    return !line.empty();
            }
            const char c = buf_[pos_++];
            if (c == '\n')
                return true;
            if (c != '\r')
                line.push_back(c);
        }
    }

private:
    bool refill() {
        if (offset_ >= size_)
            return false;
        const uint64_t n = std::min<uint64_t>(buf_.size(), size_ - offset_);
        file_->read_at(offset_,
                       std::as_writable_bytes(std::span(buf_.data(), n)));
        offset_ += n;
        fill_ = n;
        pos_ = 0;
        return true;
    }

    std::unique_ptr<ReadFile> file_;
    uint64_t size_;
    uint64_t offset_ = 0;
    std::vector<char> buf_ = std::vector<char>(1 << 20);
    size_t pos_ = 0;
    size_t fill_ = 0;
};

const char *skip_ws(const char *p, const char *end) {
    while (p < end && (*p == ' ' || *p == '\t'))
        ++p;
    return p;
}

bool parse_u64(const char *&p, const char *end, uint64_t &out) {
    p = skip_ws(p, end);
    auto [next, ec] = std::from_chars(p, end, out);
    if (ec != std::errc{})
        return false;
    p = next;
    return true;
}

bool parse_f64(const char *&p, const char *end, double &out) {
    p = skip_ws(p, end);
    auto [next, ec] = std::from_chars(p, end, out);
    if (ec != std::errc{})
        return false;
    p = next;
    return true;
}

} // namespace

struct EdgeListTextSource::Impl {
    LineReader reader;
    std::string line;
    uint64_t line_no = 0;
};

EdgeListTextSource::EdgeListTextSource(Storage &storage,
                                       const std::string &path)
    : impl_(new Impl{LineReader(storage, path), {}, 0}) {}

EdgeListTextSource::~EdgeListTextSource() = default;

bool EdgeListTextSource::next(Edge &edge) {
    while (impl_->reader.next_line(impl_->line)) {
        ++impl_->line_no;
        const std::string &line = impl_->line;
        const char *p = line.data();
        const char *end = p + line.size();
        p = skip_ws(p, end);
        if (p == end || *p == '#')
            continue;
        Edge e;
        if (!parse_u64(p, end, e.u) || !parse_u64(p, end, e.v))
            throw data_error("edge list line " + std::to_string(impl_->line_no) +
                             ": expected two vertex ids");
        e.w = 1.0;
        p = skip_ws(p, end);
        if (p != end && !parse_f64(p, end, e.w))
            throw data_error("edge list line " + std::to_string(impl_->line_no) +
                             ": bad weight");
        edge = e;
        return true;
    }
    return false;
}

struct MatrixMarketSource::Impl {
    LineReader reader;
    std::string line;
    uint64_t line_no = 0;
    uint64_t n_rows = 0;
    uint64_t n_cols = 0;
    uint64_t declared_nnz = 0;
    bool pattern = false;
    bool symmetric = false;
    std::optional<Edge> mirrored;
};

MatrixMarketSource::MatrixMarketSource(Storage &storage,
                                       const std::string &path)
    : impl_(new Impl{LineReader(storage, path), {}, 0, 0, 0, 0, false, false, {}}) {
    if (!impl_->reader.next_line(impl_->line))
        throw data_error("matrix market file is empty");
    ++impl_->line_no;
    const std::string &banner = impl_->line;
    if (banner.rfind("%%MatrixMarket", 0) != 0)
        throw data_error("missing MatrixMarket banner");
    if (banner.find("matrix") == std::string::npos ||
        banner.find("coordinate") == std::string::npos)
        throw data_error("only coordinate matrices are supported");
    impl_->pattern = banner.find("pattern") != std::string::npos;
    impl_->symmetric = banner.find("symmetric") != std::string::npos;
    if (banner.find("complex") != std::string::npos ||
        banner.find("hermitian") != std::string::npos ||
        banner.find("skew") != std::string::npos)
        throw data_error("unsupported matrix market qualifier");

    // Size line: first non-comment line after the banner.
    for (;;) {
        if (!impl_->reader.next_line(impl_->line))
            throw data_error("matrix market file has no size line");
        ++impl_->line_no;
        const char *p = impl_->line.data();
        const char *end = p + impl_->line.size();
        p = skip_ws(p, end);
        if (p == end || *p == '%')
            continue;
        if (!parse_u64(p, end, impl_->n_rows) ||
            !parse_u64(p, end, impl_->n_cols) ||
            !parse_u64(p, end, impl_->declared_nnz))
            throw data_error("bad matrix market size line");
        break;
    }
}

MatrixMarketSource::~MatrixMarketSource() = default;

uint64_t MatrixMarketSource::n_rows() const { return impl_->n_rows; }
uint64_t MatrixMarketSource::n_cols() const { return impl_->n_cols; }

bool MatrixMarketSource::next(Edge &edge) {
    if (impl_->mirrored) {
        edge = *impl_->mirrored;
        impl_->mirrored.reset();
        return true;
    }
    while (impl_->reader.next_line(impl_->line)) {
        ++impl_->line_no;
        const char *p = impl_->line.data();
        const char *end = p + impl_->line.size();
        p = skip_ws(p, end);
        if (p == end || *p == '%')
            continue;
        uint64_t u, v;
        if (!parse_u64(p, end, u) || !parse_u64(p, end, v))
            throw data_error("matrix market line " +
                             std::to_string(impl_->line_no) + ": bad entry");
        if (u == 0 || v == 0)
            throw data_error("matrix market ids are 1-based");
        Edge e{u - 1, v - 1, 1.0};
        if (!impl_->pattern) {
            if (!parse_f64(p, end, e.w))
                throw data_error("matrix market line " +
                                 std::to_string(impl_->line_no) +
                                 ": missing value");
        }
        if (impl_->symmetric && e.u != e.v)
            impl_->mirrored = Edge{e.v, e.u, e.w};
        edge = e;
        return true;
    }
    return false;
}

void write_edge_list(Storage &storage, const std::string &path,
                     const std::vector<Edge> &edges, bool with_weights) {
    auto file = storage.create(path, 0);
    std::string buf;
    buf.reserve(1 << 20);
    uint64_t offset = 0;
    auto flush = [&] {
        file->write_at(offset, std::as_bytes(std::span(buf.data(), buf.size())));
        offset += buf.size();
        buf.clear();
    };
    for (const Edge &e : edges) {
        buf += std::to_string(e.u);
        buf += ' ';
        buf += std::to_string(e.v);
        if (with_weights) {
            buf += ' ';
            char tmp[32];
            snprintf(tmp, sizeof tmp, "%.17g", e.w);
            buf += tmp;
        }
        buf += '\n';
        if (buf.size() >= (1 << 20))
            flush();
    }
    if (!buf.empty())
        flush();
    file->flush();
}

} // namespace semmat
