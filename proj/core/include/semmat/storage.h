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
#ifndef SEMMAT_STORAGE_H
#define SEMMAT_STORAGE_H

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "semmat/types.h"

namespace semmat {

/// Byte counters kept per path and in aggregate. Tests use these to verify
/// the I/O contracts (single-pass reads, merged writes, one-pass conversion).
struct IoCounters {
    uint64_t bytes_read = 0;
    uint64_t bytes_written = 0;
    uint64_t read_calls = 0;
    uint64_t write_calls = 0;
};

class ReadFile {
public:
    virtual ~ReadFile() = default;
    virtual uint64_t size() const = 0;
    /// Fills dst from the given offset; throws io_error on a short read.
    virtual void read_at(uint64_t offset, std::span<std::byte> dst) = 0;
};

class WriteFile {
public:
    virtual ~WriteFile() = default;
    /// Positioned write; extends the file if needed.
    virtual void write_at(uint64_t offset, std::span<const std::byte> src) = 0;
    /// Completion of a job implies durability of everything written.
    virtual void flush() = 0;
};

/// Storage abstraction the engine and converters run against. Real files for
/// the CLI, an instrumented in-memory store for tests, both with identical
/// semantics: positioned reads, positioned writes, per-path byte accounting.
class Storage {
public:
    virtual ~Storage() = default;

    virtual std::unique_ptr<ReadFile> open_read(const std::string &path) = 0;
    /// Creates (or truncates) a file of the given initial size, zero-filled.
    virtual std::unique_ptr<WriteFile> create(const std::string &path,
                                              uint64_t initial_size) = 0;
    virtual bool exists(const std::string &path) const = 0;
    virtual void remove(const std::string &path) = 0;
    virtual uint64_t file_size(const std::string &path) const = 0;

    IoCounters counters(const std::string &path) const;
    IoCounters totals() const;
    void reset_counters();

protected:
    void note_read(const std::string &path, uint64_t bytes);
    void note_write(const std::string &path, uint64_t bytes);

private:
    mutable std::mutex mutex_;
    std::map<std::string, IoCounters> per_path_;
};

/// Files under a root directory, accessed with positioned POSIX I/O.
class FileStorage final : public Storage {
public:
    explicit FileStorage(std::string root_dir);

    std::unique_ptr<ReadFile> open_read(const std::string &path) override;
    std::unique_ptr<WriteFile> create(const std::string &path,
                                      uint64_t initial_size) override;
    bool exists(const std::string &path) const override;
    void remove(const std::string &path) override;
    uint64_t file_size(const std::string &path) const override;

    const std::string &root() const { return root_; }

private:
    std::string resolve(const std::string &path) const;
    std::string root_;
};

/// In-memory store for tests: byte-exact semantics plus write fault
/// injection (fail once a path has absorbed a given number of bytes).
class MemStorage final : public Storage {
public:
    MemStorage() = default;

    std::unique_ptr<ReadFile> open_read(const std::string &path) override;
    std::unique_ptr<WriteFile> create(const std::string &path,
                                      uint64_t initial_size) override;
    bool exists(const std::string &path) const override;
    void remove(const std::string &path) override;
    uint64_t file_size(const std::string &path) const override;

    /// Direct access for test assertions.
    std::vector<std::byte> read_all(const std::string &path) const;
    void put(const std::string &path, std::vector<std::byte> bytes);

    /// Writes to `path` fail with io_error once total bytes written to it
    /// exceed `limit`.
    void fail_writes_after(const std::string &path, uint64_t limit);

private:
    struct File {
        std::shared_ptr<std::vector<std::byte>> bytes;
        uint64_t fail_after = UINT64_MAX;
        uint64_t written = 0;
    };
    friend class MemWriteFile;

    mutable std::mutex mutex_;
    std::map<std::string, File> files_;
};

} // namespace semmat

#endif
