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
#include "semmat/storage.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>
#include <functional>

namespace semmat {

IoCounters Storage::counters(const std::string &path) const {
    std::lock_guard lock(mutex_);
    auto it = per_path_.find(path);
    return it == per_path_.end() ? IoCounters{} : it->second;
}

IoCounters Storage::totals() const {
    std::lock_guard lock(mutex_);
    IoCounters total;
    for (const auto &[path, c] : per_path_) {
        total.bytes_read += c.bytes_read;
        total.bytes_written += c.bytes_written;
        total.read_calls += c.read_calls;
        total.write_calls += c.write_calls;
    }
    return total;
}

void Storage::reset_counters() {
    std::lock_guard lock(mutex_);
    per_path_.clear();
}

void Storage::note_read(const std::string &path, uint64_t bytes) {
    std::lock_guard lock(mutex_);
    auto &c = per_path_[path];
    c.bytes_read += bytes;
    c.read_calls += 1;
}

void Storage::note_write(const std::string &path, uint64_t bytes) {
    std::lock_guard lock(mutex_);
    auto &c = per_path_[path];
    c.bytes_written += bytes;
    c.write_calls += 1;
}

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd &) = delete;
    Fd &operator=(const Fd &) = delete;
    ~Fd() {
        if (fd_ >= 0)
            ::close(fd_);
    }
    int get() const { return fd_; }

private:
    int fd_ = -1;
};

class PosixReadFile final : public ReadFile {
public:
    PosixReadFile(std::string path, int fd, uint64_t size)
        : path_(std::move(path)), fd_(fd), size_(size) {}

    uint64_t size() const override { return size_; }

    void read_at(uint64_t offset, std::span<std::byte> dst) override {
        size_t done = 0;
        while (done < dst.size()) {
            ssize_t n = ::pread(fd_.get(), dst.data() + done,
                                dst.size() - done, offset + done);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw io_error("read failed on " + path_ + ": " +
                               std::strerror(errno));
            }
            if (n == 0)
                throw io_error("short read on " + path_);
            done += static_cast<size_t>(n);
        }
        noter_(path_, dst.size());
    }

    std::function<void(const std::string &, uint64_t)> noter_;

private:
    std::string path_;
    Fd fd_;
    uint64_t size_;
};

class PosixWriteFile final : public WriteFile {
public:
    PosixWriteFile(std::string path, int fd)
        : path_(std::move(path)), fd_(fd) {}

    void write_at(uint64_t offset, std::span<const std::byte> src) override {
        size_t done = 0;
        while (done < src.size()) {
            ssize_t n = ::pwrite(fd_.get(), src.data() + done,
                                 src.size() - done, offset + done);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw io_error("write failed on " + path_ + ": " +
                               std::strerror(errno));
            }
            done += static_cast<size_t>(n);
        }
        noter_(path_, src.size());
    }

    void flush() override {
        if (::fsync(fd_.get()) != 0 && errno != EINVAL && errno != EROFS)
            throw io_error("fsync failed on " + path_);
    }

    std::function<void(const std::string &, uint64_t)> noter_;

private:
    std::string path_;
    Fd fd_;
};

} // namespace

FileStorage::FileStorage(std::string root_dir) : root_(std::move(root_dir)) {
    if (!root_.empty())
        std::filesystem::create_directories(root_);
}

std::string FileStorage::resolve(const std::string &path) const {
    if (root_.empty() || path.starts_with('/'))
        return path;
    return root_ + "/" + path;
}

std::unique_ptr<ReadFile> FileStorage::open_read(const std::string &path) {
    const std::string full = resolve(path);
    int fd = ::open(full.c_str(), O_RDONLY);
    if (fd < 0)
        throw io_error("cannot open " + full + ": " + std::strerror(errno));
    struct stat st{};
    if (fstat(fd, &st) != 0) {
        ::close(fd);
        throw io_error("cannot stat " + full);
    }
    auto file = std::make_unique<PosixReadFile>(path, fd,
                                                static_cast<uint64_t>(st.st_size));
    file->noter_ = [this](const std::string &p, uint64_t n) { note_read(p, n); };
    return file;
}

std::unique_ptr<WriteFile> FileStorage::create(const std::string &path,
                                               uint64_t initial_size) {
    const std::string full = resolve(path);
    int fd = ::open(full.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
    if (fd < 0)
        throw io_error("cannot create " + full + ": " + std::strerror(errno));
    if (initial_size > 0 && ::ftruncate(fd, static_cast<off_t>(initial_size)) != 0) {
        ::close(fd);
        throw io_error("cannot size " + full);
    }
    auto file = std::make_unique<PosixWriteFile>(path, fd);
    file->noter_ = [this](const std::string &p, uint64_t n) { note_write(p, n); };
    return file;
}

bool FileStorage::exists(const std::string &path) const {
    return std::filesystem::exists(resolve(path));
}

void FileStorage::remove(const std::string &path) {
    std::filesystem::remove(resolve(path));
}

uint64_t FileStorage::file_size(const std::string &path) const {
    std::error_code ec;
    auto size = std::filesystem::file_size(resolve(path), ec);
    if (ec)
        throw io_error("cannot stat " + resolve(path));
    return size;
}

namespace {

class MemReadFile final : public ReadFile {
public:
    MemReadFile(std::shared_ptr<std::vector<std::byte>> bytes, std::string path,
                std::function<void(const std::string &, uint64_t)> noter)
        : bytes_(std::move(bytes)), path_(std::move(path)),
          noter_(std::move(noter)) {}

    uint64_t size() const override { return bytes_->size(); }

    void read_at(uint64_t offset, std::span<std::byte> dst) override {
        if (offset + dst.size() > bytes_->size())
            throw io_error("short read on " + path_);
        std::memcpy(dst.data(), bytes_->data() + offset, dst.size());
        noter_(path_, dst.size());
    }

private:
    std::shared_ptr<std::vector<std::byte>> bytes_;
    std::string path_;
    std::function<void(const std::string &, uint64_t)> noter_;
};

} // namespace

class MemWriteFile final : public WriteFile {
public:
    MemWriteFile(MemStorage *owner, std::string path)
        : owner_(owner), path_(std::move(path)) {}

    void write_at(uint64_t offset, std::span<const std::byte> src) override;
    void flush() override {}

private:
    MemStorage *owner_;
    std::string path_;
};

void MemWriteFile::write_at(uint64_t offset, std::span<const std::byte> src) {
    {
        std::lock_guard lock(owner_->mutex_);
        auto it = owner_->files_.find(path_);
        if (it == owner_->files_.end())
            throw io_error("write to removed file " + path_);
        auto &file = it->second;
        file.written += src.size();
        if (file.written > file.fail_after)
            throw io_error("injected write failure on " + path_);
        if (offset + src.size() > file.bytes->size())
            file.bytes->resize(offset + src.size());
        std::memcpy(file.bytes->data() + offset, src.data(), src.size());
    }
    owner_->note_write(path_, src.size());
}

std::unique_ptr<ReadFile> MemStorage::open_read(const std::string &path) {
    std::shared_ptr<std::vector<std::byte>> bytes;
    {
        std::lock_guard lock(mutex_);
        auto it = files_.find(path);
        if (it == files_.end())
            throw io_error("no such file: " + path);
        bytes = it->second.bytes;
    }
    return std::make_unique<MemReadFile>(
        bytes, path,
        [this](const std::string &p, uint64_t n) { note_read(p, n); });
}

std::unique_ptr<WriteFile> MemStorage::create(const std::string &path,
                                              uint64_t initial_size) {
    {
        std::lock_guard lock(mutex_);
        auto &file = files_[path];
        if (!file.bytes)
            file.bytes = std::make_shared<std::vector<std::byte>>();
        file.bytes->assign(initial_size, std::byte{0});
        file.written = 0;
    }
    return std::make_unique<MemWriteFile>(this, path);
}

bool MemStorage::exists(const std::string &path) const {
    std::lock_guard lock(mutex_);
    return files_.count(path) > 0;
}

void MemStorage::remove(const std::string &path) {
    std::lock_guard lock(mutex_);
    files_.erase(path);
}

uint64_t MemStorage::file_size(const std::string &path) const {
    std::lock_guard lock(mutex_);
    auto it = files_.find(path);
    if (it == files_.end())
        throw io_error("no such file: " + path);
    return it->second.bytes->size();
}

std::vector<std::byte> MemStorage::read_all(const std::string &path) const {
    std::lock_guard lock(mutex_);
    auto it = files_.find(path);
    if (it == files_.end())
        throw io_error("no such file: " + path);
    return *it->second.bytes;
}

void MemStorage::put(const std::string &path, std::vector<std::byte> bytes) {
    std::lock_guard lock(mutex_);
    auto &file = files_[path];
    file.bytes = std::make_shared<std::vector<std::byte>>(std::move(bytes));
}

void MemStorage::fail_writes_after(const std::string &path, uint64_t limit) {
    std::lock_guard lock(mutex_);
    files_[path].fail_after = limit;
    if (!files_[path].bytes)
        files_[path].bytes = std::make_shared<std::vector<std::byte>>();
}

} // namespace semmat
