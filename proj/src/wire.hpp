#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "seco/errors.hpp"

// Little-endian byte packing for the on-disk formats, with offset-carrying
// errors on underrun.
namespace seco::detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 24));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    static_assert(sizeof(float) == 4);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline void put_f64(std::vector<std::uint8_t>& out, double v) {
    static_assert(sizeof(double) == 8);
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u32(out, static_cast<std::uint32_t>(bits));
    put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size, std::string source)
        : data_(data), size_(size), source_(std::move(source)) {}

    std::size_t offset() const { return offset_; }
    std::size_t remaining() const { return size_ - offset_; }

    void need(std::size_t n, const char* what) const {
        if (remaining() < n) {
            throw FormatError(source_ + ": truncated while reading " + what + " at byte offset " +
                              std::to_string(offset_) + " (need " + std::to_string(n) + ", have " +
                              std::to_string(remaining()) + ")");
        }
    }

    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = static_cast<std::uint32_t>(data_[offset_]) |
                          static_cast<std::uint32_t>(data_[offset_ + 1]) << 8 |
                          static_cast<std::uint32_t>(data_[offset_ + 2]) << 16 |
                          static_cast<std::uint32_t>(data_[offset_ + 3]) << 24;
        offset_ += 4;
        return v;
    }

    float f32(const char* what) {
        const std::uint32_t bits = u32(what);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64(const char* what) {
        need(8, what);
        const std::uint32_t lo = u32(what);
        const std::uint32_t hi = u32(what);
        const std::uint64_t bits =
            static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    void expect_magic(const char magic[4]) {
        need(4, "magic");
        if (std::memcmp(data_ + offset_, magic, 4) != 0) {
            throw FormatError(source_ + ": bad magic at byte offset " + std::to_string(offset_) +
                              ", expected \"" + std::string(magic, 4) + "\"");
        }
        offset_ += 4;
    }

    void expect_consumed() const {
        if (remaining() != 0) {
            throw FormatError(source_ + ": file length does not match header, " +
                              std::to_string(remaining()) + " trailing bytes at byte offset " +
                              std::to_string(offset_));
        }
    }

private:
    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t offset_ = 0;
    std::string source_;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace seco::detail
