#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "djsr/error.hpp"

namespace djsr {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

// Little-endian byte encoding for the checkpoint and pair-file formats.
class ByteWriter {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f32(float v) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        u32(bits);
    }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }

    const std::vector<std::uint8_t>& buffer() const { return buf_; }
    void save(const std::filesystem::path& path) const;

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(std::vector<std::uint8_t> data, std::string source = "buffer")
        : data_(std::move(data)), source_(std::move(source)) {}
    static ByteReader load(const std::filesystem::path& path);

    void bytes(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, data_.data() + pos_, n);
        pos_ += n;
    }
    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t n = u32();
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    bool at_end() const { return pos_ == data_.size(); }
    const std::string& source() const { return source_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size())
            fail(ErrorKind::format, "unexpected end of data in " + source_);
    }

    std::vector<std::uint8_t> data_;
    std::size_t pos_ = 0;
    std::string source_;
};

}  // namespace djsr
