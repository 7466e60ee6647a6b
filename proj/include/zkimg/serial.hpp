#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "zkimg/errors.hpp"
#include "zkimg/field.hpp"

namespace zkimg {

// Little-endian byte stream writer/reader for the binary container formats.
class ByteWriter {
  public:
    void u8(uint8_t v) { buf_.push_back(v); }
    void u16(uint16_t v) { raw(&v, 2); }
    void u32(uint32_t v) { raw(&v, 4); }
    void u64(uint64_t v) { raw(&v, 8); }
    void i32(int32_t v) { raw(&v, 4); }
    void i64(int64_t v) { raw(&v, 8); }

    void fe(const Fe& f) {
        auto b = f.to_bytes();
        buf_.insert(buf_.end(), b.begin(), b.end());
    }

    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        buf_.insert(buf_.end(), s.begin(), s.end());
    }

    void bytes(std::span<const uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

    const std::vector<uint8_t>& data() const { return buf_; }
    std::vector<uint8_t> take() && { return std::move(buf_); }

  private:
    void raw(const void* p, size_t n) {
        const auto* b = static_cast<const uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }

    std::vector<uint8_t> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t u8() { return take(1)[0]; }
    uint16_t u16() { return read_int<uint16_t>(); }
    uint32_t u32() { return read_int<uint32_t>(); }
    uint64_t u64() { return read_int<uint64_t>(); }
    int32_t i32() { return static_cast<int32_t>(read_int<uint32_t>()); }
    int64_t i64() { return static_cast<int64_t>(read_int<uint64_t>()); }

    Fe fe() {
        auto b = take(32);
        auto f = Fe::from_bytes(b);
        if (!f) fail(Errc::malformed_bundle, "non-canonical field element encoding");
        return *f;
    }

    std::string str() {
        uint32_t n = u32();
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }

    std::span<const uint8_t> take(size_t n) {
        if (pos_ + n > data_.size())
            fail(Errc::malformed_bundle, "truncated input (wanted " + std::to_string(n) +
                                             " bytes at offset " + std::to_string(pos_) + ")");
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    bool done() const { return pos_ == data_.size(); }
    size_t pos() const { return pos_; }

  private:
    template <typename T>
    T read_int() {
        auto b = take(sizeof(T));
        T v;
        std::memcpy(&v, b.data(), sizeof(T));
        return v;
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace zkimg
