// Copyright 2026 The paysec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include "paysec/errors.hpp"

namespace paysec {

using Bytes = std::vector<std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
    return std::string(b.begin(), b.end());
}

inline std::string to_hex(const std::uint8_t* data, std::size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0x0f]);
    }
    return out;
}

inline std::string to_hex(const Bytes& b) {
    return to_hex(b.data(), b.size());
}

inline Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        throw ParseError("invalid hex digit");
    };
    if (hex.size() % 2 != 0)
        throw ParseError("hex string has odd length");
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return out;
}

// True when `needle` occurs as a contiguous substring of `haystack`.
inline bool contains_subsequence(const Bytes& haystack, const Bytes& needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    return std::search(haystack.begin(), haystack.end(),
                       needle.begin(), needle.end()) != haystack.end();
}

// Canonical multi-field record encoding used for everything that is hashed,
// signed or put on a wire: each field is preceded by a 4-byte big-endian
// length. Fixed-width integers are carried as 8-byte big-endian fields.
class Encoder {
public:
    Encoder& bytes(const Bytes& b) {
        put_len(b.size());
        out_.insert(out_.end(), b.begin(), b.end());
        return *this;
    }
    Encoder& bytes(const std::uint8_t* data, std::size_t len) {
        put_len(len);
        out_.insert(out_.end(), data, data + len);
        return *this;
    }
    Encoder& str(std::string_view s) {
        put_len(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
        return *this;
    }
    Encoder& u64(std::uint64_t v) {
        put_len(8);
        for (int i = 7; i >= 0; --i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }
    Encoder& i64(std::int64_t v) {
        return u64(static_cast<std::uint64_t>(v));
    }
    const Bytes& get() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    void put_len(std::size_t n) {
        if (n > 0xffffffffu)
            throw InvalidParameter("field too large for canonical encoding");
        auto v = static_cast<std::uint32_t>(n);
        out_.push_back(static_cast<std::uint8_t>(v >> 24));
        out_.push_back(static_cast<std::uint8_t>(v >> 16));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    Bytes out_;
};

class Decoder {
public:
    explicit Decoder(const Bytes& in) : in_(in) {}
    explicit Decoder(Bytes&&) = delete; // would dangle: Decoder only borrows

    Bytes bytes() {
        std::size_t n = take_len();
        Bytes out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }
    std::string str() {
        Bytes b = bytes();
        return std::string(b.begin(), b.end());
    }
    std::uint64_t u64() {
        std::size_t n = take_len();
        if (n != 8) throw ParseError("expected 8-byte integer field");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v = v << 8 | in_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 8;
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    bool done() const { return pos_ == in_.size(); }
    void expect_done() const {
        if (!done()) throw ParseError("trailing bytes after record");
    }

private:
    std::size_t take_len() {
        if (pos_ + 4 > in_.size()) throw ParseError("truncated field length");
        std::uint32_t n = static_cast<std::uint32_t>(in_[pos_]) << 24 |
                          static_cast<std::uint32_t>(in_[pos_ + 1]) << 16 |
                          static_cast<std::uint32_t>(in_[pos_ + 2]) << 8 |
                          static_cast<std::uint32_t>(in_[pos_ + 3]);
        pos_ += 4;
        if (pos_ + n > in_.size()) throw ParseError("truncated field body");
        return n;
    }
    const Bytes& in_;
    std::size_t pos_ = 0;
};

} // namespace paysec
