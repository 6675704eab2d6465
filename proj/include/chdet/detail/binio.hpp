// Copyright 2026 The chdet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "chdet/errors.hpp"

namespace chdet::detail {

// Little-endian scalar encoding, independent of host byte order.

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::string& out, float v) {
    put_u32(out, std::bit_cast<std::uint32_t>(v));
}

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

inline std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

inline std::uint16_t get_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline float get_f32(const unsigned char* p) {
    return std::bit_cast<float>(get_u32(p));
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw IoError("failed reading " + path.string());
    return data;
}

inline void write_file(const std::filesystem::path& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("failed writing " + path.string());
}

/// Bounds-checked cursor over an in-memory file image.
class Reader {
public:
    Reader(const std::string& data, std::string name)
        : p_(reinterpret_cast<const unsigned char*>(data.data())), size_(data.size()),
          name_(std::move(name)) {}

    std::uint32_t u32() { return get_u32(bytes(4)); }
    std::uint64_t u64() { return get_u64(bytes(8)); }
    std::uint16_t u16() { return get_u16(bytes(2)); }
    float f32() { return get_f32(bytes(4)); }

    const unsigned char* bytes(std::size_t n) {
        if (pos_ + n > size_)
            throw FormatError(name_ + ": truncated (wanted " + std::to_string(n) +
                              " bytes at offset " + std::to_string(pos_) + ")");
        const unsigned char* p = p_ + pos_;
        pos_ += n;
        return p;
    }

    std::string str(std::size_t n) {
        const unsigned char* p = bytes(n);
        return std::string(reinterpret_cast<const char*>(p), n);
    }

    std::size_t remaining() const { return size_ - pos_; }

private:
    const unsigned char* p_;
    std::size_t size_;
    std::size_t pos_ = 0;
    std::string name_;
};

} // namespace chdet::detail
