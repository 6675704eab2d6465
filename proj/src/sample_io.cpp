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

#include "chdet/sample_io.hpp"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "chdet/detail/binio.hpp"

namespace chdet {

namespace {

constexpr char kMagic[4] = {'C', 'D', 'P', '1'};
constexpr std::uint32_t kVersion = 1;

// Raw DEFLATE (no zlib wrapper), matching the container's stated encoding.
std::string deflate_raw(const std::string& input) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw IoError("deflate initialization failed");
    std::string out(deflateBound(&zs, static_cast<uLong>(input.size())), '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
    zs.avail_in = static_cast<uInt>(input.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&zs, Z_FINISH);
    deflateEnd(&zs);
    if (rc != Z_STREAM_END) throw IoError("deflate failed");
    out.resize(out.size() - zs.avail_out);
    return out;
}

std::string inflate_raw(const unsigned char* data, std::size_t size, std::size_t expected,
                        const std::string& name) {
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw IoError("inflate initialization failed");
    std::string out(expected, '\0');
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<unsigned char*>(data));
    zs.avail_in = static_cast<uInt>(size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    const int rc = inflate(&zs, Z_FINISH);
    const auto produced = out.size() - zs.avail_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != expected)
        throw FormatError(name + ": corrupt compressed payload");
    return out;
}

void encode_planes(const std::vector<Band<float>>& planes, std::string& out) {
    for (const auto& p : planes)
        for (Index i = 0; i < p.rows(); ++i)
            for (Index j = 0; j < p.cols(); ++j) detail::put_f32(out, p(i, j));
}

} // namespace

void write_sample(const PatchSample& sample, const std::filesystem::path& path) {
    const Index channels = sample.channels();
    const Index height = sample.height();
    const Index width = sample.width();
    if (channels < 1 || height < 1 || width < 1)
        throw ShapeError("sample has empty arrays");
    if (static_cast<Index>(sample.img2.size()) != channels)
        throw ShapeError("img1 and img2 disagree on channel count");
    for (const auto& plane : sample.img1)
        if (plane.rows() != height || plane.cols() != width)
            throw ShapeError("img1 planes disagree on spatial shape");
    for (const auto& plane : sample.img2)
        if (plane.rows() != height || plane.cols() != width)
            throw ShapeError("img2 planes disagree on spatial shape");

    std::string raw;
    raw.reserve(static_cast<std::size_t>(2 * channels * height * width) * 4 +
                static_cast<std::size_t>(height * width));
    encode_planes(sample.img1, raw);
    encode_planes(sample.img2, raw);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) raw.push_back(static_cast<char>(sample.mask(i, j)));

    const std::string payload = deflate_raw(raw);

    nlohmann::json meta;
    meta["scene_id"] = sample.scene_id;
    meta["year_pair"] = {sample.year1, sample.year2};
    meta["index"] = sample.index;
    meta["band_names"] = sample.band_names;
    const std::string meta_str = meta.dump();

    std::string out;
    out.reserve(40 + payload.size() + meta_str.size());
    out.append(kMagic, 4);
    detail::put_u32(out, kVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(channels));
    detail::put_u32(out, static_cast<std::uint32_t>(height));
    detail::put_u32(out, static_cast<std::uint32_t>(width));
    detail::put_u32(out, 0); // flags
    detail::put_u64(out, payload.size());
    detail::put_u64(out, meta_str.size());
    out += payload;
    out += meta_str;
    detail::write_file(path, out);
}

PatchSample read_sample(const std::filesystem::path& path) {
    const std::string data = detail::read_file(path);
    const std::string name = path.string();
    detail::Reader r(data, name);

    if (r.str(4) != std::string(kMagic, 4))
        throw FormatError(name + ": bad magic, not a CDP1 file");
    const auto version = r.u32();
    if (version != kVersion)
        throw FormatError(name + ": unsupported version " + std::to_string(version));
    const auto channels = static_cast<Index>(r.u32());
    const auto height = static_cast<Index>(r.u32());
    const auto width = static_cast<Index>(r.u32());
    r.u32(); // flags
    const auto payload_len = r.u64();
    const auto meta_len = r.u64();
    if (channels < 1 || height < 1 || width < 1)
        throw FormatError(name + ": non-positive dimensions in header");
    if (payload_len + meta_len != r.remaining())
        throw FormatError(name + ": header lengths disagree with file size");

    const std::size_t plane = static_cast<std::size_t>(height * width);
    const std::size_t img_bytes = static_cast<std::size_t>(channels) * plane * 4;
    const std::size_t raw_size = 2 * img_bytes + plane;
    const std::string raw =
        inflate_raw(r.bytes(static_cast<std::size_t>(payload_len)),
                    static_cast<std::size_t>(payload_len), raw_size, name);

    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(r.str(static_cast<std::size_t>(meta_len)));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ": bad metadata JSON (" + e.what() + ")");
    }

    PatchSample s;
    try {
        s.scene_id = meta.at("scene_id").get<std::string>();
        s.year1 = meta.at("year_pair").at(0).get<int>();
        s.year2 = meta.at("year_pair").at(1).get<int>();
        s.index = meta.at("index").get<std::int64_t>();
        s.band_names = meta.at("band_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ": missing metadata field (" + e.what() + ")");
    }

    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    auto read_planes = [&](std::vector<Band<float>>& planes) {
        planes.reserve(static_cast<std::size_t>(channels));
        for (Index c = 0; c < channels; ++c) {
            Band<float> b(height, width);
            for (Index i = 0; i < height; ++i)
                for (Index j = 0; j < width; ++j) {
                    b(i, j) = detail::get_f32(p);
                    p += 4;
                }
            planes.push_back(std::move(b));
        }
    };
    read_planes(s.img1);
    read_planes(s.img2);
    s.mask.resize(height, width);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            const auto v = static_cast<std::uint8_t>(*p++);
            if (v > 1) throw FormatError(name + ": mask values must be 0 or 1");
            s.mask(i, j) = v;
        }
    return s;
}

} // namespace chdet
