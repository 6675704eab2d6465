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

#include "chdet/raster_io.hpp"

#include <nlohmann/json.hpp>

#include "chdet/detail/binio.hpp"

namespace chdet {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
const char* dtype_name();
template <>
const char* dtype_name<std::uint16_t>() { return "u16"; }
template <>
const char* dtype_name<float>() { return "f32"; }

template <class T>
void encode_band_major(const RasterStack<T>& stack, std::string& out) {
    for (const auto& band : stack.bands)
        for (Index i = 0; i < band.rows(); ++i)
            for (Index j = 0; j < band.cols(); ++j) {
                if constexpr (std::is_same_v<T, std::uint16_t>)
                    detail::put_u16(out, band(i, j));
                else
                    detail::put_f32(out, band(i, j));
            }
}

template <class T>
void write_raster_impl(const RasterStack<T>& stack, const fs::path& json_path) {
    stack.require_consistent();
    const fs::path bin_path = fs::path(json_path).replace_extension(".bin");

    json sidecar;
    sidecar["bands"] = stack.band_count();
    sidecar["height"] = stack.height();
    sidecar["width"] = stack.width();
    sidecar["dtype"] = dtype_name<T>();
    sidecar["geotransform"] = stack.transform.coefficients();
    sidecar["band_names"] = stack.band_names.empty()
        ? std::vector<std::string>(static_cast<std::size_t>(stack.band_count()), "")
        : stack.band_names;
    sidecar["data"] = bin_path.filename().string();
    detail::write_file(json_path, sidecar.dump(2) + "\n");

    std::string raw;
    raw.reserve(static_cast<std::size_t>(stack.band_count() * stack.height() * stack.width()) * sizeof(T));
    encode_band_major(stack, raw);
    detail::write_file(bin_path, raw);
}

template <class T>
RasterStack<T> decode_raster(const json& sidecar, const std::string& raw, const fs::path& json_path) {
    const auto bands = sidecar.at("bands").get<Index>();
    const auto height = sidecar.at("height").get<Index>();
    const auto width = sidecar.at("width").get<Index>();
    if (bands < 1 || height < 1 || width < 1)
        throw FormatError(json_path.string() + ": non-positive raster dimensions");

    const std::size_t expect = static_cast<std::size_t>(bands * height * width) * sizeof(T);
    if (raw.size() != expect)
        throw FormatError(json_path.string() + ": binary payload is " + std::to_string(raw.size()) +
                          " bytes, expected " + std::to_string(expect));

    RasterStack<T> stack;
    auto coeffs = sidecar.at("geotransform").get<std::array<double, 6>>();
    stack.transform = GeoTransform::from_coefficients(coeffs);
    if (sidecar.contains("band_names"))
        stack.band_names = sidecar.at("band_names").get<std::vector<std::string>>();

    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    stack.bands.reserve(static_cast<std::size_t>(bands));
    for (Index b = 0; b < bands; ++b) {
        Band<T> band(height, width);
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j) {
                if constexpr (std::is_same_v<T, std::uint16_t>)
                    band(i, j) = detail::get_u16(p);
                else
                    band(i, j) = detail::get_f32(p);
                p += sizeof(T);
            }
        stack.bands.push_back(std::move(band));
    }
    return stack;
}

} // namespace

void write_raster(const RasterStack<std::uint16_t>& stack, const fs::path& json_path) {
    write_raster_impl(stack, json_path);
}

void write_raster(const RasterStack<float>& stack, const fs::path& json_path) {
    write_raster_impl(stack, json_path);
}

AnyRaster read_raster(const fs::path& json_path) {
    json sidecar;
    try {
        sidecar = json::parse(detail::read_file(json_path));
    } catch (const json::exception& e) {
        throw FormatError(json_path.string() + ": invalid sidecar JSON (" + e.what() + ")");
    }

    std::string bin_name;
    try {
        bin_name = sidecar.contains("data")
            ? sidecar.at("data").get<std::string>()
            : fs::path(json_path).replace_extension(".bin").filename().string();
    } catch (const json::exception& e) {
        throw FormatError(json_path.string() + ": bad 'data' field (" + e.what() + ")");
    }
    const std::string raw = detail::read_file(json_path.parent_path() / bin_name);

    try {
        const auto dtype = sidecar.at("dtype").get<std::string>();
        if (dtype == "u16") return decode_raster<std::uint16_t>(sidecar, raw, json_path);
        if (dtype == "f32") return decode_raster<float>(sidecar, raw, json_path);
        throw FormatError(json_path.string() + ": unknown dtype '" + dtype + "'");
    } catch (const json::exception& e) {
        throw FormatError(json_path.string() + ": bad sidecar field (" + std::string(e.what()) + ")");
    }
}

RasterStack<std::uint16_t> read_raster_u16(const fs::path& json_path) {
    AnyRaster any = read_raster(json_path);
    if (auto* p = std::get_if<RasterStack<std::uint16_t>>(&any)) return std::move(*p);
    throw FormatError(json_path.string() + ": expected dtype u16");
}

RasterStack<float> read_raster_f32(const fs::path& json_path) {
    AnyRaster any = read_raster(json_path);
    if (auto* p = std::get_if<RasterStack<float>>(&any)) return std::move(*p);
    throw FormatError(json_path.string() + ": expected dtype f32");
}

void write_mask(const BinaryMask& mask, const fs::path& json_path) {
    RasterStack<std::uint16_t> as_raster;
    as_raster.transform = mask.transform;
    as_raster.band_names = {"mask"};
    as_raster.bands.push_back(mask.data.cast<std::uint16_t>());
    write_raster(as_raster, json_path);
}

BinaryMask read_mask(const fs::path& path) {
    if (path.extension() == ".pgm") return read_mask_pgm(path);

    AnyRaster any = read_raster(path);
    BinaryMask mask;
    std::visit([&](const auto& stack) {
        if (stack.band_count() != 1)
            throw FormatError(path.string() + ": mask raster must have exactly 1 band");
        mask.transform = stack.transform;
        mask.data.resize(stack.height(), stack.width());
        const auto& band = stack.bands.front();
        for (Index i = 0; i < stack.height(); ++i)
            for (Index j = 0; j < stack.width(); ++j) {
                const auto v = band(i, j);
                if (v != 0 && v != 1)
                    throw FormatError(path.string() + ": mask values must be exactly 0 or 1");
                mask.data(i, j) = static_cast<std::uint8_t>(v);
            }
    }, any);
    return mask;
}

void write_mask_pgm(const BinaryMask& mask, const fs::path& path) {
    std::string out = "P5\n" + std::to_string(mask.width()) + " " +
                      std::to_string(mask.height()) + "\n1\n";
    out.reserve(out.size() + static_cast<std::size_t>(mask.height() * mask.width()));
    for (Index i = 0; i < mask.height(); ++i)
        for (Index j = 0; j < mask.width(); ++j)
            out.push_back(static_cast<char>(mask.data(i, j)));
    detail::write_file(path, out);
}

BinaryMask read_mask_pgm(const fs::path& path) {
    const std::string data = detail::read_file(path);
    std::size_t pos = 0;
    auto next_token = [&]() -> std::string {
        while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (pos < data.size() && data[pos] == '#') { // comment line
            while (pos < data.size() && data[pos] != '\n') ++pos;
            while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        }
        std::size_t start = pos;
        while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
        if (start == pos) throw FormatError(path.string() + ": truncated PGM header");
        return data.substr(start, pos - start);
    };

    if (next_token() != "P5") throw FormatError(path.string() + ": not a P5 PGM file");
    const long width = std::stol(next_token());
    const long height = std::stol(next_token());
    const long maxval = std::stol(next_token());
    if (width < 1 || height < 1) throw FormatError(path.string() + ": bad PGM dimensions");
    if (maxval != 1) throw FormatError(path.string() + ": mask PGM must have maxval 1");
    ++pos; // single whitespace after maxval
    if (data.size() - pos < static_cast<std::size_t>(width * height))
        throw FormatError(path.string() + ": truncated PGM payload");

    BinaryMask mask;
    mask.data.resize(height, width);
    for (long i = 0; i < height; ++i)
        for (long j = 0; j < width; ++j) {
            const auto v = static_cast<std::uint8_t>(data[pos++]);
            if (v > 1) throw FormatError(path.string() + ": mask values must be 0 or 1");
            mask.data(i, j) = v;
        }
    return mask;
}

void write_polygons(const PolygonLayer& layer, const fs::path& path) {
    json features = json::array();
    auto ring_to_json = [](const Ring& ring) {
        json coords = json::array();
        for (const auto& v : ring) coords.push_back({v.x(), v.y()});
        if (!ring.empty()) coords.push_back({ring.front().x(), ring.front().y()});
        return coords;
    };
    for (const auto& f : layer.features) {
        json rings = json::array();
        rings.push_back(ring_to_json(f.shape.exterior));
        for (const auto& h : f.shape.holes) rings.push_back(ring_to_json(h));
        features.push_back({{"type", "Feature"},
                            {"properties", {{"class", f.label}}},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}}});
    }
    json doc = {{"type", "FeatureCollection"}, {"features", features}};
    detail::write_file(path, doc.dump(2) + "\n");
}

PolygonLayer read_polygons(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(detail::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
    }

    PolygonLayer layer;
    const json* features = nullptr;
    try {
        features = &doc.at("features");
    } catch (const json::exception&) {
        throw FormatError(path.string() + ": missing 'features' array");
    }

    for (std::size_t idx = 0; idx < features->size(); ++idx) {
        const std::string context = path.string() + ": feature " + std::to_string(idx);
        const json& f = (*features)[idx];
        std::string label;
        json rings;
        try {
            label = f.at("properties").at("class").get<std::string>();
            const json& geom = f.at("geometry");
            if (geom.at("type").get<std::string>() != "Polygon")
                throw FormatError(context + ": only Polygon geometries are supported");
            rings = geom.at("coordinates");
        } catch (const json::exception& e) {
            throw FormatError(context + ": bad feature (" + e.what() + ")");
        }
        if (rings.empty()) throw FormatError(context + ": polygon has no rings");

        auto parse_ring = [&](const json& jring) {
            Ring ring;
            for (const auto& pt : jring) {
                if (!pt.is_array() || pt.size() < 2)
                    throw FormatError(context + ": bad coordinate pair");
                ring.emplace_back(pt[0].get<double>(), pt[1].get<double>());
            }
            return ring;
        };

        Polygon shape;
        shape.exterior = parse_ring(rings[0]);
        for (std::size_t r = 1; r < rings.size(); ++r)
            shape.holes.push_back(parse_ring(rings[r]));
        layer.features.push_back(make_feature(std::move(shape), std::move(label), context));
    }
    return layer;
}

} // namespace chdet
