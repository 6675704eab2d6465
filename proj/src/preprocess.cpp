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

#include "chdet/preprocess.hpp"

#include <nlohmann/json.hpp>

#include "chdet/detail/binio.hpp"

namespace chdet {

using nlohmann::json;

RasterStack<std::uint16_t> equalize_stack(const RasterStack<std::uint16_t>& stack,
                                          std::int64_t levels) {
    stack.require_consistent();
    RasterStack<std::uint16_t> out;
    out.transform = stack.transform;
    out.band_names = stack.band_names;
    out.bands.reserve(stack.bands.size());
    for (const auto& band : stack.bands) out.bands.push_back(equalize_histogram(band, levels));
    return out;
}

Band<float> equalize_quantized(const Band<float>& band, std::int64_t bins) {
    if (bins < 2) throw ConfigError("quantized equalization needs at least 2 bins");
    const float lo = band.minCoeff();
    const float hi = band.maxCoeff();
    if (!(hi > lo)) return band;

    const double scale = static_cast<double>(bins - 1) / (static_cast<double>(hi) - lo);
    Band<std::int32_t> quantized(band.rows(), band.cols());
    for (Index i = 0; i < band.rows(); ++i)
        for (Index j = 0; j < band.cols(); ++j)
            quantized(i, j) = static_cast<std::int32_t>(
                std::llround((static_cast<double>(band(i, j)) - lo) * scale));

    const Band<std::int32_t> equalized = equalize_histogram(quantized, bins);

    Band<float> out(band.rows(), band.cols());
    const double inv = (static_cast<double>(hi) - lo) / static_cast<double>(bins - 1);
    for (Index i = 0; i < band.rows(); ++i)
        for (Index j = 0; j < band.cols(); ++j)
            out(i, j) = static_cast<float>(lo + inv * equalized(i, j));
    return out;
}

void write_magenta_profile(const MagentaProfile& profile, const std::filesystem::path& json_path) {
    const auto& sig = profile.signature;
    const auto& tex = profile.texture;
    if (tex.channels() < 1 || tex.height() < 1 || tex.width() < 1)
        throw ConfigError("magenta profile needs a non-empty texture");

    const std::filesystem::path bin_path = std::filesystem::path(json_path).replace_extension(".bin");
    json doc;
    doc["signature"] = {
        {"mean", std::vector<double>(sig.mean.begin(), sig.mean.end())},
        {"stddev", std::vector<double>(sig.stddev.begin(), sig.stddev.end())},
        {"width_factor", sig.width_factor},
        {"band_set", sig.band_set},
    };
    doc["texture"] = {
        {"channels", tex.channels()},
        {"height", tex.height()},
        {"width", tex.width()},
        {"source_bbox", {tex.source.col0, tex.source.row0, tex.source.col1, tex.source.row1}},
        {"data", bin_path.filename().string()},
    };
    detail::write_file(json_path, doc.dump(2) + "\n");

    std::string raw;
    raw.reserve(static_cast<std::size_t>(tex.channels() * tex.height() * tex.width()) * 4);
    for (const auto& band : tex.bands)
        for (Index i = 0; i < band.rows(); ++i)
            for (Index j = 0; j < band.cols(); ++j) detail::put_f32(raw, band(i, j));
    detail::write_file(bin_path, raw);
}

MagentaProfile read_magenta_profile(const std::filesystem::path& json_path) {
    json doc;
    try {
        doc = json::parse(detail::read_file(json_path));
    } catch (const json::exception& e) {
        throw FormatError(json_path.string() + ": invalid JSON (" + e.what() + ")");
    }

    MagentaProfile profile;
    try {
        const json& s = doc.at("signature");
        const auto mean = s.at("mean").get<std::vector<double>>();
        const auto stddev = s.at("stddev").get<std::vector<double>>();
        profile.signature.mean = Eigen::Map<const Eigen::ArrayXd>(mean.data(),
                                                                  static_cast<Index>(mean.size()));
        profile.signature.stddev =
            Eigen::Map<const Eigen::ArrayXd>(stddev.data(), static_cast<Index>(stddev.size()));
        profile.signature.width_factor = s.at("width_factor").get<double>();
        profile.signature.band_set = s.at("band_set").get<std::vector<Index>>();

        const json& t = doc.at("texture");
        const auto channels = t.at("channels").get<Index>();
        const auto height = t.at("height").get<Index>();
        const auto width = t.at("width").get<Index>();
        const auto bbox = t.at("source_bbox").get<std::array<Index, 4>>();
        profile.texture.source = {bbox[0], bbox[1], bbox[2], bbox[3]};

        const std::string raw =
            detail::read_file(json_path.parent_path() / t.at("data").get<std::string>());
        const std::size_t expect = static_cast<std::size_t>(channels * height * width) * 4;
        if (raw.size() != expect)
            throw FormatError(json_path.string() + ": texture blob size mismatch");
        const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
        for (Index c = 0; c < channels; ++c) {
            Band<float> band(height, width);
            for (Index i = 0; i < height; ++i)
                for (Index j = 0; j < width; ++j) {
                    band(i, j) = detail::get_f32(p);
                    p += 4;
                }
            profile.texture.bands.push_back(std::move(band));
        }
    } catch (const json::exception& e) {
        throw FormatError(json_path.string() + ": bad profile field (" + e.what() + ")");
    }
    return profile;
}

Band<float> resize_bilinear(const Band<float>& src, Index out_height, Index out_width) {
    Band<float> out(out_height, out_width);
    const double sy = static_cast<double>(src.rows()) / static_cast<double>(out_height);
    const double sx = static_cast<double>(src.cols()) / static_cast<double>(out_width);
    for (Index i = 0; i < out_height; ++i) {
        double fy = (static_cast<double>(i) + 0.5) * sy - 0.5;
        fy = std::min(std::max(fy, 0.0), static_cast<double>(src.rows() - 1));
        const Index y0 = static_cast<Index>(fy);
        const Index y1 = std::min(y0 + 1, src.rows() - 1);
        const double wy = fy - static_cast<double>(y0);
        for (Index j = 0; j < out_width; ++j) {
            double fx = (static_cast<double>(j) + 0.5) * sx - 0.5;
            fx = std::min(std::max(fx, 0.0), static_cast<double>(src.cols() - 1));
            const Index x0 = static_cast<Index>(fx);
            const Index x1 = std::min(x0 + 1, src.cols() - 1);
            const double wx = fx - static_cast<double>(x0);
            const double top = (1.0 - wx) * src(y0, x0) + wx * src(y0, x1);
            const double bot = (1.0 - wx) * src(y1, x0) + wx * src(y1, x1);
            out(i, j) = static_cast<float>((1.0 - wy) * top + wy * bot);
        }
    }
    return out;
}

Band<std::uint8_t> resize_nearest(const Band<std::uint8_t>& src, Index out_height,
                                  Index out_width) {
    Band<std::uint8_t> out(out_height, out_width);
    const double sy = static_cast<double>(src.rows()) / static_cast<double>(out_height);
    const double sx = static_cast<double>(src.cols()) / static_cast<double>(out_width);
    for (Index i = 0; i < out_height; ++i) {
        Index y = static_cast<Index>(std::floor((static_cast<double>(i) + 0.5) * sy));
        y = std::min(std::max(y, Index{0}), src.rows() - 1);
        for (Index j = 0; j < out_width; ++j) {
            Index x = static_cast<Index>(std::floor((static_cast<double>(j) + 0.5) * sx));
            x = std::min(std::max(x, Index{0}), src.cols() - 1);
            out(i, j) = src(y, x);
        }
    }
    return out;
}

PatchSample augment(const PatchSample& sample, const AugmentConfig& config, Rng& rng) {
    if (!(config.scale_min > 0.0 && config.scale_min <= config.scale_max && config.scale_max <= 1.0))
        throw ConfigError("augment crop scale range must satisfy 0 < min <= max <= 1");
    const Index height = sample.height();
    const Index width = sample.width();
    if (height < 1 || width < 1) throw ShapeError("cannot augment an empty sample");

    // Fixed draw order keeps a seed's transform stable: scale, row, col, flips.
    const double scale = rng.uniform(config.scale_min, config.scale_max);
    const double side = std::sqrt(scale);
    const Index crop_h = std::min<Index>(
        height, std::max<Index>(1, static_cast<Index>(std::llround(side * static_cast<double>(height)))));
    const Index crop_w = std::min<Index>(
        width, std::max<Index>(1, static_cast<Index>(std::llround(side * static_cast<double>(width)))));
    const Index row0 = static_cast<Index>(rng.below(static_cast<std::uint64_t>(height - crop_h + 1)));
    const Index col0 = static_cast<Index>(rng.below(static_cast<std::uint64_t>(width - crop_w + 1)));
    const bool vflip = rng.uniform() < config.vflip_prob;
    const bool hflip = rng.uniform() < config.hflip_prob;

    const bool crop_is_identity = crop_h == height && crop_w == width;

    auto transform_image = [&](const Band<float>& band) {
        Band<float> out = crop_is_identity
            ? band
            : resize_bilinear(band.block(row0, col0, crop_h, crop_w), height, width);
        if (vflip) out = out.colwise().reverse().eval();
        if (hflip) out = out.rowwise().reverse().eval();
        return out;
    };
    auto transform_mask = [&](const Band<std::uint8_t>& band) {
        Band<std::uint8_t> out = crop_is_identity
            ? band
            : resize_nearest(band.block(row0, col0, crop_h, crop_w), height, width);
        if (vflip) out = out.colwise().reverse().eval();
        if (hflip) out = out.rowwise().reverse().eval();
        return out;
    };

    PatchSample out = sample;
    for (auto& band : out.img1) band = transform_image(band);
    for (auto& band : out.img2) band = transform_image(band);
    out.mask = transform_mask(out.mask);
    return out;
}

} // namespace chdet
