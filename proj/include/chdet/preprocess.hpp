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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "chdet/dataset.hpp"
#include "chdet/raster.hpp"
#include "chdet/rng.hpp"

namespace chdet {

/// Global histogram equalization of one integer band with `levels` possible
/// intensities: value k maps to round((levels - 1) * CDF(k)). The mapping is
/// monotone non-decreasing and depends only on the histogram.
/// Throws DomainError when a value is >= levels.
template <class T>
Band<T> equalize_histogram(const Band<T>& band, std::int64_t levels) {
    static_assert(std::is_integral_v<T>);
    if (levels < 2) throw ConfigError("equalization needs at least 2 intensity levels");

    std::vector<std::int64_t> histogram(static_cast<std::size_t>(levels), 0);
    for (Index i = 0; i < band.rows(); ++i)
        for (Index j = 0; j < band.cols(); ++j) {
            const auto v = static_cast<std::int64_t>(band(i, j));
            if (v < 0 || v >= levels)
                throw DomainError("pixel value " + std::to_string(v) +
                                  " outside [0, " + std::to_string(levels - 1) + "]");
            ++histogram[static_cast<std::size_t>(v)];
        }

    const double total = static_cast<double>(band.size());
    std::vector<T> lut(static_cast<std::size_t>(levels));
    std::int64_t cumulative = 0;
    for (std::int64_t k = 0; k < levels; ++k) {
        cumulative += histogram[static_cast<std::size_t>(k)];
        const double cdf = static_cast<double>(cumulative) / total;
        lut[static_cast<std::size_t>(k)] =
            static_cast<T>(std::llround(static_cast<double>(levels - 1) * cdf));
    }

    Band<T> out(band.rows(), band.cols());
    for (Index i = 0; i < band.rows(); ++i)
        for (Index j = 0; j < band.cols(); ++j)
            out(i, j) = lut[static_cast<std::size_t>(band(i, j))];
    return out;
}

/// Per-band equalization of a whole raw stack (levels = 65536 for u16).
RasterStack<std::uint16_t> equalize_stack(const RasterStack<std::uint16_t>& stack,
                                          std::int64_t levels = 65536);

/// Equalization of an already-standardized float band by quantizing its
/// value range into `bins` uniform levels, equalizing those, and mapping
/// the result back to the original [min, max] range. Constant bands pass
/// through unchanged.
Band<float> equalize_quantized(const Band<float>& band, std::int64_t bins = 4096);

/// Inclusive pixel rectangle, (x, y) = (col, row) image convention.
struct PixelBox {
    Index col0 = 0;
    Index row0 = 0;
    Index col1 = 0;
    Index row1 = 0;

    Index height() const { return row1 - row0 + 1; }
    Index width() const { return col1 - col0 + 1; }
};

/// Spectral signature of the clear-cut-with-fire ("magenta") pattern:
/// per-band mean and population std over a reference bounding box, plus the
/// half-width factor (mean +/- k std) and the band subset it applies to.
struct MagentaSignature {
    Eigen::ArrayXd mean;
    Eigen::ArrayXd stddev;
    double width_factor = 1.2;
    std::vector<Index> band_set; ///< bands participating in the test
};

/// Texture tile used to overwrite detected magenta pixels, cropped from a
/// reference scene region showing a typical deforestation pattern.
struct TexturePatch {
    std::vector<Band<float>> bands;
    PixelBox source;

    Index channels() const { return static_cast<Index>(bands.size()); }
    Index height() const { return bands.empty() ? 0 : bands.front().rows(); }
    Index width() const { return bands.empty() ? 0 : bands.front().cols(); }
};

template <class T>
MagentaSignature fit_magenta(const RasterStack<T>& stack, const PixelBox& bbox,
                             double width_factor = 1.2) {
    stack.require_consistent();
    if (bbox.col1 < bbox.col0 || bbox.row1 < bbox.row0)
        throw ConfigError("magenta reference bounding box is empty");
    if (bbox.row0 < 0 || bbox.col0 < 0 || bbox.row1 >= stack.height() || bbox.col1 >= stack.width())
        throw ConfigError("magenta reference bounding box lies outside the image");

    MagentaSignature sig;
    sig.width_factor = width_factor;
    sig.mean.resize(stack.band_count());
    sig.stddev.resize(stack.band_count());
    const double n = static_cast<double>(bbox.height() * bbox.width());
    for (Index b = 0; b < stack.band_count(); ++b) {
        const auto box = stack.bands[static_cast<std::size_t>(b)]
                             .block(bbox.row0, bbox.col0, bbox.height(), bbox.width())
                             .template cast<double>();
        const double mean = box.sum() / n;
        sig.mean[b] = mean;
        sig.stddev[b] = std::sqrt((box - mean).square().sum() / n);
        sig.band_set.push_back(b);
    }
    return sig;
}

/// Flags pixels whose value lies within mean +/- k*std in every band of the
/// signature's band set.
template <class T>
BinaryMask detect_magenta(const RasterStack<T>& stack, const MagentaSignature& sig) {
    stack.require_consistent();
    for (Index b : sig.band_set)
        if (b < 0 || b >= stack.band_count() || b >= sig.mean.size())
            throw ShapeError("magenta signature band set does not fit the stack");

    BinaryMask flags;
    flags.transform = stack.transform;
    flags.data = Band<std::uint8_t>::Constant(stack.height(), stack.width(), 1);
    for (Index b : sig.band_set) {
        const double lo = sig.mean[b] - sig.width_factor * sig.stddev[b];
        const double hi = sig.mean[b] + sig.width_factor * sig.stddev[b];
        const auto& band = stack.bands[static_cast<std::size_t>(b)];
        for (Index i = 0; i < stack.height(); ++i)
            for (Index j = 0; j < stack.width(); ++j) {
                const double v = static_cast<double>(band(i, j));
                if (!(v >= lo && v <= hi)) flags.data(i, j) = 0;
            }
    }
    return flags;
}

template <class T>
TexturePatch make_texture(const RasterStack<T>& stack, const PixelBox& bbox) {
    stack.require_consistent();
    if (bbox.col1 < bbox.col0 || bbox.row1 < bbox.row0)
        throw ConfigError("texture bounding box is empty");
    if (bbox.row0 < 0 || bbox.col0 < 0 || bbox.row1 >= stack.height() || bbox.col1 >= stack.width())
        throw ConfigError("texture bounding box lies outside the image");
    TexturePatch tex;
    tex.source = bbox;
    tex.bands.reserve(stack.bands.size());
    for (const auto& band : stack.bands)
        tex.bands.emplace_back(band.block(bbox.row0, bbox.col0, bbox.height(), bbox.width())
                                   .template cast<float>());
    return tex;
}

/// Replaces flagged pixels with the texture tiled periodically across the
/// image: pixel (i, j) takes tex(i mod th, j mod tw). Unflagged pixels are
/// untouched.
template <class T>
RasterStack<T> replace_magenta(const RasterStack<T>& stack, const BinaryMask& flags,
                               const TexturePatch& tex) {
    stack.require_consistent();
    if (flags.height() != stack.height() || flags.width() != stack.width())
        throw ShapeError("flag mask shape does not match the image");
    if (tex.channels() != stack.band_count())
        throw ShapeError("texture channel count does not match the image");
    if (tex.height() < 1 || tex.width() < 1) throw ConfigError("texture is empty");

    RasterStack<T> out = stack;
    for (Index b = 0; b < stack.band_count(); ++b) {
        auto& band = out.bands[static_cast<std::size_t>(b)];
        const auto& tile = tex.bands[static_cast<std::size_t>(b)];
        for (Index i = 0; i < stack.height(); ++i)
            for (Index j = 0; j < stack.width(); ++j) {
                if (!flags.data(i, j)) continue;
                const float v = tile(i % tex.height(), j % tex.width());
                if constexpr (std::is_integral_v<T>)
                    band(i, j) = static_cast<T>(std::llround(v));
                else
                    band(i, j) = static_cast<T>(v);
            }
    }
    return out;
}

/// Signature + texture bundle rides with a dataset as JSON plus a raw f32
/// blob holding the texture pixels.
struct MagentaProfile {
    MagentaSignature signature;
    TexturePatch texture;
};

void write_magenta_profile(const MagentaProfile& profile, const std::filesystem::path& json_path);
MagentaProfile read_magenta_profile(const std::filesystem::path& json_path);

/// Stochastic augmentation settings; defaults match the training recipe
/// (area-scale crop in [0.4, 1], then 50/50 vertical and horizontal flips).
struct AugmentConfig {
    double scale_min = 0.4;
    double scale_max = 1.0;
    double vflip_prob = 0.5;
    double hflip_prob = 0.5;
};

/// Applies one random crop-resize plus flips, with the identical geometric
/// transform on img1, img2 and mask. Image channels resize bilinearly, the
/// mask with nearest-neighbor, so mask values stay in {0, 1}. Draw order
/// from `rng`: scale, crop row, crop col, vflip, hflip.
PatchSample augment(const PatchSample& sample, const AugmentConfig& config, Rng& rng);

/// Bilinear resize with half-pixel centers; exact copy when sizes match.
Band<float> resize_bilinear(const Band<float>& src, Index out_height, Index out_width);

/// Nearest-neighbor resize with the same half-pixel mapping.
Band<std::uint8_t> resize_nearest(const Band<std::uint8_t>& src, Index out_height, Index out_width);

} // namespace chdet
