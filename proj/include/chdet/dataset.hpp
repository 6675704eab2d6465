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

#include <cstdint>
#include <string>
#include <vector>

#include "chdet/polygon.hpp"
#include "chdet/raster.hpp"

namespace chdet {

/// Aligned training triple: two image patches and the change mask cut from
/// the same window. Spatial size is 256x256 unless configured otherwise.
struct PatchSample {
    std::vector<Band<float>> img1;
    std::vector<Band<float>> img2;
    Band<std::uint8_t> mask;
    std::string scene_id;
    int year1 = 0;
    int year2 = 0;
    std::int64_t index = 0;
    std::vector<std::string> band_names;

    Index channels() const { return static_cast<Index>(img1.size()); }
    Index height() const { return mask.rows(); }
    Index width() const { return mask.cols(); }
};

/// Per-band mean and population standard deviation over one full scene.
struct BandStats {
    Eigen::ArrayXd mean;
    Eigen::ArrayXd stddev;
};

template <class T>
BandStats compute_band_stats(const RasterStack<T>& stack) {
    stack.require_consistent();
    BandStats stats;
    stats.mean.resize(stack.band_count());
    stats.stddev.resize(stack.band_count());
    const double n = static_cast<double>(stack.height() * stack.width());
    for (Index b = 0; b < stack.band_count(); ++b) {
        const auto band = stack.bands[static_cast<std::size_t>(b)].template cast<double>();
        const double mean = band.sum() / n;
        const double var = (band - mean).square().sum() / n;
        stats.mean[b] = mean;
        stats.stddev[b] = std::sqrt(var);
    }
    return stats;
}

/// Per-band standardization (x - mean) / std using scene-level statistics.
/// Bands whose std falls below 1e-8 map to all zeros.
template <class T>
RasterStack<float> standardize(const RasterStack<T>& stack, const BandStats& stats) {
    stack.require_consistent();
    if (stats.mean.size() != stack.band_count() || stats.stddev.size() != stack.band_count())
        throw ShapeError("band statistics do not match the stack's band count");
    RasterStack<float> out;
    out.transform = stack.transform;
    out.band_names = stack.band_names;
    out.bands.reserve(stack.bands.size());
    for (Index b = 0; b < stack.band_count(); ++b) {
        const auto& band = stack.bands[static_cast<std::size_t>(b)];
        if (stats.stddev[b] < 1e-8) {
            out.bands.emplace_back(Band<float>::Zero(stack.height(), stack.width()));
        } else {
            const double mean = stats.mean[b];
            const double inv = 1.0 / stats.stddev[b];
            out.bands.emplace_back(
                ((band.template cast<double>() - mean) * inv).template cast<float>());
        }
    }
    return out;
}

/// NDVI band (nir - red) / (nir + red) from reflectance values, clamped to
/// [-1, 1]; pixels where the denominator is zero map to 0.
template <class T>
Band<float> compute_ndvi(const RasterStack<T>& stack, Index red_band, Index nir_band) {
    stack.require_consistent();
    if (red_band < 0 || red_band >= stack.band_count() || nir_band < 0 ||
        nir_band >= stack.band_count())
        throw ConfigError("NDVI band index out of range");
    const auto& red = stack.bands[static_cast<std::size_t>(red_band)];
    const auto& nir = stack.bands[static_cast<std::size_t>(nir_band)];
    Band<float> out(stack.height(), stack.width());
    for (Index i = 0; i < stack.height(); ++i)
        for (Index j = 0; j < stack.width(); ++j) {
            const float r = static_cast<float>(red(i, j));
            const float n = static_cast<float>(nir(i, j));
            const float denom = n + r;
            float v = denom == 0.0f ? 0.0f : (n - r) / denom;
            out(i, j) = std::min(1.0f, std::max(-1.0f, v));
        }
    return out;
}

/// Fills polygons onto the grid: a pixel becomes 1 iff its center lies
/// inside any feature whose label year Y satisfies year1 < Y <= year2,
/// with the even-odd rule handling holes. Everything else stays 0.
BinaryMask rasterize_polygons(const PolygonLayer& layer, const GeoTransform& grid,
                              Index height, Index width, int year1, int year2);

/// Fills a single polygon, ignoring year labels. Used by the scene
/// generator and handy for tests.
void fill_polygon(const Polygon& shape, const GeoTransform& grid, Band<std::uint8_t>& mask);

struct WindowPlan {
    Index row0 = 0;
    Index col0 = 0;
};

struct ExtractOptions {
    Index window = 256;
    Index stride = 200;
    double max_null_frac = 0.05;
};

/// Window start positions {0, stride, 2*stride, ...} with start + window <=
/// dim on both axes, row-major order. Throws ConfigError when the window
/// exceeds either dimension.
std::vector<WindowPlan> plan_windows(Index height, Index width, Index window, Index stride);

/// Cuts aligned (img1, img2, mask) windows. A window is discarded when the
/// fraction of pixels that are null in img1 or img2 (union of positions)
/// exceeds max_null_frac. When explicit null masks are given they override
/// the all-bands-zero rule computed from the stacks, which lets callers
/// carry nullness from raw inputs through processed data.
std::vector<PatchSample> extract_patches(const RasterStack<float>& img1,
                                         const RasterStack<float>& img2, const BinaryMask& mask,
                                         const ExtractOptions& options = {},
                                         const Band<std::uint8_t>* null1 = nullptr,
                                         const Band<std::uint8_t>* null2 = nullptr);

} // namespace chdet
