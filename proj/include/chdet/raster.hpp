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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "chdet/errors.hpp"
#include "chdet/geotransform.hpp"

namespace chdet {

using Index = Eigen::Index;

/// One raster band: a dense row-major 2-D array.
template <class T>
using Band = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using BandF = Band<float>;
using BandU16 = Band<std::uint16_t>;
using BandU8 = Band<std::uint8_t>;

/// Multi-band georeferenced image. All bands share height, width and
/// transform; the raw Landsat flavor uses T = uint16_t with 0 as the
/// all-band nodata sentinel, processed data uses T = float.
template <class T>
struct RasterStack {
    std::vector<Band<T>> bands;
    GeoTransform transform;
    std::vector<std::string> band_names; ///< may be empty

    Index band_count() const { return static_cast<Index>(bands.size()); }
    Index height() const { return bands.empty() ? 0 : bands.front().rows(); }
    Index width() const { return bands.empty() ? 0 : bands.front().cols(); }

    /// Nodata rule: a pixel is null iff it is exactly 0 in every band.
    bool is_null(Index row, Index col) const {
        for (const auto& b : bands)
            if (b(row, col) != T(0)) return false;
        return true;
    }

    void require_consistent() const {
        if (bands.empty()) throw ShapeError("raster stack has no bands");
        for (const auto& b : bands)
            if (b.rows() != height() || b.cols() != width())
                throw ShapeError("raster bands disagree on height/width");
    }
};

using RasterStackU16 = RasterStack<std::uint16_t>;
using RasterStackF = RasterStack<float>;

/// H x W mask of {0, 1} values on a georeferenced grid.
struct BinaryMask {
    Band<std::uint8_t> data;
    GeoTransform transform;

    Index height() const { return data.rows(); }
    Index width() const { return data.cols(); }
};

template <class T>
RasterStack<T> make_stack(std::vector<Band<T>> bands, const GeoTransform& transform,
                          std::vector<std::string> band_names = {}) {
    RasterStack<T> s{std::move(bands), transform, std::move(band_names)};
    s.require_consistent();
    return s;
}

/// Mask of null pixels (all bands exactly zero), 1 = null.
template <class T>
Band<std::uint8_t> null_mask(const RasterStack<T>& stack) {
    stack.require_consistent();
    Band<std::uint8_t> out = Band<std::uint8_t>::Constant(stack.height(), stack.width(), 1);
    for (const auto& b : stack.bands)
        out = out * (b == T(0)).template cast<std::uint8_t>();
    return out;
}

/// Nearest-neighbor resampling of `src` onto the grid (`target`, H, W).
/// Each output pixel takes the source pixel whose center is nearest to the
/// world position of the output pixel center; positions outside the source
/// become T(0), the nodata value. Throws EmptyOverlapError when no output
/// pixel lands inside the source.
template <class T>
RasterStack<T> resample_to_grid(const RasterStack<T>& src, const GeoTransform& target,
                                Index height, Index width) {
    src.require_consistent();
    if (height < 1 || width < 1) throw ConfigError("resample target must be at least 1x1");

    // Identity target is contractually a bit-exact copy.
    if (target == src.transform && height == src.height() && width == src.width())
        return src;

    RasterStack<T> out;
    out.transform = target;
    out.band_names = src.band_names;
    out.bands.reserve(src.bands.size());
    for (Index b = 0; b < src.band_count(); ++b)
        out.bands.emplace_back(Band<T>::Zero(height, width));

    const Index src_h = src.height();
    const Index src_w = src.width();
    std::int64_t hits = 0;
    for (Index i = 0; i < height; ++i) {
        for (Index j = 0; j < width; ++j) {
            auto [x, y] = target.pixel_center_world(static_cast<double>(i), static_cast<double>(j));
            auto [r, c] = src.transform.world_to_pixel(x, y);
            // The source pixel containing the point is the one whose center
            // is nearest (ties at pixel edges go to the containing pixel).
            const auto si = static_cast<Index>(std::floor(r));
            const auto sj = static_cast<Index>(std::floor(c));
            if (si < 0 || si >= src_h || sj < 0 || sj >= src_w) continue;
            ++hits;
            for (Index b = 0; b < src.band_count(); ++b)
                out.bands[static_cast<std::size_t>(b)](i, j) = src.bands[static_cast<std::size_t>(b)](si, sj);
        }
    }
    if (hits == 0)
        throw EmptyOverlapError("resample target does not overlap the source extent");
    return out;
}

/// Grid footprint of one raster, used by intersect_extents.
struct GridExtent {
    GeoTransform transform;
    Index height = 0;
    Index width = 0;
};

/// Crop window into one of the inputs of intersect_extents.
struct CropRegion {
    Index row0 = 0;
    Index col0 = 0;
    Index height = 0;
    Index width = 0;
};

/// Common-extent crop regions for a set of co-gridded rasters.
///
/// All inputs must share the linear part of their transform and sit on the
/// same sub-pixel phase (origins an integer number of pixels apart), else
/// GridMismatchError. An empty common rectangle raises EmptyOverlapError.
/// The returned regions are index-aligned with `grids`; cropping each input
/// by its region yields rasters with identical transform, height and width
/// where pixel (i, j) is the same world position in every output.
std::vector<CropRegion> intersect_extents(std::span<const GridExtent> grids,
                                          double phase_tol = 1e-6);

template <class T>
GridExtent extent_of(const RasterStack<T>& s) {
    return {s.transform, s.height(), s.width()};
}

inline GridExtent extent_of(const BinaryMask& m) {
    return {m.transform, m.height(), m.width()};
}

template <class T>
RasterStack<T> crop(const RasterStack<T>& src, const CropRegion& r) {
    RasterStack<T> out;
    out.transform = src.transform.shifted(static_cast<double>(r.row0), static_cast<double>(r.col0));
    out.band_names = src.band_names;
    out.bands.reserve(src.bands.size());
    for (const auto& b : src.bands)
        out.bands.emplace_back(b.block(r.row0, r.col0, r.height, r.width));
    return out;
}

inline BinaryMask crop(const BinaryMask& src, const CropRegion& r) {
    BinaryMask out;
    out.transform = src.transform.shifted(static_cast<double>(r.row0), static_cast<double>(r.col0));
    out.data = src.data.block(r.row0, r.col0, r.height, r.width);
    return out;
}

} // namespace chdet
