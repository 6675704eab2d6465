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

#include "chdet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace chdet {

namespace {

struct PixelRing {
    std::vector<std::pair<double, double>> pts; // (row, col) pixel coordinates
};

// Scanline even-odd fill over one polygon's rings (exterior + holes).
//
// For the pixel center (i + 0.5, j + 0.5) the even-odd rule asks whether an
// odd number of edge crossings lies strictly to the right of the center.
// The walk below keeps a pointer into the sorted crossing columns and
// compares each crossing against the center directly, so boundary pixels
// resolve exactly like a per-pixel ray cast using the same intersection
// formula.
void fill_rings(const std::vector<PixelRing>& rings, Band<std::uint8_t>& mask) {
    const Index height = mask.rows();
    const Index width = mask.cols();

    double min_r = std::numeric_limits<double>::infinity();
    double max_r = -min_r;
    for (const auto& ring : rings)
        for (const auto& [r, c] : ring.pts) {
            min_r = std::min(min_r, r);
            max_r = std::max(max_r, r);
        }
    if (!(min_r < max_r)) return;

    const Index row_begin = std::max<Index>(0, static_cast<Index>(std::floor(min_r - 0.5)));
    const Index row_end = std::min<Index>(height - 1, static_cast<Index>(std::ceil(max_r)));

    std::vector<double> crossings;
    for (Index i = row_begin; i <= row_end; ++i) {
        const double y = static_cast<double>(i) + 0.5;
        crossings.clear();
        for (const auto& ring : rings) {
            const std::size_t n = ring.pts.size();
            for (std::size_t a = 0; a < n; ++a) {
                const auto& p = ring.pts[a];
                const auto& q = ring.pts[(a + 1) % n];
                if ((p.first > y) != (q.first > y)) {
                    const double x =
                        p.second + (y - p.first) * (q.second - p.second) / (q.first - p.first);
                    crossings.push_back(x);
                }
            }
        }
        if (crossings.empty()) continue;
        std::sort(crossings.begin(), crossings.end());

        const std::size_t total = crossings.size();
        std::size_t passed = 0; // crossings <= current center column
        for (Index j = 0; j < width; ++j) {
            const double c = static_cast<double>(j) + 0.5;
            while (passed < total && crossings[passed] <= c) ++passed;
            if ((total - passed) % 2 == 1) mask(i, j) = 1;
        }
    }
}

std::vector<PixelRing> to_pixel_rings(const Polygon& shape, const GeoTransform& grid) {
    std::vector<PixelRing> rings;
    auto convert = [&](const Ring& ring) {
        PixelRing out;
        out.pts.reserve(ring.size());
        for (const auto& v : ring) out.pts.push_back(grid.world_to_pixel(v.x(), v.y()));
        return out;
    };
    rings.push_back(convert(shape.exterior));
    for (const auto& h : shape.holes) rings.push_back(convert(h));
    return rings;
}

} // namespace

void fill_polygon(const Polygon& shape, const GeoTransform& grid, Band<std::uint8_t>& mask) {
    fill_rings(to_pixel_rings(shape, grid), mask);
}

BinaryMask rasterize_polygons(const PolygonLayer& layer, const GeoTransform& grid, Index height,
                              Index width, int year1, int year2) {
    if (height < 1 || width < 1) throw ConfigError("rasterization grid must be at least 1x1");
    BinaryMask mask;
    mask.transform = grid;
    mask.data = Band<std::uint8_t>::Zero(height, width);
    for (const auto& feature : layer.features) {
        if (!(feature.year > year1 && feature.year <= year2)) continue;
        fill_polygon(feature.shape, grid, mask.data);
    }
    return mask;
}

std::vector<WindowPlan> plan_windows(Index height, Index width, Index window, Index stride) {
    if (window < 1 || stride < 1) throw ConfigError("window and stride must be positive");
    if (window > height || window > width)
        throw ConfigError("window of " + std::to_string(window) + " exceeds image dimensions " +
                          std::to_string(height) + "x" + std::to_string(width));
    std::vector<WindowPlan> plans;
    for (Index r = 0; r + window <= height; r += stride)
        for (Index c = 0; c + window <= width; c += stride)
            plans.push_back({r, c});
    return plans;
}

std::vector<PatchSample> extract_patches(const RasterStack<float>& img1,
                                         const RasterStack<float>& img2, const BinaryMask& mask,
                                         const ExtractOptions& options,
                                         const Band<std::uint8_t>* null1,
                                         const Band<std::uint8_t>* null2) {
    img1.require_consistent();
    img2.require_consistent();
    if (img1.height() != img2.height() || img1.width() != img2.width() ||
        img1.height() != mask.height() || img1.width() != mask.width())
        throw ShapeError("images and mask must share height and width");
    if (img1.transform != img2.transform || img1.transform != mask.transform)
        throw ShapeError("images and mask must share the same transform");

    Band<std::uint8_t> computed_null1;
    Band<std::uint8_t> computed_null2;
    if (!null1) {
        computed_null1 = null_mask(img1);
        null1 = &computed_null1;
    }
    if (!null2) {
        computed_null2 = null_mask(img2);
        null2 = &computed_null2;
    }
    if (null1->rows() != img1.height() || null1->cols() != img1.width() ||
        null2->rows() != img1.height() || null2->cols() != img1.width())
        throw ShapeError("null masks must match the image shape");

    const auto plans = plan_windows(img1.height(), img1.width(), options.window, options.stride);
    const double window_area = static_cast<double>(options.window * options.window);

    std::vector<PatchSample> samples;
    std::int64_t j = 0;
    for (const auto& plan : plans) {
        std::int64_t nulls = 0;
        for (Index r = plan.row0; r < plan.row0 + options.window; ++r)
            for (Index c = plan.col0; c < plan.col0 + options.window; ++c)
                if ((*null1)(r, c) || (*null2)(r, c)) ++nulls;
        if (static_cast<double>(nulls) / window_area > options.max_null_frac) continue;

        PatchSample s;
        s.index = j++;
        s.band_names = img1.band_names;
        s.mask = mask.data.block(plan.row0, plan.col0, options.window, options.window);
        s.img1.reserve(img1.bands.size());
        s.img2.reserve(img2.bands.size());
        for (const auto& b : img1.bands)
            s.img1.emplace_back(b.block(plan.row0, plan.col0, options.window, options.window));
        for (const auto& b : img2.bands)
            s.img2.emplace_back(b.block(plan.row0, plan.col0, options.window, options.window));
        samples.push_back(std::move(s));
    }
    return samples;
}

} // namespace chdet
