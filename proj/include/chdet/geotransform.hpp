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

#include <array>
#include <cmath>
#include <utility>

#include "chdet/errors.hpp"

namespace chdet {

/// Six-coefficient affine mapping between pixel and world coordinates.
///
/// Pixel coordinates are (row, col) with (0, 0) at the top-left *corner* of
/// the top-left pixel; the center of pixel (i, j) is at (i + 0.5, j + 0.5).
/// World coordinates follow the usual GDAL-style model:
///
///   x = origin_x + col * pixel_w + row * rot_x
///   y = origin_y + col * rot_y  + row * pixel_h
struct GeoTransform {
    double origin_x = 0.0; ///< world x of the (0,0) pixel corner
    double origin_y = 0.0; ///< world y of the (0,0) pixel corner
    double pixel_w = 1.0;  ///< signed pixel width in world units
    double pixel_h = 1.0;  ///< signed pixel height in world units
    double rot_x = 0.0;    ///< row contribution to x (rotation/shear)
    double rot_y = 0.0;    ///< col contribution to y (rotation/shear)

    double det() const { return pixel_w * pixel_h - rot_x * rot_y; }

    std::pair<double, double> pixel_to_world(double row, double col) const {
        return {origin_x + col * pixel_w + row * rot_x,
                origin_y + col * rot_y + row * pixel_h};
    }

    /// Inverse of pixel_to_world; fractional coordinates, unrounded.
    /// Throws ConfigError if the linear part is singular.
    std::pair<double, double> world_to_pixel(double x, double y) const {
        const double d = det();
        if (!(std::abs(d) > 0.0) || !std::isfinite(d))
            throw ConfigError("geotransform is singular, cannot invert");
        const double dx = x - origin_x;
        const double dy = y - origin_y;
        const double col = (dx * pixel_h - rot_x * dy) / d;
        const double row = (dy * pixel_w - rot_y * dx) / d;
        return {row, col};
    }

    std::pair<double, double> pixel_center_world(double row, double col) const {
        return pixel_to_world(row + 0.5, col + 0.5);
    }

    /// Transform of a crop starting at pixel (row0, col0) of this grid.
    GeoTransform shifted(double row0, double col0) const {
        GeoTransform out = *this;
        auto [x, y] = pixel_to_world(row0, col0);
        out.origin_x = x;
        out.origin_y = y;
        return out;
    }

    bool same_linear_part(const GeoTransform& other, double tol = 1e-9) const {
        return std::abs(pixel_w - other.pixel_w) <= tol &&
               std::abs(pixel_h - other.pixel_h) <= tol &&
               std::abs(rot_x - other.rot_x) <= tol &&
               std::abs(rot_y - other.rot_y) <= tol;
    }

    bool operator==(const GeoTransform&) const = default;

    /// GDAL ordering: [origin_x, pixel_w, rot_x, origin_y, rot_y, pixel_h].
    std::array<double, 6> coefficients() const {
        return {origin_x, pixel_w, rot_x, origin_y, rot_y, pixel_h};
    }

    static GeoTransform from_coefficients(const std::array<double, 6>& c) {
        GeoTransform t;
        t.origin_x = c[0];
        t.pixel_w = c[1];
        t.rot_x = c[2];
        t.origin_y = c[3];
        t.rot_y = c[4];
        t.pixel_h = c[5];
        return t;
    }
};

} // namespace chdet
