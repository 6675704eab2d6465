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

#include "chdet/raster.hpp"

#include <algorithm>
#include <cmath>

namespace chdet {

std::vector<CropRegion> intersect_extents(std::span<const GridExtent> grids, double phase_tol) {
    if (grids.empty()) throw ConfigError("intersect_extents needs at least one raster");
    const GeoTransform& ref = grids[0].transform;

    // Offsets of every input's (0,0) pixel expressed in the reference grid.
    std::vector<std::pair<Index, Index>> offsets;
    offsets.reserve(grids.size());
    for (const auto& g : grids) {
        if (!g.transform.same_linear_part(ref))
            throw GridMismatchError("rasters have different pixel size or rotation");
        auto [r, c] = ref.world_to_pixel(g.transform.origin_x, g.transform.origin_y);
        const double ri = std::round(r);
        const double ci = std::round(c);
        if (std::abs(r - ri) > phase_tol || std::abs(c - ci) > phase_tol)
            throw GridMismatchError("rasters are offset by a fraction of a pixel");
        offsets.emplace_back(static_cast<Index>(ri), static_cast<Index>(ci));
    }

    Index row0 = offsets[0].first;
    Index col0 = offsets[0].second;
    Index row1 = row0 + grids[0].height;
    Index col1 = col0 + grids[0].width;
    for (std::size_t k = 1; k < grids.size(); ++k) {
        row0 = std::max(row0, offsets[k].first);
        col0 = std::max(col0, offsets[k].second);
        row1 = std::min(row1, offsets[k].first + grids[k].height);
        col1 = std::min(col1, offsets[k].second + grids[k].width);
    }
    if (row1 <= row0 || col1 <= col0)
        throw EmptyOverlapError("raster extents have no common area");

    std::vector<CropRegion> regions;
    regions.reserve(grids.size());
    for (std::size_t k = 0; k < grids.size(); ++k)
        regions.push_back({row0 - offsets[k].first, col0 - offsets[k].second,
                           row1 - row0, col1 - col0});
    return regions;
}

} // namespace chdet
