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

#include <optional>
#include <string>

#include "chdet/polygon.hpp"
#include "chdet/preprocess.hpp"
#include "chdet/raster.hpp"
#include "chdet/rng.hpp"

namespace chdet {

/// Synthetic bitemporal scene generator. Produces a 7-band forest image
/// pair where the second image repeats the first except for freshly
/// "deforested" blobs, plus the polygon layer tracing those blobs with
/// dYYYY labels. Blob spectra come from three fixed per-band signatures
/// (forest, cleared, clear-cut-with-fire "magenta"), so the magenta
/// detection chain has a planted ground truth.
struct SynthConfig {
    Index height = 1024;
    Index width = 1024;
    int blob_count = 30;     ///< new deforestation between year1 and year2
    int old_blob_count = 5;  ///< cleared before year1; present in both images
    double magenta_frac = 0.0; ///< fraction of new blobs painted magenta
    double blob_radius_min = 8.0;
    double blob_radius_max = 40.0;
    int year1 = 2018;
    int year2 = 2019;
    Index corner_cut = 0;      ///< nodata triangle size at two scene corners
    Index t2_pixel_shift = 0;  ///< whole-pixel offset of the t2 grid
    std::uint64_t seed = 0;
    GeoTransform transform{500000.0, 8000000.0, 30.0, -30.0, 0.0, 0.0};
};

struct SynthScene {
    RasterStack<std::uint16_t> img1;
    RasterStack<std::uint16_t> img2;
    PolygonLayer polygons;

    /// Pure-magenta rectangle for fitting the spectral signature; present
    /// when magenta blobs were planted.
    std::optional<PixelBox> magenta_reference;
    /// Pure-cleared rectangle usable as the replacement texture source.
    std::optional<PixelBox> texture_reference;
};

SynthScene gen_scene(const SynthConfig& config);

/// Per-producer corruption of the truth mask into a probability map.
struct ProducerErrorModel {
    std::string name;
    double miss_rate = 0.0;        ///< chance a truth pixel reads as background
    double false_alarm_rate = 0.0; ///< chance a background pixel reads as change
    int blur_radius = 0;           ///< box blur half-width applied to the signal
    double noise = 0.0;            ///< uniform jitter amplitude on the final map
};

/// Truth corrupted per the model and squashed to [0, 1]; with a zero-error
/// model the map reproduces the truth exactly.
Band<float> gen_producer_map(const Band<std::uint8_t>& truth, const ProducerErrorModel& model,
                             Rng rng);

/// Fixed spectral signatures used by the generator, 7 bands each.
std::array<double, 7> forest_signature();
std::array<double, 7> cleared_signature();
std::array<double, 7> magenta_signature();

} // namespace chdet
