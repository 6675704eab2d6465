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

#include <filesystem>
#include <variant>

#include "chdet/polygon.hpp"
#include "chdet/raster.hpp"

namespace chdet {

/// Raster of either supported dtype, as read from a sidecar.
using AnyRaster = std::variant<RasterStack<std::uint16_t>, RasterStack<float>>;

/// Writes `stack` as a JSON sidecar at `json_path` plus a raw little-endian
/// band-major binary next to it (same stem, .bin extension).
void write_raster(const RasterStack<std::uint16_t>& stack, const std::filesystem::path& json_path);
void write_raster(const RasterStack<float>& stack, const std::filesystem::path& json_path);

/// Reads a sidecar + binary pair written by write_raster.
AnyRaster read_raster(const std::filesystem::path& json_path);

/// Reads a raster that must have the requested dtype.
RasterStack<std::uint16_t> read_raster_u16(const std::filesystem::path& json_path);
RasterStack<float> read_raster_f32(const std::filesystem::path& json_path);

/// Masks travel either as a 1-band u16 raster with {0,1} values or as a
/// binary PGM (P5, maxval 1).
void write_mask(const BinaryMask& mask, const std::filesystem::path& json_path);
BinaryMask read_mask(const std::filesystem::path& path); ///< dispatches on .pgm extension

void write_mask_pgm(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask read_mask_pgm(const std::filesystem::path& path);

/// Polygon layers travel as a JSON FeatureCollection whose features carry a
/// "class" property holding the dYYYY label.
void write_polygons(const PolygonLayer& layer, const std::filesystem::path& path);
PolygonLayer read_polygons(const std::filesystem::path& path);

} // namespace chdet
