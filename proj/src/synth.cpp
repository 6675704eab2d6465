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

#include "chdet/synth.hpp"

#include <cmath>
#include <numbers>

#include "chdet/dataset.hpp"

namespace chdet {

namespace {

constexpr std::uint64_t kBaseTag = 1;
constexpr std::uint64_t kShapesTag = 2;
constexpr std::uint64_t kPaintOldTag = 3;
constexpr std::uint64_t kPaintNewTag = 4;
constexpr std::uint64_t kPaintMagentaTag = 5;

constexpr Index kBands = 7;

// Correlated multiplicative jitter: one shared draw per pixel plus a small
// per-band term. The shared draw keeps magenta pixels inside the fitted
// mean +/- 1.2 std interval in all bands at once for most pixels.
template <class Signature>
void draw_pixel(const Signature& mu, double shared_amp, double band_amp, Rng& rng,
                std::vector<Band<std::uint16_t>>& bands, Index i, Index j) {
    const double shared = rng.uniform(-1.0, 1.0);
    for (Index b = 0; b < kBands; ++b) {
        const double jitter = 1.0 + shared_amp * shared + band_amp * rng.uniform(-1.0, 1.0);
        const double v = mu[static_cast<std::size_t>(b)] * jitter;
        bands[static_cast<std::size_t>(b)](i, j) =
            static_cast<std::uint16_t>(std::clamp(std::llround(v), 1ll, 65535ll));
    }
}

Polygon star_polygon(double center_row, double center_col, double radius, Rng& rng,
                     const GeoTransform& transform) {
    const int vertex_count = 10 + static_cast<int>(rng.below(8));
    const double amp = rng.uniform(0.10, 0.35);
    const int lobes = 3 + static_cast<int>(rng.below(4));
    const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

    Ring ring;
    ring.reserve(static_cast<std::size_t>(vertex_count));
    for (int k = 0; k < vertex_count; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / vertex_count;
        const double r = radius * (1.0 + amp * std::sin(lobes * theta + phase));
        const double row = center_row + r * std::sin(theta);
        const double col = center_col + r * std::cos(theta);
        auto [x, y] = transform.pixel_to_world(row, col);
        ring.emplace_back(x, y);
    }
    Polygon poly;
    poly.exterior = std::move(ring);
    return poly;
}

Polygon rectangle_polygon(const PixelBox& box, const GeoTransform& transform) {
    // Pixel-corner rectangle covering the box's pixels inclusively.
    const double r0 = static_cast<double>(box.row0);
    const double r1 = static_cast<double>(box.row1 + 1);
    const double c0 = static_cast<double>(box.col0);
    const double c1 = static_cast<double>(box.col1 + 1);
    Ring ring;
    for (const auto& [r, c] : {std::pair{r0, c0}, {r0, c1}, {r1, c1}, {r1, c0}}) {
        auto [x, y] = transform.pixel_to_world(r, c);
        ring.emplace_back(x, y);
    }
    Polygon poly;
    poly.exterior = std::move(ring);
    return poly;
}

template <class Signature>
void paint_region(const Band<std::uint8_t>& region, const Signature& mu, double shared_amp,
                  double band_amp, Rng& rng, std::vector<Band<std::uint16_t>>& bands) {
    for (Index i = 0; i < region.rows(); ++i)
        for (Index j = 0; j < region.cols(); ++j)
            if (region(i, j)) draw_pixel(mu, shared_amp, band_amp, rng, bands, i, j);
}

} // namespace

std::array<double, 7> forest_signature() {
    return {400.0, 550.0, 450.0, 300.0, 3000.0, 1500.0, 700.0};
}

std::array<double, 7> cleared_signature() {
    return {900.0, 1100.0, 1300.0, 1800.0, 2600.0, 2900.0, 2200.0};
}

std::array<double, 7> magenta_signature() {
    return {2000.0, 1800.0, 2200.0, 400.0, 2400.0, 900.0, 800.0};
}

SynthScene gen_scene(const SynthConfig& config) {
    if (config.height < 8 || config.width < 8)
        throw ConfigError("synthetic scene must be at least 8x8");
    if (!(config.magenta_frac >= 0.0 && config.magenta_frac <= 1.0))
        throw ConfigError("magenta fraction must lie in [0, 1]");
    if (config.blob_count < 0 || config.old_blob_count < 0)
        throw ConfigError("blob counts must be non-negative");
    if (!(config.blob_radius_min > 0.0 && config.blob_radius_min <= config.blob_radius_max))
        throw ConfigError("blob radius range must satisfy 0 < min <= max");

    const Rng root(config.seed);
    SynthScene scene;
    scene.img1.transform = config.transform;
    scene.img1.band_names = {"B1", "B2", "B3", "B4", "B5", "B6", "B7"};
    scene.img1.bands.assign(kBands, Band<std::uint16_t>(config.height, config.width));

    // Forest background.
    {
        Rng rng = root.fork(kBaseTag);
        const auto mu = forest_signature();
        for (Index i = 0; i < config.height; ++i)
            for (Index j = 0; j < config.width; ++j)
                draw_pixel(mu, 0.02, 0.04, rng, scene.img1.bands, i, j);
    }

    // Blob shapes. Old blobs were cleared before year1 and appear in both
    // images; their labels fall outside the (year1, year2] window.
    Rng shape_rng = root.fork(kShapesTag);
    const double margin = config.blob_radius_max * 1.4 + 2.0;
    auto random_blob = [&]() {
        const double radius = shape_rng.uniform(config.blob_radius_min, config.blob_radius_max);
        const double row = shape_rng.uniform(margin, static_cast<double>(config.height) - margin);
        const double col = shape_rng.uniform(margin, static_cast<double>(config.width) - margin);
        return star_polygon(row, col, radius, shape_rng, config.transform);
    };

    std::vector<Polygon> old_blobs;
    std::vector<Polygon> new_cleared;
    std::vector<Polygon> new_magenta;
    for (int k = 0; k < config.old_blob_count; ++k) old_blobs.push_back(random_blob());
    const int magenta_count = static_cast<int>(std::llround(config.magenta_frac * config.blob_count));
    for (int k = 0; k < config.blob_count; ++k) {
        if (k < magenta_count)
            new_magenta.push_back(random_blob());
        else
            new_cleared.push_back(random_blob());
    }

    auto rasterize_shapes = [&](const std::vector<Polygon>& shapes) {
        Band<std::uint8_t> region = Band<std::uint8_t>::Zero(config.height, config.width);
        for (const auto& shape : shapes) fill_polygon(shape, config.transform, region);
        return region;
    };

    // Reference rectangles, painted last so their pixels stay pure.
    if (magenta_count > 0) {
        const PixelBox magenta_ref{config.width / 8, config.height / 8,
                                   config.width / 8 + 25, config.height / 8 + 20};
        const PixelBox texture_ref{config.width * 5 / 8, config.height / 8,
                                   config.width * 5 / 8 + 47, config.height / 8 + 24};
        scene.magenta_reference = magenta_ref;
        scene.texture_reference = texture_ref;
        new_magenta.push_back(rectangle_polygon(magenta_ref, config.transform));
        new_cleared.push_back(rectangle_polygon(texture_ref, config.transform));
    }

    {
        Rng rng = root.fork(kPaintOldTag);
        paint_region(rasterize_shapes(old_blobs), cleared_signature(), 0.02, 0.05, rng,
                     scene.img1.bands);
    }

    scene.img2 = scene.img1;
    {
        Rng rng = root.fork(kPaintNewTag);
        paint_region(rasterize_shapes(new_cleared), cleared_signature(), 0.02, 0.05, rng,
                     scene.img2.bands);
    }
    {
        Rng rng = root.fork(kPaintMagentaTag);
        paint_region(rasterize_shapes(new_magenta), magenta_signature(), 0.05, 0.01, rng,
                     scene.img2.bands);
    }

    // Nodata corner triangles, mimicking the dark margins of rotated scenes.
    if (config.corner_cut > 0) {
        for (Index i = 0; i < config.height; ++i)
            for (Index j = 0; j < config.width; ++j) {
                const bool top_left = i + j < config.corner_cut;
                const bool bottom_right =
                    (config.height - 1 - i) + (config.width - 1 - j) < config.corner_cut;
                if (!top_left && !bottom_right) continue;
                for (auto& band : scene.img1.bands) band(i, j) = 0;
                for (auto& band : scene.img2.bands) band(i, j) = 0;
            }
    }

    // Reframe the second image when a grid shift is requested: same world
    // content, different pixel indexing, nodata on the exposed edges.
    if (config.t2_pixel_shift != 0) {
        const Index s = config.t2_pixel_shift;
        RasterStack<std::uint16_t> shifted;
        shifted.transform = config.transform.shifted(static_cast<double>(s), static_cast<double>(s));
        shifted.band_names = scene.img2.band_names;
        for (const auto& band : scene.img2.bands) {
            Band<std::uint16_t> out = Band<std::uint16_t>::Zero(config.height, config.width);
            for (Index i = 0; i < config.height; ++i)
                for (Index j = 0; j < config.width; ++j) {
                    const Index si = i + s;
                    const Index sj = j + s;
                    if (si >= 0 && si < config.height && sj >= 0 && sj < config.width)
                        out(i, j) = band(si, sj);
                }
            shifted.bands.push_back(std::move(out));
        }
        scene.img2 = std::move(shifted);
    }

    const std::string new_label = "d" + std::to_string(config.year2);
    const std::string old_label = "d" + std::to_string(config.year1);
    for (auto& shape : old_blobs)
        scene.polygons.features.push_back(make_feature(std::move(shape), old_label, "synth"));
    for (auto& shape : new_cleared)
        scene.polygons.features.push_back(make_feature(std::move(shape), new_label, "synth"));
    for (auto& shape : new_magenta)
        scene.polygons.features.push_back(make_feature(std::move(shape), new_label, "synth"));
    return scene;
}

Band<float> gen_producer_map(const Band<std::uint8_t>& truth, const ProducerErrorModel& model,
                             Rng rng) {
    if (!(model.miss_rate >= 0.0 && model.miss_rate <= 1.0) ||
        !(model.false_alarm_rate >= 0.0 && model.false_alarm_rate <= 1.0))
        throw ConfigError("producer error rates must lie in [0, 1]");
    if (model.blur_radius < 0 || model.noise < 0.0)
        throw ConfigError("producer blur radius and noise must be non-negative");

    const Index height = truth.rows();
    const Index width = truth.cols();

    Band<float> signal(height, width);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            if (truth(i, j))
                signal(i, j) = rng.uniform() < 1.0 - model.miss_rate ? 1.0f : 0.0f;
            else
                signal(i, j) = rng.uniform() < model.false_alarm_rate ? 1.0f : 0.0f;
        }

    if (model.blur_radius > 0) {
        const Index r = model.blur_radius;
        // Separable box mean with edge-clamped windows.
        Band<float> tmp(height, width);
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j) {
                const Index lo = std::max<Index>(0, j - r);
                const Index hi = std::min<Index>(width - 1, j + r);
                float sum = 0.0f;
                for (Index k = lo; k <= hi; ++k) sum += signal(i, k);
                tmp(i, j) = sum / static_cast<float>(hi - lo + 1);
            }
        for (Index j = 0; j < width; ++j)
            for (Index i = 0; i < height; ++i) {
                const Index lo = std::max<Index>(0, i - r);
                const Index hi = std::min<Index>(height - 1, i + r);
                float sum = 0.0f;
                for (Index k = lo; k <= hi; ++k) sum += tmp(k, j);
                signal(i, j) = sum / static_cast<float>(hi - lo + 1);
            }
    }

    if (model.noise > 0.0) {
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j) {
                const double v = signal(i, j) + model.noise * (rng.uniform() - 0.5);
                signal(i, j) = static_cast<float>(std::clamp(v, 0.0, 1.0));
            }
    }
    return signal;
}

} // namespace chdet
