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
//
// Independent reference implementations used by the unit and acceptance
// suites. These deliberately avoid the library's algorithms: rasterization
// is checked against a per-pixel ray cast, components against a BFS flood
// fill, and the network against a direct double-precision forward pass.

#pragma once

#include <cmath>
#include <deque>
#include <vector>

#include "chdet/fcn.hpp"
#include "chdet/polygon.hpp"
#include "chdet/raster.hpp"
#include "chdet/tensor.hpp"

namespace chdet::testing {

// ---------------------------------------------------------------------------
// Point-in-polygon (even-odd, ray to the right). The edge intersection uses
// the same expression as the scanline fill so that boundary crossings agree
// bit for bit; the traversal (per-pixel ray cast vs. sorted scanline walk)
// is entirely independent.

using PixelRings = std::vector<std::vector<std::pair<double, double>>>; // (row, col)

inline PixelRings to_pixel_rings(const Polygon& shape, const GeoTransform& grid) {
    PixelRings rings;
    auto convert = [&](const Ring& ring) {
        std::vector<std::pair<double, double>> out;
        for (const auto& v : ring) out.push_back(grid.world_to_pixel(v.x(), v.y()));
        return out;
    };
    rings.push_back(convert(shape.exterior));
    for (const auto& h : shape.holes) rings.push_back(convert(h));
    return rings;
}

inline bool point_in_rings(const PixelRings& rings, double row, double col) {
    bool inside = false;
    for (const auto& ring : rings) {
        const std::size_t n = ring.size();
        for (std::size_t a = 0; a < n; ++a) {
            const auto& p = ring[a];
            const auto& q = ring[(a + 1) % n];
            if ((p.first > row) != (q.first > row)) {
                const double x =
                    p.second + (row - p.first) * (q.second - p.second) / (q.first - p.first);
                if (x > col) inside = !inside;
            }
        }
    }
    return inside;
}

/// Rasterizes a polygon layer by testing every pixel center independently.
inline Band<std::uint8_t> rasterize_oracle(const PolygonLayer& layer, const GeoTransform& grid,
                                           Index height, Index width, int year1, int year2) {
    Band<std::uint8_t> mask = Band<std::uint8_t>::Zero(height, width);
    for (const auto& feature : layer.features) {
        if (!(feature.year > year1 && feature.year <= year2)) continue;
        const PixelRings rings = to_pixel_rings(feature.shape, grid);
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j)
                if (point_in_rings(rings, static_cast<double>(i) + 0.5,
                                   static_cast<double>(j) + 0.5))
                    mask(i, j) = 1;
    }
    return mask;
}

// ---------------------------------------------------------------------------
// BFS flood-fill labeling under 4-connectivity, ids in row-major
// first-encounter order (the same normalization the union-find uses, so the
// label images can be compared directly).

inline Band<std::int32_t> flood_fill_labels(const Band<std::uint8_t>& mask) {
    const Index height = mask.rows();
    const Index width = mask.cols();
    Band<std::int32_t> labels = Band<std::int32_t>::Zero(height, width);
    std::int32_t next = 0;
    std::deque<std::pair<Index, Index>> queue;
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            if (!mask(i, j) || labels(i, j)) continue;
            const std::int32_t id = ++next;
            labels(i, j) = id;
            queue.push_back({i, j});
            while (!queue.empty()) {
                auto [y, x] = queue.front();
                queue.pop_front();
                const std::pair<Index, Index> neighbors[4] = {
                    {y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}};
                for (const auto& [ny, nx] : neighbors) {
                    if (ny < 0 || ny >= height || nx < 0 || nx >= width) continue;
                    if (!mask(ny, nx) || labels(ny, nx)) continue;
                    labels(ny, nx) = id;
                    queue.push_back({ny, nx});
                }
            }
        }
    return labels;
}

// ---------------------------------------------------------------------------
// Double-precision BasicFCN reference: direct six-loop convolutions, no
// im2col, no GEMM. Parameters live in one flat vector laid out exactly like
// FcnWeights::parameter_views() (conv kernels in Eigen's column-major
// storage), which makes central finite differences over every parameter a
// simple loop.

struct NaiveFcn {
    Index in_channels = 0;
    static constexpr Index kHidden = FcnWeights::kHidden;
    std::vector<double> params; ///< parameter_views order and storage layout
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double eps = 1e-5;

    static NaiveFcn from_weights(FcnWeights& weights) {
        NaiveFcn n;
        n.in_channels = weights.in_channels();
        for (const auto& view : weights.parameter_views())
            for (Index i = 0; i < view.size(); ++i) n.params.push_back(view[i]);
        for (Index c = 0; c < kHidden; ++c) {
            n.running_mean.push_back(weights.bn.running_mean[c]);
            n.running_var.push_back(weights.bn.running_var[c]);
        }
        n.eps = weights.bn.eps;
        return n;
    }

    // Offsets of the six parameter blocks in `params`.
    Index conv1_kernel_at(Index o, Index k) const { return k * kHidden + o; } // col-major
    Index conv1_bias_off() const { return kHidden * in_channels * 9; }
    Index bn_gamma_off() const { return conv1_bias_off() + kHidden; }
    Index bn_beta_off() const { return bn_gamma_off() + kHidden; }
    Index conv2_kernel_off() const { return bn_beta_off() + kHidden; }
    Index conv2_kernel_at(Index k) const { return conv2_kernel_off() + k; } // 1 row: col-major = flat
    Index conv2_bias_off() const { return conv2_kernel_off() + kHidden * 9; }

    /// Logits of the whole batch, flattened (n, y, x) row-major.
    std::vector<double> forward_logits(const Tensor4& x, bool training) const {
        const Index batch = x.batch();
        const Index height = x.height();
        const Index width = x.width();
        const Index plane = height * width;

        // conv1
        std::vector<double> hidden(static_cast<std::size_t>(batch * kHidden * plane), 0.0);
        auto hidden_at = [&](Index n, Index c, Index y, Index xx) -> double& {
            return hidden[static_cast<std::size_t>(((n * kHidden + c) * height + y) * width + xx)];
        };
        for (Index n = 0; n < batch; ++n)
            for (Index o = 0; o < kHidden; ++o)
                for (Index y = 0; y < height; ++y)
                    for (Index xx = 0; xx < width; ++xx) {
                        double sum = params[static_cast<std::size_t>(conv1_bias_off() + o)];
                        for (Index c = 0; c < in_channels; ++c)
                            for (Index ky = 0; ky < 3; ++ky)
                                for (Index kx = 0; kx < 3; ++kx) {
                                    const Index iy = y + ky - 1;
                                    const Index ix = xx + kx - 1;
                                    if (iy < 0 || iy >= height || ix < 0 || ix >= width) continue;
                                    const Index k = c * 9 + ky * 3 + kx;
                                    sum += params[static_cast<std::size_t>(conv1_kernel_at(o, k))] *
                                           static_cast<double>(x(n, c, iy, ix));
                                }
                        hidden_at(n, o, y, xx) = sum;
                    }

        // batch norm + ReLU
        const double m = static_cast<double>(batch * plane);
        for (Index c = 0; c < kHidden; ++c) {
            double mean;
            double var;
            if (training) {
                double sum = 0.0;
                for (Index n = 0; n < batch; ++n)
                    for (Index y = 0; y < height; ++y)
                        for (Index xx = 0; xx < width; ++xx) sum += hidden_at(n, c, y, xx);
                mean = sum / m;
                double sq = 0.0;
                for (Index n = 0; n < batch; ++n)
                    for (Index y = 0; y < height; ++y)
                        for (Index xx = 0; xx < width; ++xx) {
                            const double d = hidden_at(n, c, y, xx) - mean;
                            sq += d * d;
                        }
                var = sq / m;
            } else {
                mean = running_mean[static_cast<std::size_t>(c)];
                var = running_var[static_cast<std::size_t>(c)];
            }
            const double gamma = params[static_cast<std::size_t>(bn_gamma_off() + c)];
            const double beta = params[static_cast<std::size_t>(bn_beta_off() + c)];
            const double inv_std = 1.0 / std::sqrt(var + eps);
            for (Index n = 0; n < batch; ++n)
                for (Index y = 0; y < height; ++y)
                    for (Index xx = 0; xx < width; ++xx) {
                        double v = gamma * (hidden_at(n, c, y, xx) - mean) * inv_std + beta;
                        hidden_at(n, c, y, xx) = v > 0.0 ? v : 0.0;
                    }
        }

        // conv2
        std::vector<double> logits(static_cast<std::size_t>(batch * plane), 0.0);
        for (Index n = 0; n < batch; ++n)
            for (Index y = 0; y < height; ++y)
                for (Index xx = 0; xx < width; ++xx) {
                    double sum = params[static_cast<std::size_t>(conv2_bias_off())];
                    for (Index c = 0; c < kHidden; ++c)
                        for (Index ky = 0; ky < 3; ++ky)
                            for (Index kx = 0; kx < 3; ++kx) {
                                const Index iy = y + ky - 1;
                                const Index ix = xx + kx - 1;
                                if (iy < 0 || iy >= height || ix < 0 || ix >= width) continue;
                                const Index k = c * 9 + ky * 3 + kx;
                                sum += params[static_cast<std::size_t>(conv2_kernel_at(k))] *
                                       hidden_at(n, c, iy, ix);
                            }
                    logits[static_cast<std::size_t>((n * height + y) * width + xx)] = sum;
                }
        return logits;
    }

    double focal_loss(const Tensor4& x, const Tensor4& labels, const FocalConfig& config,
                      bool training = true) const {
        const std::vector<double> logits = forward_logits(x, training);
        auto softplus = [](double t) {
            return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
        };
        double sum = 0.0;
        const auto& y = labels.flat();
        for (std::size_t i = 0; i < logits.size(); ++i) {
            const double z = logits[i];
            const double p = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z))
                                      : std::exp(z) / (1.0 + std::exp(z));
            if (y[static_cast<Index>(i)] > 0.5f)
                sum += -config.alpha * std::pow(1.0 - p, config.gamma) * (-softplus(-z));
            else
                sum += -(1.0 - config.alpha) * std::pow(p, config.gamma) * (-softplus(z));
        }
        return sum / static_cast<double>(logits.size());
    }
};

} // namespace chdet::testing
