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
#include <vector>

#include "chdet/raster.hpp"

namespace chdet {

/// Strict binarization: 1 iff probability > threshold.
Band<std::uint8_t> binarize(const Band<float>& probs, double threshold);

/// 4-connected component labels: 0 is background, foreground components get
/// contiguous ids 1..K in first-encounter (row-major) order.
struct ComponentLabeling {
    Band<std::int32_t> labels;
    std::vector<std::int64_t> sizes; ///< sizes[k-1] is the pixel count of component k

    Index component_count() const { return static_cast<Index>(sizes.size()); }
};

/// Two-pass union-find labeling under 4-connectivity (shared edges only,
/// no diagonals).
ComponentLabeling label_components(const Band<std::uint8_t>& mask);

/// Removes connected components smaller than `min_keep` pixels (the default
/// keeps components of 51+ pixels, dropping regions of up to 50).
Band<std::uint8_t> remove_small(const Band<std::uint8_t>& mask, std::int64_t min_keep = 51);

} // namespace chdet
