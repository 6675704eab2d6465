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

#include <string>
#include <vector>

#include <Eigen/Core>

#include "chdet/errors.hpp"

namespace chdet {

/// Closed ring of world-coordinate vertices. Stored open (the closing
/// vertex equal to the first one is dropped on normalization).
using Ring = std::vector<Eigen::Vector2d>;

struct Polygon {
    Ring exterior;
    std::vector<Ring> holes;
};

/// One deforestation polygon with its dYYYY class label.
struct PolygonFeature {
    Polygon shape;
    std::string label;
    int year = 0; ///< parsed from the label
};

struct PolygonLayer {
    std::vector<PolygonFeature> features;
};

/// Drops a duplicated closing vertex and checks the ring has at least
/// three distinct vertices. Throws IngestError naming `context` otherwise.
Ring normalize_ring(Ring ring, const std::string& context);

/// Parses a "dYYYY" class label into its year.
/// Throws IngestError naming `context` when the label does not match.
int parse_year_label(const std::string& label, const std::string& context);

/// Validates rings and label of a raw feature and fills in the year.
PolygonFeature make_feature(Polygon shape, std::string label, const std::string& context);

} // namespace chdet
