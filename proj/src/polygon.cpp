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

#include "chdet/polygon.hpp"

#include <cctype>

namespace chdet {

Ring normalize_ring(Ring ring, const std::string& context) {
    if (ring.size() >= 2 && ring.front() == ring.back()) ring.pop_back();
    std::vector<Eigen::Vector2d> distinct;
    for (const auto& v : ring) {
        bool seen = false;
        for (const auto& d : distinct)
            if (d == v) { seen = true; break; }
        if (!seen) distinct.push_back(v);
    }
    if (distinct.size() < 3)
        throw IngestError(context + ": ring has fewer than 3 distinct vertices");
    return ring;
}

int parse_year_label(const std::string& label, const std::string& context) {
    const bool ok = label.size() == 5 && label[0] == 'd' &&
                    std::isdigit(static_cast<unsigned char>(label[1])) &&
                    std::isdigit(static_cast<unsigned char>(label[2])) &&
                    std::isdigit(static_cast<unsigned char>(label[3])) &&
                    std::isdigit(static_cast<unsigned char>(label[4]));
    if (!ok)
        throw IngestError(context + ": class label '" + label + "' does not match dYYYY");
    return std::stoi(label.substr(1));
}

PolygonFeature make_feature(Polygon shape, std::string label, const std::string& context) {
    PolygonFeature f;
    f.year = parse_year_label(label, context);
    f.label = std::move(label);
    f.shape.exterior = normalize_ring(std::move(shape.exterior), context);
    for (auto& h : shape.holes)
        f.shape.holes.push_back(normalize_ring(std::move(h), context));
    return f;
}

} // namespace chdet
