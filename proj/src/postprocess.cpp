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

#include "chdet/postprocess.hpp"

#include <numeric>

namespace chdet {

Band<std::uint8_t> binarize(const Band<float>& probs, double threshold) {
    Band<std::uint8_t> out(probs.rows(), probs.cols());
    for (Index i = 0; i < probs.rows(); ++i)
        for (Index j = 0; j < probs.cols(); ++j)
            out(i, j) = static_cast<double>(probs(i, j)) > threshold ? 1 : 0;
    return out;
}

namespace {

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]]; // path halving
            a = parent_[a];
        }
        return a;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[std::max(a, b)] = std::min(a, b);
    }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

ComponentLabeling label_components(const Band<std::uint8_t>& mask) {
    const Index height = mask.rows();
    const Index width = mask.cols();
    ComponentLabeling out;
    out.labels = Band<std::int32_t>::Zero(height, width);

    // First pass: provisional labels, merging with the left and top
    // neighbors (the full 4-neighborhood seen so far in row-major order).
    Band<std::int32_t> provisional = Band<std::int32_t>::Constant(height, width, -1);
    std::size_t next = 0;
    UnionFind uf(static_cast<std::size_t>(height * width));
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            if (!mask(i, j)) continue;
            const bool left = j > 0 && mask(i, j - 1);
            const bool top = i > 0 && mask(i - 1, j);
            if (left && top) {
                provisional(i, j) = provisional(i, j - 1);
                uf.unite(static_cast<std::size_t>(provisional(i, j - 1)),
                         static_cast<std::size_t>(provisional(i - 1, j)));
            } else if (left) {
                provisional(i, j) = provisional(i, j - 1);
            } else if (top) {
                provisional(i, j) = provisional(i - 1, j);
            } else {
                provisional(i, j) = static_cast<std::int32_t>(next++);
            }
        }

    // Second pass: contiguous final ids in first-encounter order.
    std::vector<std::int32_t> final_id(next, 0);
    std::int32_t assigned = 0;
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            if (!mask(i, j)) continue;
            const auto root = uf.find(static_cast<std::size_t>(provisional(i, j)));
            if (final_id[root] == 0) {
                final_id[root] = ++assigned;
                out.sizes.push_back(0);
            }
            const std::int32_t id = final_id[root];
            out.labels(i, j) = id;
            ++out.sizes[static_cast<std::size_t>(id - 1)];
        }
    return out;
}

Band<std::uint8_t> remove_small(const Band<std::uint8_t>& mask, std::int64_t min_keep) {
    const ComponentLabeling labeling = label_components(mask);
    Band<std::uint8_t> out = mask;
    for (Index i = 0; i < mask.rows(); ++i)
        for (Index j = 0; j < mask.cols(); ++j) {
            const std::int32_t id = labeling.labels(i, j);
            if (id > 0 && labeling.sizes[static_cast<std::size_t>(id - 1)] < min_keep)
                out(i, j) = 0;
        }
    return out;
}

} // namespace chdet
