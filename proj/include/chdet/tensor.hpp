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

#include <Eigen/Core>

#include "chdet/errors.hpp"
#include "chdet/raster.hpp"

namespace chdet {

/// Dense N x C x H x W float tensor, contiguous in (n, c, y, x) order.
class Tensor4 {
public:
    Tensor4() = default;
    Tensor4(Index n, Index c, Index h, Index w)
        : n_(n), c_(c), h_(h), w_(w), data_(Eigen::ArrayXf::Zero(n * c * h * w)) {
        if (n < 1 || c < 1 || h < 1 || w < 1)
            throw ShapeError("tensor dimensions must all be at least 1");
    }

    Index batch() const { return n_; }
    Index channels() const { return c_; }
    Index height() const { return h_; }
    Index width() const { return w_; }
    Index plane_size() const { return h_ * w_; }
    Index size() const { return data_.size(); }

    float& operator()(Index n, Index c, Index y, Index x) {
        return data_[((n * c_ + c) * h_ + y) * w_ + x];
    }
    float operator()(Index n, Index c, Index y, Index x) const {
        return data_[((n * c_ + c) * h_ + y) * w_ + x];
    }

    float* plane_ptr(Index n, Index c) { return data_.data() + (n * c_ + c) * plane_size(); }
    const float* plane_ptr(Index n, Index c) const {
        return data_.data() + (n * c_ + c) * plane_size();
    }

    Eigen::Map<Band<float>> plane(Index n, Index c) {
        return Eigen::Map<Band<float>>(plane_ptr(n, c), h_, w_);
    }
    Eigen::Map<const Band<float>> plane(Index n, Index c) const {
        return Eigen::Map<const Band<float>>(plane_ptr(n, c), h_, w_);
    }

    Eigen::ArrayXf& flat() { return data_; }
    const Eigen::ArrayXf& flat() const { return data_; }

private:
    Index n_ = 0, c_ = 0, h_ = 0, w_ = 0;
    Eigen::ArrayXf data_;
};

} // namespace chdet
