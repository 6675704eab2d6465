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

#include "chdet/fcn.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "chdet/detail/binio.hpp"

namespace chdet {

namespace {

using RowMajorMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr std::uint64_t kInitTag = 0x696e6974; // "init"
constexpr std::uint64_t kShuffleTag = 0x73687566; // "shuf"
constexpr std::uint64_t kSplitTag = 0x73706c69; // "spli"

// Largest float below 1; forward probabilities are clamped into
// [denorm_min, kOneMinus] so the output stays strictly inside (0, 1).
const float kOneMinus = std::nextafter(1.0f, 0.0f);

float sigmoidf(float z) {
    if (z >= 0.0f) return 1.0f / (1.0f + std::exp(-z));
    const float e = std::exp(z);
    return e / (1.0f + e);
}

double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid_d(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// Column c*9 + ky*3 + kx of row (y*W + x) holds input (c, y+ky-1, x+kx-1),
// zero outside the image (padding 1).
void im2col_3x3(const Tensor4& t, Index n, Eigen::MatrixXf& col) {
    const Index channels = t.channels();
    const Index height = t.height();
    const Index width = t.width();
    col.resize(channels * 9, height * width);
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x) {
            const Index out_idx = y * width + x;
            float* dst = col.data() + out_idx * col.rows(); // column-major
            for (Index c = 0; c < channels; ++c) {
                const float* plane = t.plane_ptr(n, c);
                for (Index ky = 0; ky < 3; ++ky) {
                    const Index iy = y + ky - 1;
                    if (iy < 0 || iy >= height) {
                        dst[0] = dst[1] = dst[2] = 0.0f;
                        dst += 3;
                        continue;
                    }
                    const float* row = plane + iy * width;
                    for (Index kx = 0; kx < 3; ++kx) {
                        const Index ix = x + kx - 1;
                        *dst++ = (ix < 0 || ix >= width) ? 0.0f : row[ix];
                    }
                }
            }
        }
}

void col2im_3x3(const Eigen::MatrixXf& col, Tensor4& t, Index n) {
    const Index channels = t.channels();
    const Index height = t.height();
    const Index width = t.width();
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x) {
            const Index out_idx = y * width + x;
            const float* src = col.data() + out_idx * col.rows();
            for (Index c = 0; c < channels; ++c) {
                float* plane = t.plane_ptr(n, c);
                for (Index ky = 0; ky < 3; ++ky) {
                    const Index iy = y + ky - 1;
                    if (iy < 0 || iy >= height) {
                        src += 3;
                        continue;
                    }
                    float* row = plane + iy * width;
                    for (Index kx = 0; kx < 3; ++kx) {
                        const Index ix = x + kx - 1;
                        const float v = *src++;
                        if (ix >= 0 && ix < width) row[ix] += v;
                    }
                }
            }
        }
}

Tensor4 conv_forward(const ConvLayer& layer, const Tensor4& input) {
    if (input.channels() != layer.in_channels)
        throw ShapeError("convolution expected " + std::to_string(layer.in_channels) +
                         " input channels, got " + std::to_string(input.channels()));
    Tensor4 out(input.batch(), layer.out_channels, input.height(), input.width());
    Eigen::MatrixXf col;
    for (Index n = 0; n < input.batch(); ++n) {
        im2col_3x3(input, n, col);
        Eigen::Map<RowMajorMat> out_map(out.plane_ptr(n, 0), layer.out_channels,
                                        input.plane_size());
        out_map.noalias() = layer.kernel * col;
        for (Index o = 0; o < layer.out_channels; ++o)
            out_map.row(o).array() += layer.bias(o);
    }
    return out;
}

void validate_focal(const FocalConfig& config) {
    if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
        throw ConfigError("focal alpha must lie in [0, 1]");
    if (!(config.gamma >= 0.0)) throw ConfigError("focal gamma must be non-negative");
}

void validate_pair(const Tensor4& logits, const Tensor4& labels) {
    if (logits.batch() != labels.batch() || logits.channels() != 1 || labels.channels() != 1 ||
        logits.height() != labels.height() || logits.width() != labels.width())
        throw ShapeError("logits and labels must both be N x 1 x H x W with equal dims");
}

Tensor4 sigmoid_tensor(const Tensor4& logits) {
    Tensor4 probs = logits;
    auto& flat = probs.flat();
    for (Index i = 0; i < flat.size(); ++i) {
        float p = sigmoidf(flat[i]);
        p = std::min(kOneMinus, std::max(std::numeric_limits<float>::denorm_min(), p));
        flat[i] = p;
    }
    return probs;
}

} // namespace

std::vector<Eigen::Map<Eigen::ArrayXf>> FcnWeights::parameter_views() {
    std::vector<Eigen::Map<Eigen::ArrayXf>> views;
    views.emplace_back(conv1.kernel.data(), conv1.kernel.size());
    views.emplace_back(conv1.bias.data(), conv1.bias.size());
    views.emplace_back(bn.gamma.data(), bn.gamma.size());
    views.emplace_back(bn.beta.data(), bn.beta.size());
    views.emplace_back(conv2.kernel.data(), conv2.kernel.size());
    views.emplace_back(conv2.bias.data(), conv2.bias.size());
    return views;
}

std::vector<Eigen::Map<Eigen::ArrayXf>> FcnGradients::parameter_views() {
    std::vector<Eigen::Map<Eigen::ArrayXf>> views;
    views.emplace_back(conv1_kernel.data(), conv1_kernel.size());
    views.emplace_back(conv1_bias.data(), conv1_bias.size());
    views.emplace_back(bn_gamma.data(), bn_gamma.size());
    views.emplace_back(bn_beta.data(), bn_beta.size());
    views.emplace_back(conv2_kernel.data(), conv2_kernel.size());
    views.emplace_back(conv2_bias.data(), conv2_bias.size());
    return views;
}

FcnWeights init_fcn_weights(Index in_channels, Rng& rng) {
    if (in_channels < 1) throw ConfigError("the network needs at least 1 input channel");
    FcnWeights w;
    auto init_conv = [&rng](ConvLayer& layer, Index in, Index out) {
        layer.in_channels = in;
        layer.out_channels = out;
        layer.kernel.resize(out, in * 9);
        layer.bias = Eigen::VectorXf::Zero(out);
        const double bound = 1.0 / std::sqrt(static_cast<double>(in * 9));
        for (Index o = 0; o < out; ++o)
            for (Index k = 0; k < in * 9; ++k)
                layer.kernel(o, k) = static_cast<float>(rng.uniform(-bound, bound));
    };
    init_conv(w.conv1, in_channels, FcnWeights::kHidden);
    init_conv(w.conv2, FcnWeights::kHidden, 1);
    w.bn.gamma = Eigen::ArrayXf::Ones(FcnWeights::kHidden);
    w.bn.beta = Eigen::ArrayXf::Zero(FcnWeights::kHidden);
    w.bn.running_mean = Eigen::ArrayXf::Zero(FcnWeights::kHidden);
    w.bn.running_var = Eigen::ArrayXf::Ones(FcnWeights::kHidden);
    return w;
}

namespace {

Tensor4 infer_logits(const FcnWeights& weights, const Tensor4& input) {
    Tensor4 hidden = conv_forward(weights.conv1, input);
    const auto& bn = weights.bn;
    for (Index c = 0; c < FcnWeights::kHidden; ++c) {
        const float scale = bn.gamma[c] / std::sqrt(bn.running_var[c] + bn.eps);
        const float shift = bn.beta[c] - scale * bn.running_mean[c];
        for (Index n = 0; n < hidden.batch(); ++n) {
            auto plane = hidden.plane(n, c);
            plane = (plane * scale + shift).max(0.0f);
        }
    }
    return conv_forward(weights.conv2, hidden);
}

} // namespace

Tensor4 fcn_forward(const FcnWeights& weights, const Tensor4& input) {
    return sigmoid_tensor(infer_logits(weights, input));
}

Tensor4 fcn_forward_train(FcnWeights& weights, const Tensor4& input, ForwardCache& cache) {
    cache.input = input;
    cache.conv1_out = conv_forward(weights.conv1, input);

    auto& bn = weights.bn;
    const Index hidden_ch = FcnWeights::kHidden;
    const double m = static_cast<double>(input.batch() * input.plane_size());
    cache.batch_mean.resize(hidden_ch);
    cache.batch_var.resize(hidden_ch);
    cache.relu_out = Tensor4(input.batch(), hidden_ch, input.height(), input.width());

    for (Index c = 0; c < hidden_ch; ++c) {
        double sum = 0.0;
        for (Index n = 0; n < input.batch(); ++n)
            sum += cache.conv1_out.plane(n, c).cast<double>().sum();
        const double mean = sum / m;
        double sq = 0.0;
        for (Index n = 0; n < input.batch(); ++n)
            sq += (cache.conv1_out.plane(n, c).cast<double>() - mean).square().sum();
        const double var = sq / m; // population variance
        cache.batch_mean[c] = static_cast<float>(mean);
        cache.batch_var[c] = static_cast<float>(var);

        bn.running_mean[c] = (1.0f - bn.momentum) * bn.running_mean[c] +
                             bn.momentum * cache.batch_mean[c];
        bn.running_var[c] = (1.0f - bn.momentum) * bn.running_var[c] +
                            bn.momentum * cache.batch_var[c];

        const float scale = bn.gamma[c] / std::sqrt(cache.batch_var[c] + bn.eps);
        const float shift = bn.beta[c] - scale * cache.batch_mean[c];
        for (Index n = 0; n < input.batch(); ++n)
            cache.relu_out.plane(n, c) = (cache.conv1_out.plane(n, c) * scale + shift).max(0.0f);
    }

    cache.logits = conv_forward(weights.conv2, cache.relu_out);
    return sigmoid_tensor(cache.logits);
}

double focal_loss_from_logits(const Tensor4& logits, const Tensor4& labels,
                              const FocalConfig& config) {
    validate_focal(config);
    validate_pair(logits, labels);
    double sum = 0.0;
    const auto& z = logits.flat();
    const auto& y = labels.flat();
    for (Index i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        const double p = sigmoid_d(zi);
        if (y[i] > 0.5f) {
            const double log_p = -softplus(-zi);
            sum += -config.alpha * std::pow(1.0 - p, config.gamma) * log_p;
        } else {
            const double log_1mp = -softplus(zi);
            sum += -(1.0 - config.alpha) * std::pow(p, config.gamma) * log_1mp;
        }
    }
    return sum / static_cast<double>(z.size());
}

Tensor4 focal_loss_grad(const Tensor4& logits, const Tensor4& labels, const FocalConfig& config) {
    validate_focal(config);
    validate_pair(logits, labels);
    Tensor4 grad(logits.batch(), 1, logits.height(), logits.width());
    const auto& z = logits.flat();
    const auto& y = labels.flat();
    auto& g = grad.flat();
    const double inv_count = 1.0 / static_cast<double>(z.size());
    for (Index i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        const double p = sigmoid_d(zi);
        double gi;
        if (y[i] > 0.5f) {
            const double log_p = -softplus(-zi);
            gi = config.alpha * std::pow(1.0 - p, config.gamma) *
                 (config.gamma * p * log_p - (1.0 - p));
        } else {
            const double log_1mp = -softplus(zi);
            gi = (1.0 - config.alpha) * std::pow(p, config.gamma) *
                 (p - config.gamma * (1.0 - p) * log_1mp);
        }
        g[i] = static_cast<float>(gi * inv_count);
    }
    return grad;
}

FcnGradients fcn_backward_from_cache(const FcnWeights& weights, const ForwardCache& cache,
                                     const Tensor4& dlogits) {
    const Index batch = cache.input.batch();
    const Index hidden_ch = FcnWeights::kHidden;
    const Index plane = cache.input.plane_size();

    FcnGradients grads;
    grads.conv1_kernel = Eigen::MatrixXf::Zero(weights.conv1.kernel.rows(),
                                               weights.conv1.kernel.cols());
    grads.conv1_bias = Eigen::VectorXf::Zero(weights.conv1.bias.size());
    grads.bn_gamma = Eigen::ArrayXf::Zero(hidden_ch);
    grads.bn_beta = Eigen::ArrayXf::Zero(hidden_ch);
    grads.conv2_kernel = Eigen::MatrixXf::Zero(weights.conv2.kernel.rows(),
                                               weights.conv2.kernel.cols());
    grads.conv2_bias = Eigen::VectorXf::Zero(weights.conv2.bias.size());

    // conv2: gradients and the upstream signal into the ReLU output.
    Tensor4 drelu(batch, hidden_ch, cache.input.height(), cache.input.width());
    {
        Eigen::MatrixXf col;
        Eigen::MatrixXf dcol;
        for (Index n = 0; n < batch; ++n) {
            im2col_3x3(cache.relu_out, n, col);
            Eigen::Map<const RowMajorMat> dout(dlogits.plane_ptr(n, 0), 1, plane);
            grads.conv2_kernel.noalias() += dout * col.transpose();
            grads.conv2_bias(0) += dout.sum();
            dcol.noalias() = weights.conv2.kernel.transpose() * dout;
            col2im_3x3(dcol, drelu, n);
        }
    }

    // ReLU gate, in place: units that were clamped pass no gradient.
    for (Index n = 0; n < batch; ++n)
        for (Index c = 0; c < hidden_ch; ++c) {
            auto d = drelu.plane(n, c);
            d *= (cache.relu_out.plane(n, c) > 0.0f).cast<float>();
        }

    // Batch-norm backward with batch statistics.
    const double m = static_cast<double>(batch * plane);
    Tensor4 dconv1(batch, hidden_ch, cache.input.height(), cache.input.width());
    for (Index c = 0; c < hidden_ch; ++c) {
        const double inv_std = 1.0 / std::sqrt(static_cast<double>(cache.batch_var[c]) +
                                               static_cast<double>(weights.bn.eps));
        const float inv_std_f = static_cast<float>(inv_std);
        const float mean_f = cache.batch_mean[c];

        double sum_dy = 0.0;
        double sum_dy_xhat = 0.0;
        for (Index n = 0; n < batch; ++n) {
            const auto dy = drelu.plane(n, c);
            const auto xhat = ((cache.conv1_out.plane(n, c) - mean_f) * inv_std_f).eval();
            sum_dy += dy.cast<double>().sum();
            sum_dy_xhat += (dy * xhat).cast<double>().sum();
        }
        grads.bn_beta[c] = static_cast<float>(sum_dy);
        grads.bn_gamma[c] = static_cast<float>(sum_dy_xhat);

        const float gamma_inv_std = weights.bn.gamma[c] * inv_std_f;
        const float mean_dy = static_cast<float>(sum_dy / m);
        const float mean_dy_xhat = static_cast<float>(sum_dy_xhat / m);
        for (Index n = 0; n < batch; ++n) {
            const auto dy = drelu.plane(n, c);
            const auto xhat = ((cache.conv1_out.plane(n, c) - mean_f) * inv_std_f).eval();
            dconv1.plane(n, c) = gamma_inv_std * (dy - mean_dy - xhat * mean_dy_xhat);
        }
    }

    // conv1 gradients.
    {
        Eigen::MatrixXf col;
        for (Index n = 0; n < batch; ++n) {
            im2col_3x3(cache.input, n, col);
            Eigen::Map<const RowMajorMat> dout(dconv1.plane_ptr(n, 0), hidden_ch, plane);
            grads.conv1_kernel.noalias() += dout * col.transpose();
            for (Index c = 0; c < hidden_ch; ++c) grads.conv1_bias(c) += dout.row(c).sum();
        }
    }
    return grads;
}

FcnGradients fcn_backward(FcnWeights& weights, const Tensor4& input, const Tensor4& labels,
                          const FocalConfig& config, double* loss_out) {
    ForwardCache cache;
    fcn_forward_train(weights, input, cache);
    if (loss_out) *loss_out = focal_loss_from_logits(cache.logits, labels, config);
    const Tensor4 dlogits = focal_loss_grad(cache.logits, labels, config);
    return fcn_backward_from_cache(weights, cache, dlogits);
}

OptimizerState OptimizerState::for_weights(FcnWeights& weights, const AdamParams& hyper) {
    Index total = 0;
    for (const auto& view : weights.parameter_views()) total += view.size();
    OptimizerState state;
    state.m = Eigen::ArrayXf::Zero(total);
    state.v = Eigen::ArrayXf::Zero(total);
    state.hyper = hyper;
    return state;
}

void adam_step(OptimizerState& state, std::span<Eigen::Map<Eigen::ArrayXf>> params,
               std::span<Eigen::Map<Eigen::ArrayXf>> grads) {
    if (params.size() != grads.size())
        throw ShapeError("optimizer parameter and gradient lists differ in length");
    Index total = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].size() != grads[k].size())
            throw ShapeError("parameter and gradient shapes disagree");
        total += params[k].size();
    }
    if (total != state.m.size())
        throw ShapeError("optimizer state does not match the parameter count");

    const auto& h = state.hyper;
    ++state.step;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

    Index offset = 0;
    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        const Index size = p.size();
        auto m = state.m.segment(offset, size);
        auto v = state.v.segment(offset, size);
        const Eigen::ArrayXf g = grads[k] + static_cast<float>(h.weight_decay) * p;
        m = static_cast<float>(h.beta1) * m + static_cast<float>(1.0 - h.beta1) * g;
        v = static_cast<float>(h.beta2) * v + static_cast<float>(1.0 - h.beta2) * g.square();
        const Eigen::ArrayXf m_hat = m / static_cast<float>(bc1);
        const Eigen::ArrayXf v_hat = v / static_cast<float>(bc2);
        p -= static_cast<float>(h.lr) * m_hat / (v_hat.sqrt() + static_cast<float>(h.eps));
        offset += size;
    }
}

std::vector<double> default_threshold_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    return grid;
}

double select_threshold(std::span<const Band<float>> probs,
                        std::span<const Band<std::uint8_t>> masks, std::span<const double> grid) {
    if (grid.empty()) throw ConfigError("threshold grid is empty");
    if (probs.size() != masks.size())
        throw ShapeError("probability and mask counts differ");
    std::vector<double> sorted(grid.begin(), grid.end());
    std::sort(sorted.begin(), sorted.end());

    double best_tau = sorted.front();
    double best_score = -1.0;
    for (const double tau : sorted) {
        std::int64_t tp = 0, fp = 0, fn = 0;
        for (std::size_t s = 0; s < probs.size(); ++s) {
            const auto& p = probs[s];
            const auto& t = masks[s];
            if (p.rows() != t.rows() || p.cols() != t.cols())
                throw ShapeError("probability map and mask shapes disagree");
            for (Index i = 0; i < p.rows(); ++i)
                for (Index j = 0; j < p.cols(); ++j) {
                    const bool pred = p(i, j) > tau;
                    const bool truth = t(i, j) != 0;
                    if (pred && truth) ++tp;
                    else if (pred && !truth) ++fp;
                    else if (!pred && truth) ++fn;
                }
        }
        const std::int64_t denom = 2 * tp + fp + fn;
        const double score = denom == 0 ? -1.0 : 2.0 * static_cast<double>(tp) /
                                                     static_cast<double>(denom);
        if (score > best_score) {
            best_score = score;
            best_tau = tau;
        }
    }
    return best_tau;
}

Band<float> fcn_predict(const FcnWeights& weights, std::span<const Band<float>> planes) {
    if (planes.empty()) throw ShapeError("prediction needs at least one input plane");
    const Index height = planes[0].rows();
    const Index width = planes[0].cols();
    Tensor4 x(1, static_cast<Index>(planes.size()), height, width);
    for (std::size_t c = 0; c < planes.size(); ++c) {
        if (planes[c].rows() != height || planes[c].cols() != width)
            throw ShapeError("input planes disagree on spatial shape");
        x.plane(0, static_cast<Index>(c)) = planes[c];
    }
    const Tensor4 probs = fcn_forward(weights, x);
    return probs.plane(0, 0);
}

namespace {

struct ValScore {
    double loss = 0.0;
    std::optional<double> f1;
};

ValScore validate_epoch(const FcnWeights& weights, std::span<const TrainSample> samples,
                        std::span<const std::size_t> val_idx, const FocalConfig& focal) {
    ValScore score;
    std::int64_t tp = 0, fp = 0, fn = 0;
    double loss_sum = 0.0;
    for (const std::size_t idx : val_idx) {
        const TrainSample& s = samples[idx];
        const Index height = s.mask.rows();
        const Index width = s.mask.cols();
        Tensor4 x(1, static_cast<Index>(s.inputs.size()), height, width);
        for (std::size_t c = 0; c < s.inputs.size(); ++c)
            x.plane(0, static_cast<Index>(c)) = s.inputs[c];

        const Tensor4 logits = infer_logits(weights, x);
        const Tensor4 probs = sigmoid_tensor(logits);

        Tensor4 labels(1, 1, height, width);
        labels.plane(0, 0) = s.mask.cast<float>();
        loss_sum += focal_loss_from_logits(logits, labels, focal);

        const auto plane = probs.plane(0, 0);
        for (Index i = 0; i < height; ++i)
            for (Index j = 0; j < width; ++j) {
                const bool pred = plane(i, j) > 0.5f;
                const bool truth = s.mask(i, j) != 0;
                if (pred && truth) ++tp;
                else if (pred && !truth) ++fp;
                else if (!pred && truth) ++fn;
            }
    }
    score.loss = loss_sum / static_cast<double>(val_idx.size());
    const std::int64_t denom = 2 * tp + fp + fn;
    if (denom > 0) score.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
    return score;
}

} // namespace

TrainResult train(std::span<const TrainSample> samples, const TrainConfig& config,
                  const FocalConfig& focal) {
    validate_focal(focal);
    if (samples.size() < 2) throw ConfigError("training needs at least 2 samples");
    if (config.epochs < 1) throw ConfigError("epochs must be at least 1");
    if (config.batch_size < 1) throw ConfigError("batch size must be at least 1");
    if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0))
        throw ConfigError("validation fraction must lie strictly between 0 and 1");

    const Index channels = static_cast<Index>(samples[0].inputs.size());
    const Index height = samples[0].mask.rows();
    const Index width = samples[0].mask.cols();
    if (channels < 1) throw ShapeError("samples have no input channels");
    for (const auto& s : samples) {
        if (static_cast<Index>(s.inputs.size()) != channels)
            throw ShapeError("samples disagree on input channel count");
        if (s.mask.rows() != height || s.mask.cols() != width)
            throw ShapeError("samples disagree on spatial shape");
        for (const auto& plane : s.inputs)
            if (plane.rows() != height || plane.cols() != width)
                throw ShapeError("sample plane shape does not match its mask");
    }

    // Validation split by id hash: which samples validate depends only on
    // (seed, id), never on the order the samples arrived in.
    const std::size_t n = samples.size();
    auto n_val = static_cast<std::size_t>(std::llround(config.val_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const std::uint64_t split_salt = Rng::mix(config.seed, kSplitTag);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ha = Rng::mix(split_salt, samples[a].id);
        const auto hb = Rng::mix(split_salt, samples[b].id);
        return ha != hb ? ha < hb : samples[a].id < samples[b].id;
    });
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(val_idx.begin(), val_idx.end());
    std::sort(train_idx.begin(), train_idx.end());

    std::int64_t val_positives = 0;
    for (const std::size_t idx : val_idx)
        val_positives += static_cast<std::int64_t>(samples[idx].mask.cast<std::int64_t>().sum());
    const bool select_by_loss = val_positives == 0;
    if (select_by_loss)
        std::cerr << "chdet: warning: validation masks have no positive pixels; "
                     "selecting the best epoch by validation loss instead of F1\n";

    Rng root(config.seed);
    Rng init_rng = root.fork(kInitTag);
    FcnWeights weights = init_fcn_weights(channels, init_rng);
    OptimizerState opt = OptimizerState::for_weights(weights, config.adam);

    TrainResult result;
    for (const std::size_t idx : val_idx) result.validation_ids.push_back(samples[idx].id);

    double best_f1 = -1.0;
    double best_loss = std::numeric_limits<double>::infinity();
    FcnWeights best_weights = weights;
    int best_epoch = 0;

    std::vector<std::size_t> epoch_order = train_idx;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng shuffle_rng = root.fork(kShuffleTag).fork(static_cast<std::uint64_t>(epoch));
        epoch_order = train_idx;
        shuffle_rng.shuffle(epoch_order.begin(), epoch_order.end());

        double loss_sum = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < epoch_order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t stop =
                std::min(epoch_order.size(), start + static_cast<std::size_t>(config.batch_size));
            const auto batch_n = static_cast<Index>(stop - start);

            Tensor4 x(batch_n, channels, height, width);
            Tensor4 y(batch_n, 1, height, width);
            for (Index b = 0; b < batch_n; ++b) {
                const TrainSample& s = samples[epoch_order[start + static_cast<std::size_t>(b)]];
                for (Index c = 0; c < channels; ++c)
                    x.plane(b, c) = s.inputs[static_cast<std::size_t>(c)];
                y.plane(b, 0) = s.mask.cast<float>();
            }

            ForwardCache cache;
            fcn_forward_train(weights, x, cache);
            loss_sum += focal_loss_from_logits(cache.logits, y, focal) * static_cast<double>(batch_n);
            seen += static_cast<std::size_t>(batch_n);
            const Tensor4 dlogits = focal_loss_grad(cache.logits, y, focal);
            FcnGradients grads = fcn_backward_from_cache(weights, cache, dlogits);
            auto params = weights.parameter_views();
            auto gviews = grads.parameter_views();
            adam_step(opt, params, gviews);
        }

        const ValScore val = validate_epoch(weights, samples, val_idx, focal);
        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(seen);
        log.val_loss = val.loss;
        log.val_f1 = val.f1;
        result.log.push_back(log);
        if (config.verbose)
            std::cerr << "epoch " << epoch << " train_loss " << log.train_loss << " val_loss "
                      << log.val_loss << " val_f1 "
                      << (log.val_f1 ? std::to_string(*log.val_f1) : std::string("n/a")) << "\n";

        bool improved;
        if (select_by_loss) {
            improved = val.loss < best_loss;
        } else {
            improved = val.f1.value_or(0.0) > best_f1;
        }
        if (improved || best_epoch == 0) {
            best_f1 = val.f1.value_or(0.0);
            best_loss = val.loss;
            best_weights = weights;
            best_epoch = epoch;
        }
    }

    result.weights = best_weights;
    result.best_epoch = best_epoch;
    result.selected_by_loss = select_by_loss;

    // Final threshold sweep on the best-epoch weights over the validation set.
    std::vector<Band<float>> val_probs;
    std::vector<Band<std::uint8_t>> val_masks;
    val_probs.reserve(val_idx.size());
    val_masks.reserve(val_idx.size());
    for (const std::size_t idx : val_idx) {
        const TrainSample& s = samples[idx];
        val_probs.push_back(fcn_predict(best_weights, s.inputs));
        val_masks.push_back(s.mask);
    }
    result.threshold = select_threshold(val_probs, val_masks, config.threshold_grid);
    return result;
}

void write_fcn_weights(const FcnWeights& weights, double threshold,
                       const std::filesystem::path& path) {
    nlohmann::json header;
    header["version"] = 1;
    header["in_channels"] = weights.conv1.in_channels;
    header["hidden"] = FcnWeights::kHidden;
    header["bn_eps"] = weights.bn.eps;
    header["bn_momentum"] = weights.bn.momentum;
    header["threshold"] = threshold;
    header["tensors"] = nlohmann::json::array();

    std::string blob;
    auto emit_conv = [&](const ConvLayer& layer, const std::string& name) {
        header["tensors"].push_back(
            {{"name", name + ".kernel"},
             {"shape", {layer.out_channels, layer.in_channels, 3, 3}}});
        for (Index o = 0; o < layer.out_channels; ++o)
            for (Index k = 0; k < layer.in_channels * 9; ++k)
                detail::put_f32(blob, layer.kernel(o, k));
        header["tensors"].push_back({{"name", name + ".bias"}, {"shape", {layer.out_channels}}});
        for (Index o = 0; o < layer.out_channels; ++o) detail::put_f32(blob, layer.bias(o));
    };
    auto emit_array = [&](const Eigen::ArrayXf& a, const std::string& name) {
        header["tensors"].push_back({{"name", name}, {"shape", {a.size()}}});
        for (Index i = 0; i < a.size(); ++i) detail::put_f32(blob, a[i]);
    };

    emit_conv(weights.conv1, "conv1");
    emit_array(weights.bn.gamma, "bn.gamma");
    emit_array(weights.bn.beta, "bn.beta");
    emit_array(weights.bn.running_mean, "bn.running_mean");
    emit_array(weights.bn.running_var, "bn.running_var");
    emit_conv(weights.conv2, "conv2");

    const std::string header_str = header.dump();
    std::string out;
    out.reserve(16 + header_str.size() + blob.size());
    out += "FCNW";
    detail::put_u32(out, 1);
    detail::put_u64(out, header_str.size());
    out += header_str;
    out += blob;
    detail::write_file(path, out);
}

LoadedFcn read_fcn_weights(const std::filesystem::path& path) {
    const std::string data = detail::read_file(path);
    const std::string name = path.string();
    detail::Reader r(data, name);
    if (r.str(4) != "FCNW") throw FormatError(name + ": bad magic, not an FCNW file");
    const auto version = r.u32();
    if (version != 1) throw FormatError(name + ": unsupported version " + std::to_string(version));
    const auto header_len = r.u64();

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.str(static_cast<std::size_t>(header_len)));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ": bad weight header (" + e.what() + ")");
    }

    LoadedFcn loaded;
    try {
        const auto in_channels = header.at("in_channels").get<Index>();
        const auto hidden = header.at("hidden").get<Index>();
        if (hidden != FcnWeights::kHidden)
            throw FormatError(name + ": unsupported hidden width " + std::to_string(hidden));
        loaded.threshold = header.at("threshold").get<double>();

        FcnWeights& w = loaded.weights;
        auto read_conv = [&](ConvLayer& layer, Index in, Index out) {
            layer.in_channels = in;
            layer.out_channels = out;
            layer.kernel.resize(out, in * 9);
            layer.bias.resize(out);
            for (Index o = 0; o < out; ++o)
                for (Index k = 0; k < in * 9; ++k) layer.kernel(o, k) = r.f32();
            for (Index o = 0; o < out; ++o) layer.bias(o) = r.f32();
        };
        auto read_array = [&](Eigen::ArrayXf& a, Index size) {
            a.resize(size);
            for (Index i = 0; i < size; ++i) a[i] = r.f32();
        };
        read_conv(w.conv1, in_channels, FcnWeights::kHidden);
        read_array(w.bn.gamma, FcnWeights::kHidden);
        read_array(w.bn.beta, FcnWeights::kHidden);
        read_array(w.bn.running_mean, FcnWeights::kHidden);
        read_array(w.bn.running_var, FcnWeights::kHidden);
        read_conv(w.conv2, FcnWeights::kHidden, 1);
        w.bn.eps = header.at("bn_eps").get<float>();
        w.bn.momentum = header.at("bn_momentum").get<float>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(name + ": missing weight header field (" + e.what() + ")");
    }
    return loaded;
}

} // namespace chdet
