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
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "chdet/rng.hpp"
#include "chdet/tensor.hpp"

namespace chdet {

/// 3x3 convolution, stride 1, padding 1, with bias. The kernel is stored as
/// an (out_channels) x (in_channels * 9) matrix whose column index is
/// c * 9 + ky * 3 + kx, matching the im2col layout used by forward/backward.
struct ConvLayer {
    Eigen::MatrixXf kernel;
    Eigen::VectorXf bias;
    Index in_channels = 0;
    Index out_channels = 0;
};

struct BatchNorm {
    Eigen::ArrayXf gamma;
    Eigen::ArrayXf beta;
    Eigen::ArrayXf running_mean;
    Eigen::ArrayXf running_var;
    float momentum = 0.1f;
    float eps = 1e-5f;
};

/// BasicFCN: conv(N_in -> 12, 3x3) -> batch norm -> ReLU -> conv(12 -> 1,
/// 3x3) -> sigmoid. Height and width are preserved throughout.
struct FcnWeights {
    static constexpr Index kHidden = 12;

    ConvLayer conv1;
    BatchNorm bn;
    ConvLayer conv2;

    Index in_channels() const { return conv1.in_channels; }

    /// Trainable parameters as flat views, in a fixed order shared with
    /// FcnGradients: conv1.kernel, conv1.bias, bn.gamma, bn.beta,
    /// conv2.kernel, conv2.bias.
    std::vector<Eigen::Map<Eigen::ArrayXf>> parameter_views();
};

/// Fan-in-scaled uniform kernels (bound 1/sqrt(fan_in)), zero biases,
/// identity batch norm.
FcnWeights init_fcn_weights(Index in_channels, Rng& rng);

/// Inference forward pass using batch-norm running statistics.
/// Output is N x 1 x H x W with values strictly in (0, 1).
Tensor4 fcn_forward(const FcnWeights& weights, const Tensor4& input);

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
    Tensor4 input;
    Tensor4 conv1_out; ///< pre-batch-norm
    Tensor4 relu_out;  ///< input to conv2
    Tensor4 logits;    ///< pre-sigmoid
    Eigen::ArrayXf batch_mean;
    Eigen::ArrayXf batch_var; ///< population (biased), as used to normalize
};

/// Training-mode forward: batch statistics normalize, running statistics
/// are updated in place. Returns sigmoid probabilities.
Tensor4 fcn_forward_train(FcnWeights& weights, const Tensor4& input, ForwardCache& cache);

struct FocalConfig {
    double alpha = 0.25;
    double gamma = 2.0;
};

/// Mean focal loss over all pixels: -alpha_t (1 - p_t)^gamma log(p_t),
/// evaluated in a fused, numerically stable form from the logits.
/// `labels` must be an N x 1 x H x W tensor of 0/1 values.
double focal_loss_from_logits(const Tensor4& logits, const Tensor4& labels,
                              const FocalConfig& config);

/// d(mean focal loss)/d(logit), same shape as logits.
Tensor4 focal_loss_grad(const Tensor4& logits, const Tensor4& labels, const FocalConfig& config);

struct FcnGradients {
    Eigen::MatrixXf conv1_kernel;
    Eigen::VectorXf conv1_bias;
    Eigen::ArrayXf bn_gamma;
    Eigen::ArrayXf bn_beta;
    Eigen::MatrixXf conv2_kernel;
    Eigen::VectorXf conv2_bias;

    std::vector<Eigen::Map<Eigen::ArrayXf>> parameter_views();
};

/// Exact gradients of the mean focal loss w.r.t. every parameter.
/// Convenience wrapper running forward (training mode), loss and backprop;
/// the loss value lands in *loss_out when given.
FcnGradients fcn_backward(FcnWeights& weights, const Tensor4& input, const Tensor4& labels,
                          const FocalConfig& config, double* loss_out = nullptr);

/// Backprop through cached activations for a precomputed dL/dlogits.
FcnGradients fcn_backward_from_cache(const FcnWeights& weights, const ForwardCache& cache,
                                     const Tensor4& dlogits);

struct AdamParams {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-4; ///< classic L2: added to the gradient
};

struct OptimizerState {
    Eigen::ArrayXf m;
    Eigen::ArrayXf v;
    std::int64_t step = 0;
    AdamParams hyper;

    static OptimizerState for_weights(FcnWeights& weights, const AdamParams& hyper = {});
};

/// One bias-corrected Adam update over the parameter views. The L2 term
/// weight_decay * param is added to each gradient before the moment update.
void adam_step(OptimizerState& state, std::span<Eigen::Map<Eigen::ArrayXf>> params,
               std::span<Eigen::Map<Eigen::ArrayXf>> grads);

/// One training example for the generic engine: C aligned input planes plus
/// the target mask. `id` is the stable identity used for the validation
/// split, independent of the sample's position in the sequence.
struct TrainSample {
    std::vector<Band<float>> inputs;
    Band<std::uint8_t> mask;
    std::uint64_t id = 0;
};

std::vector<double> default_threshold_grid(); ///< 0.05 to 0.95, step 0.05

struct TrainConfig {
    int epochs = 400;
    Index batch_size = 32;
    double val_fraction = 0.2;
    std::vector<double> threshold_grid = default_threshold_grid();
    std::uint64_t seed = 0;
    AdamParams adam;
    bool verbose = false; ///< per-epoch progress on stderr
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    std::optional<double> val_f1; ///< at threshold 0.5; empty when undefined
};

struct TrainResult {
    FcnWeights weights; ///< snapshot at the best epoch
    double threshold = 0.5;
    int best_epoch = 0;
    bool selected_by_loss = false; ///< validation had no positives
    std::vector<EpochLog> log;
    std::vector<std::uint64_t> validation_ids;
};

/// Trains a BasicFCN: deterministic validation split by id hash (size
/// round(val_fraction * n), clamped to [1, n-1]), epoch selection by
/// validation F1 at threshold 0.5 (falling back to validation loss when the
/// validation masks have no positive pixels), and a final threshold sweep
/// on the best-epoch weights. Fully deterministic given config.seed.
TrainResult train(std::span<const TrainSample> samples, const TrainConfig& config,
                  const FocalConfig& focal = {});

/// Smallest grid value maximizing pooled F1 of binarize(probs, t) against
/// the masks (strict > binarization).
double select_threshold(std::span<const Band<float>> probs,
                        std::span<const Band<std::uint8_t>> masks, std::span<const double> grid);

/// Runs the trained net on C aligned planes (a single sample) and returns
/// the probability map.
Band<float> fcn_predict(const FcnWeights& weights, std::span<const Band<float>> planes);

/// Weight file ("FCNW"): magic, u32 version, u64 JSON header length, JSON
/// header with shapes and the selected threshold, then raw f32 LE blobs.
void write_fcn_weights(const FcnWeights& weights, double threshold,
                       const std::filesystem::path& path);

struct LoadedFcn {
    FcnWeights weights;
    double threshold = 0.5;
};

LoadedFcn read_fcn_weights(const std::filesystem::path& path);

} // namespace chdet
