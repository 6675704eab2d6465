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
#include <map>
#include <string>
#include <vector>

#include "chdet/fcn.hpp"
#include "chdet/raster.hpp"

namespace chdet {

/// Aligned probability maps from N base producers over one sample, with each
/// producer's validation-selected binarization threshold.
struct ProbabilityMapSet {
    std::vector<Band<float>> maps;
    std::vector<double> thresholds;

    Index producer_count() const { return static_cast<Index>(maps.size()); }
    void validate() const;
};

/// Majority vote over per-producer binarizations (strict > threshold);
/// a pixel is positive iff more than N/2 producers say so, so ties with an
/// even producer count resolve to the negative class.
Band<std::uint8_t> simple_vote(const ProbabilityMapSet& set);

/// Mean of the probabilities binarized against the mean of the individual
/// thresholds (strict >): pixels whose mean probability equals the mean
/// threshold stay negative.
Band<std::uint8_t> weighted_vote(const ProbabilityMapSet& set);

/// Trains the BasicFCN combiner on stacked producer maps; the sample input
/// channel count is the producer count N.
TrainResult fcn_ensemble_train(std::span<const TrainSample> samples, const TrainConfig& config,
                               const FocalConfig& focal = {});

/// Runs a trained combiner on one probability map set and binarizes at the
/// combiner's selected threshold.
Band<std::uint8_t> fcn_ensemble_predict(const FcnWeights& weights, double threshold,
                                        const ProbabilityMapSet& set);

/// On-disk description of an ensemble dataset: for every producer its
/// threshold and a per-sample probability map, plus per-sample truth masks
/// and a train/test split. Paths are relative to the manifest file.
struct ManifestProducer {
    std::string name;
    double threshold = 0.5;
    std::map<std::string, std::string> maps; ///< sample id -> path
};

struct EnsembleManifest {
    std::vector<ManifestProducer> producers;
    std::map<std::string, std::string> truth; ///< sample id -> path
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
};

void write_manifest(const EnsembleManifest& manifest, const std::filesystem::path& path);
EnsembleManifest read_manifest(const std::filesystem::path& path);

/// Loads the probability maps of every producer for one sample id.
/// Missing entries fail with the sample id and the file path expected.
ProbabilityMapSet load_map_set(const EnsembleManifest& manifest,
                               const std::filesystem::path& manifest_dir,
                               const std::string& sample_id);

Band<std::uint8_t> load_truth(const EnsembleManifest& manifest,
                              const std::filesystem::path& manifest_dir,
                              const std::string& sample_id);

} // namespace chdet
