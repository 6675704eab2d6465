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

#include "chdet/ensemble.hpp"

#include <nlohmann/json.hpp>

#include "chdet/detail/binio.hpp"
#include "chdet/raster_io.hpp"

namespace chdet {

using nlohmann::json;

void ProbabilityMapSet::validate() const {
    if (maps.empty()) throw ShapeError("probability map set needs at least one producer");
    if (maps.size() != thresholds.size())
        throw ShapeError("probability map set has " + std::to_string(maps.size()) + " maps but " +
                         std::to_string(thresholds.size()) + " thresholds");
    for (const auto& m : maps)
        if (m.rows() != maps[0].rows() || m.cols() != maps[0].cols())
            throw ShapeError("producer maps disagree on shape");
    for (const double t : thresholds)
        if (!(t > 0.0 && t < 1.0))
            throw ConfigError("producer thresholds must lie strictly between 0 and 1");
}

Band<std::uint8_t> simple_vote(const ProbabilityMapSet& set) {
    set.validate();
    const Index height = set.maps[0].rows();
    const Index width = set.maps[0].cols();
    const auto n = static_cast<std::int64_t>(set.maps.size());
    Band<std::uint8_t> out(height, width);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            std::int64_t votes = 0;
            for (std::size_t k = 0; k < set.maps.size(); ++k)
                if (static_cast<double>(set.maps[k](i, j)) > set.thresholds[k]) ++votes;
            out(i, j) = 2 * votes > n ? 1 : 0;
        }
    return out;
}

Band<std::uint8_t> weighted_vote(const ProbabilityMapSet& set) {
    set.validate();
    const Index height = set.maps[0].rows();
    const Index width = set.maps[0].cols();
    const auto n = static_cast<double>(set.maps.size());
    double threshold_sum = 0.0;
    for (const double t : set.thresholds) threshold_sum += t;
    const double mean_threshold = threshold_sum / n;

    Band<std::uint8_t> out(height, width);
    for (Index i = 0; i < height; ++i)
        for (Index j = 0; j < width; ++j) {
            double sum = 0.0;
            for (const auto& m : set.maps) sum += static_cast<double>(m(i, j));
            out(i, j) = sum / n > mean_threshold ? 1 : 0;
        }
    return out;
}

TrainResult fcn_ensemble_train(std::span<const TrainSample> samples, const TrainConfig& config,
                               const FocalConfig& focal) {
    if (samples.empty()) throw ConfigError("ensemble training needs samples");
    const std::size_t n_producers = samples[0].inputs.size();
    for (const auto& s : samples)
        if (s.inputs.size() != n_producers)
            throw ShapeError("samples disagree on producer count");
    return train(samples, config, focal);
}

Band<std::uint8_t> fcn_ensemble_predict(const FcnWeights& weights, double threshold,
                                        const ProbabilityMapSet& set) {
    set.validate();
    if (set.producer_count() != weights.in_channels())
        throw ShapeError("combiner was trained on " + std::to_string(weights.in_channels()) +
                         " producers, got " + std::to_string(set.producer_count()));
    const Band<float> probs = fcn_predict(weights, set.maps);
    Band<std::uint8_t> out(probs.rows(), probs.cols());
    for (Index i = 0; i < probs.rows(); ++i)
        for (Index j = 0; j < probs.cols(); ++j)
            out(i, j) = static_cast<double>(probs(i, j)) > threshold ? 1 : 0;
    return out;
}

void write_manifest(const EnsembleManifest& manifest, const std::filesystem::path& path) {
    json doc;
    doc["producers"] = json::array();
    for (const auto& p : manifest.producers) {
        json maps = json::object();
        for (const auto& [id, rel] : p.maps) maps[id] = rel;
        doc["producers"].push_back(
            {{"name", p.name}, {"threshold", p.threshold}, {"maps", maps}});
    }
    json truth = json::object();
    for (const auto& [id, rel] : manifest.truth) truth[id] = rel;
    doc["truth"] = truth;
    doc["splits"] = {{"train", manifest.train_ids}, {"test", manifest.test_ids}};
    detail::write_file(path, doc.dump(2) + "\n");
}

EnsembleManifest read_manifest(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(detail::read_file(path));
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": invalid JSON (" + e.what() + ")");
    }

    EnsembleManifest manifest;
    try {
        for (const auto& p : doc.at("producers")) {
            ManifestProducer producer;
            producer.name = p.at("name").get<std::string>();
            producer.threshold = p.at("threshold").get<double>();
            for (const auto& [id, rel] : p.at("maps").items())
                producer.maps[id] = rel.get<std::string>();
            manifest.producers.push_back(std::move(producer));
        }
        for (const auto& [id, rel] : doc.at("truth").items())
            manifest.truth[id] = rel.get<std::string>();
        if (doc.contains("splits")) {
            manifest.train_ids = doc["splits"].value("train", std::vector<std::string>{});
            manifest.test_ids = doc["splits"].value("test", std::vector<std::string>{});
        }
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": bad manifest field (" + e.what() + ")");
    }
    return manifest;
}

ProbabilityMapSet load_map_set(const EnsembleManifest& manifest,
                               const std::filesystem::path& manifest_dir,
                               const std::string& sample_id) {
    if (manifest.producers.empty())
        throw ConfigError("manifest lists no producers");
    ProbabilityMapSet set;
    for (const auto& p : manifest.producers) {
        const auto it = p.maps.find(sample_id);
        if (it == p.maps.end())
            throw ConfigError("manifest producer '" + p.name + "' has no map for sample '" +
                              sample_id + "'");
        const auto map_path = manifest_dir / it->second;
        const RasterStack<float> raster = read_raster_f32(map_path);
        if (raster.band_count() != 1)
            throw FormatError(map_path.string() + ": probability maps must have exactly 1 band");
        set.maps.push_back(raster.bands.front());
        set.thresholds.push_back(p.threshold);
    }
    set.validate();
    return set;
}

Band<std::uint8_t> load_truth(const EnsembleManifest& manifest,
                              const std::filesystem::path& manifest_dir,
                              const std::string& sample_id) {
    const auto it = manifest.truth.find(sample_id);
    if (it == manifest.truth.end())
        throw ConfigError("manifest has no truth mask for sample '" + sample_id + "'");
    return read_mask(manifest_dir / it->second).data;
}

} // namespace chdet
