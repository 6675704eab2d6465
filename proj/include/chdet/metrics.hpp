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
#include <optional>
#include <string>
#include <vector>

#include "chdet/raster.hpp"

namespace chdet {

/// Pixel-level confusion counts. Addition is the monoid used to pool counts
/// across patches before computing dataset-level (micro) metrics.
struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }

    ConfusionCounts& operator+=(const ConfusionCounts& other) {
        tp += other.tp;
        fp += other.fp;
        tn += other.tn;
        fn += other.fn;
        return *this;
    }
    friend ConfusionCounts operator+(ConfusionCounts a, const ConfusionCounts& b) { return a += b; }
    bool operator==(const ConfusionCounts&) const = default;
};

/// Per-pixel comparison of prediction against truth; shapes must agree.
ConfusionCounts accumulate(const Band<std::uint8_t>& pred, const Band<std::uint8_t>& truth);

/// A metric value or the reason it is undefined — a zero denominator never
/// silently becomes 0.
struct MetricValue {
    std::optional<double> value;
    std::string why_undefined;

    bool defined() const { return value.has_value(); }
};

MetricValue accuracy(const ConfusionCounts& c);
MetricValue precision(const ConfusionCounts& c);
MetricValue recall(const ConfusionCounts& c);
MetricValue f1_score(const ConfusionCounts& c);
MetricValue iou(const ConfusionCounts& c);

/// Cohen's kappa from the general definition (P_o - P_e) / (1 - P_e) with
/// P_e from the marginal products; undefined when P_e = 1.
MetricValue kappa(const ConfusionCounts& c);

struct MetricsReport {
    ConfusionCounts counts;
    MetricValue accuracy;
    MetricValue precision;
    MetricValue recall;
    MetricValue f1;
    MetricValue iou;
    MetricValue kappa;
};

MetricsReport compute_metrics(const ConfusionCounts& c);

/// One row of the report table; threshold is blank when not applicable.
struct MetricsRow {
    std::string name;
    std::optional<double> threshold;
    MetricsReport report;
};

/// Aligned text table (Threshold, Accuracy, IoU, Precision, Recall,
/// F1-Score, Kappa), metric columns as percentages with 2 decimals.
std::string format_metrics_table(const std::vector<MetricsRow>& rows);

/// Same content as JSON (metrics as fractions, not percentages).
std::string metrics_to_json(const std::vector<MetricsRow>& rows);

} // namespace chdet
