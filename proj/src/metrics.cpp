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

#include "chdet/metrics.hpp"

#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chdet {

ConfusionCounts accumulate(const Band<std::uint8_t>& pred, const Band<std::uint8_t>& truth) {
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw ShapeError("prediction and truth masks differ in shape");
    ConfusionCounts c;
    for (Index i = 0; i < pred.rows(); ++i)
        for (Index j = 0; j < pred.cols(); ++j) {
            const bool p = pred(i, j) != 0;
            const bool t = truth(i, j) != 0;
            if (p && t) ++c.tp;
            else if (p && !t) ++c.fp;
            else if (!p && t) ++c.fn;
            else ++c.tn;
        }
    return c;
}

namespace {

MetricValue ratio(std::int64_t num, std::int64_t den, const std::string& why) {
    if (den == 0) return {std::nullopt, why};
    return {static_cast<double>(num) / static_cast<double>(den), {}};
}

} // namespace

MetricValue accuracy(const ConfusionCounts& c) {
    return ratio(c.tp + c.tn, c.total(), "no pixels were compared");
}

MetricValue precision(const ConfusionCounts& c) {
    return ratio(c.tp, c.tp + c.fp, "no positive predictions (TP + FP = 0)");
}

MetricValue recall(const ConfusionCounts& c) {
    return ratio(c.tp, c.tp + c.fn, "no positive ground truth (TP + FN = 0)");
}

MetricValue f1_score(const ConfusionCounts& c) {
    return ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn,
                 "no positives in prediction or truth (2TP + FP + FN = 0)");
}

MetricValue iou(const ConfusionCounts& c) {
    return ratio(c.tp, c.tp + c.fp + c.fn, "no positives in prediction or truth (TP + FP + FN = 0)");
}

MetricValue kappa(const ConfusionCounts& c) {
    const double total = static_cast<double>(c.total());
    if (c.total() == 0) return {std::nullopt, "no pixels were compared"};
    const double tp = static_cast<double>(c.tp);
    const double fp = static_cast<double>(c.fp);
    const double tn = static_cast<double>(c.tn);
    const double fn = static_cast<double>(c.fn);
    const double p_o = (tp + tn) / total;
    const double p_e = ((tp + fp) * (tp + fn) + (fn + tn) * (fp + tn)) / (total * total);
    if (p_e == 1.0)
        return {std::nullopt, "chance agreement is 1 (both raters constant), kappa undefined"};
    return {(p_o - p_e) / (1.0 - p_e), {}};
}

MetricsReport compute_metrics(const ConfusionCounts& c) {
    return {c, accuracy(c), precision(c), recall(c), f1_score(c), iou(c), kappa(c)};
}

namespace {

std::string cell(const MetricValue& m) {
    if (!m.defined()) return "n/a";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << (*m.value * 100.0);
    return out.str();
}

std::string cell(const std::optional<double>& threshold) {
    if (!threshold) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << *threshold;
    return out.str();
}

} // namespace

std::string format_metrics_table(const std::vector<MetricsRow>& rows) {
    const std::vector<std::string> headers = {"Model",  "Threshold", "Accuracy", "IoU",
                                              "Precision", "Recall", "F1-Score", "Kappa"};
    std::vector<std::vector<std::string>> grid;
    grid.push_back(headers);
    for (const auto& row : rows) {
        const auto& r = row.report;
        grid.push_back({row.name, cell(row.threshold), cell(r.accuracy), cell(r.iou),
                        cell(r.precision), cell(r.recall), cell(r.f1), cell(r.kappa)});
    }

    std::vector<std::size_t> widths(headers.size(), 0);
    for (const auto& line : grid)
        for (std::size_t k = 0; k < line.size(); ++k)
            widths[k] = std::max(widths[k], line[k].size());

    std::ostringstream out;
    for (const auto& line : grid) {
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (k == 0)
                out << std::left << std::setw(static_cast<int>(widths[k])) << line[k];
            else
                out << "  " << std::right << std::setw(static_cast<int>(widths[k])) << line[k];
        }
        out << "\n";
    }
    return out.str();
}

std::string metrics_to_json(const std::vector<MetricsRow>& rows) {
    nlohmann::json doc = nlohmann::json::array();
    auto emit = [](const MetricValue& m) -> nlohmann::json {
        if (m.defined()) return *m.value;
        return {{"undefined", m.why_undefined}};
    };
    for (const auto& row : rows) {
        nlohmann::json entry;
        entry["model"] = row.name;
        if (row.threshold) entry["threshold"] = *row.threshold;
        entry["counts"] = {{"tp", row.report.counts.tp},
                           {"fp", row.report.counts.fp},
                           {"tn", row.report.counts.tn},
                           {"fn", row.report.counts.fn}};
        entry["accuracy"] = emit(row.report.accuracy);
        entry["precision"] = emit(row.report.precision);
        entry["recall"] = emit(row.report.recall);
        entry["f1"] = emit(row.report.f1);
        entry["iou"] = emit(row.report.iou);
        entry["kappa"] = emit(row.report.kappa);
        doc.push_back(entry);
    }
    return doc.dump(2) + "\n";
}

} // namespace chdet
