#pragma once

#include "aaetag/label.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace aaetag::metrics {

/// Positive class = feature present.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const ConfusionCounts &, const ConfusionCounts &) = default;
};

/// Binary classification report in the layout P+, P-, R+, R-, F1w.
struct ClassificationReport {
    double precision_pos = 0.0;
    double precision_neg = 0.0;
    double recall_pos = 0.0;
    double recall_neg = 0.0;
    double f1_pos = 0.0;
    double f1_neg = 0.0;
    /// Class-size weighted F1: (n+ F1+ + n- F1-) / (n+ + n-).
    double f1_weighted = 0.0;
    std::size_t support_pos = 0;
    std::size_t support_neg = 0;
    ConfusionCounts counts;
    /// Set when some precision/recall/F1 cell had a zero denominator and was defined as 0.
    bool zero_division = false;
};

[[nodiscard]] ConfusionCounts confusion(std::span<const Label> preds, std::span<const Label> golds);
[[nodiscard]] ClassificationReport report_from_counts(const ConfusionCounts &counts);

/// Throws InputError on a length mismatch or empty input.
[[nodiscard]] ClassificationReport score(std::span<const Label> preds, std::span<const Label> golds);

/// Unweighted mean of every rate; supports and counts are summed.
[[nodiscard]] ClassificationReport average_reports(std::span<const ClassificationReport> reports);

[[nodiscard]] std::string render_text(const ClassificationReport &report, const std::string &title = {});
[[nodiscard]] nlohmann::json to_json(const ClassificationReport &report);

}  // namespace aaetag::metrics
