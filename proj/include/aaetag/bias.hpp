#pragma once

#include "aaetag/dataset.hpp"
#include "aaetag/glm.hpp"
#include "aaetag/label.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aaetag::bias {

/// One prediction in the order the sentence was sent to the model.
struct TraceEntry {
    std::string id;
    /// Empty when the model's answer could not be parsed.
    std::optional<Label> predicted;
    Label gold = Label::negative;
    std::size_t batch = 0;
    std::size_t position = 0;

    friend bool operator==(const TraceEntry &, const TraceEntry &) = default;
};

struct PredictionTrace {
    std::vector<TraceEntry> entries;

    [[nodiscard]] std::size_t size() const noexcept { return entries.size(); }
    /// Throws InputError unless positions strictly increase.
    void validate() const;
    /// Entries with a parsed prediction, order preserved.
    [[nodiscard]] PredictionTrace parsed_only() const;
};

/// JSON-lines: {"id", "predicted" (0/1/null), "gold", "batch", "position"} per line.
[[nodiscard]] std::string to_jsonl(const PredictionTrace &trace);
[[nodiscard]] PredictionTrace parse_trace(std::string_view jsonl);
[[nodiscard]] PredictionTrace load_trace(const std::filesystem::path &path);

struct RecencyRow {
    std::string id;
    std::size_t position = 0;
    Label predicted = Label::negative;
    Label gold = Label::negative;
    /// Share of the previous `window` predictions equal to this one.
    double proportion = 0.0;
};

struct RecencyOptions {
    std::size_t window = 5;
    /// Restart the window at every batch boundary instead of running across batches.
    bool reset_per_batch = false;
};

/// Proportion of the previous `window` predictions matching each prediction. Unparsed entries are
/// dropped first; positions with fewer than `window` predecessors are excluded.
[[nodiscard]] std::vector<RecencyRow> recency_feature(const PredictionTrace &trace, const RecencyOptions &options = {});

struct RecencyAnalysis {
    glm::FitResult fit;
    std::size_t rows = 0;
    std::size_t unparsed_dropped = 0;
    /// Pearson correlation of the recency covariate with the gold label (streak confound check).
    double recency_gold_correlation = 0.0;
};

/// prediction ~ intercept + recency + gold.
[[nodiscard]] RecencyAnalysis run_recency_regression(const PredictionTrace &trace, const RecencyOptions &options = {});

struct FormalityAnalysis {
    glm::FitResult fit;
    std::size_t rows = 0;
    std::size_t unparsed_dropped = 0;
};

/// prediction ~ intercept + formality flag + gold. Every parsed trace id needs a flag.
[[nodiscard]] FormalityAnalysis run_formality_regression(const PredictionTrace &trace,
                                                         const std::map<std::string, int> &formality_flags);

/// Flags from a dataset's `formality` column.
[[nodiscard]] std::map<std::string, int> formality_flags(const data::Dataset &dataset);

[[nodiscard]] std::string render_recency(const RecencyAnalysis &analysis, const std::string &title = {});
[[nodiscard]] std::string render_formality(const FormalityAnalysis &analysis, const std::string &title = {});
[[nodiscard]] nlohmann::json to_json(const RecencyAnalysis &analysis);
[[nodiscard]] nlohmann::json to_json(const FormalityAnalysis &analysis);

// ---------------------------------------------------------------------------------------------
// Ordering experiments: ten probes (five per gold label) in fixed label patterns.

enum class OrderingPattern { alternating, ones_then_zeros, zeros_then_ones };

[[nodiscard]] std::string_view to_string(OrderingPattern pattern) noexcept;
[[nodiscard]] OrderingPattern parse_pattern(std::string_view name);

struct OrderingPlan {
    OrderingPattern pattern = OrderingPattern::alternating;
    /// 10 or 30; a 30-item batch repeats the 10-probe pattern three times.
    std::size_t batch_size = 10;
    /// One shuffle seed per repetition.
    std::vector<std::uint64_t> shuffle_seeds;
};

struct OrderingRun {
    OrderingPattern pattern = OrderingPattern::alternating;
    std::size_t batch_size = 10;
    std::size_t repetition = 0;
    std::uint64_t seed = 0;
    /// The batch in submission order.
    std::vector<data::Record> records;

    [[nodiscard]] std::string name() const;
};

inline constexpr std::size_t probes_per_label = 5;

/// Four configurations ({alternating, ones_then_zeros} x {10, 30}) with six repetitions each.
[[nodiscard]] std::vector<OrderingPlan> default_ordering_plans(std::uint64_t base_seed, std::size_t repetitions = 6);

/// The seed of each repetition permutes sentences within each gold label, so the label pattern is
/// fixed while the sentences occupying it change.
[[nodiscard]] std::vector<OrderingRun> build_ordering_runs(const std::vector<data::Record> &probes, const OrderingPlan &plan,
                                                           const std::string &feature);

}  // namespace aaetag::bias
