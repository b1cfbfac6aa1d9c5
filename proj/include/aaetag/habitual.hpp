#pragma once

#include "aaetag/dataset.hpp"
#include "aaetag/error.hpp"
#include "aaetag/glm.hpp"
#include "aaetag/label.hpp"
#include "aaetag/metrics.hpp"
#include "aaetag/pos.hpp"
#include "aaetag/text.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace aaetag::habitual {

inline constexpr std::string_view pad_token = "<pad>";
inline constexpr std::string_view pad_tag = "PAD";
inline constexpr std::string_view intercept_feature = "intercept";

/// The sentence has no "be" token.
class ZeroBeError : public InputError {
  public:
    using InputError::InputError;
};

/// The sentence has more than one "be" token.
class MultipleBeError : public InputError {
  public:
    using InputError::InputError;
};

/// k tokens either side of the single "be", padded past the sentence edges.
struct BeContext {
    std::size_t be_index = 0;
    std::size_t k = 0;
    /// 2k slots: positions -k..-1 then +1..+k.
    std::vector<std::string> tokens;
    std::vector<std::string> tags;

    [[nodiscard]] std::vector<std::string> left_tokens() const { return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(k)}; }
    [[nodiscard]] std::vector<std::string> right_tokens() const { return {tokens.begin() + static_cast<std::ptrdiff_t>(k), tokens.end()}; }
};

/// Names of the indicator features that fire (value 1); the intercept is always present.
struct FeatureVector {
    std::vector<std::string> names;  // sorted, unique
};

[[nodiscard]] BeContext extract_be_context(const text::Sentence &sentence, std::size_t k,
                                           const pos::Tagger &tagger = pos::Tagger::defaults());

/// Unigram indicators per slot for the lower-cased token and its tag, plus bigram indicators over
/// each adjacent pair of the 2k+1 positions (the "be" itself sits at offset 0).
[[nodiscard]] FeatureVector vectorize(const BeContext &ctx);

struct HabitualModel {
    std::map<std::string, double> weights;
    std::size_t k = 3;
    double threshold = 0.5;
    double l2 = 1e-4;
    std::size_t min_count = 2;
    nlohmann::json metadata = nlohmann::json::object();

    /// logistic(w . x); features without a weight contribute nothing.
    [[nodiscard]] double probability(const FeatureVector &features) const;

    [[nodiscard]] nlohmann::json to_json() const;
    static HabitualModel from_json(const nlohmann::json &j);
};

struct Prediction {
    Label label = Label::negative;
    double probability = 0.5;
};

[[nodiscard]] Prediction predict_habitual(const HabitualModel &model, const text::Sentence &sentence);

struct TrainOptions {
    std::size_t k = 3;
    std::size_t folds = 10;
    std::uint64_t seed = 1;
    double threshold = 0.5;
    double l2 = 1e-4;
    /// Features seen fewer times than this in the training split are dropped.
    std::size_t min_count = 2;
    /// When false, augmented records are scored only through training folds.
    bool augmented_in_test = true;
    bool parallel_folds = true;
    glm::FitConfig fit;
};

struct FoldResult {
    std::size_t fold = 0;
    HabitualModel model;
    metrics::ClassificationReport report;
};

/// Fits one model on an explicit training set.
[[nodiscard]] HabitualModel fit_model(const std::vector<data::Record> &training, const TrainOptions &options);

/// Stratified k-fold cross-validation; one model and held-out report per fold, in fold order.
/// Errors from the GLM are rethrown with the fold number.
[[nodiscard]] std::vector<FoldResult> train_habitual(const data::Dataset &dataset, const TrainOptions &options);

}  // namespace aaetag::habitual
