#include "aaetag/metrics.hpp"

#include "aaetag/error.hpp"

#include <fmt/format.h>

namespace aaetag::metrics {

namespace {

double ratio(std::size_t num, std::size_t den, bool &zero_division) {
    if (den == 0) {
        zero_division = true;
        return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, bool &zero_division) {
    if (p + r == 0.0) {
        zero_division = true;
        return 0.0;
    }
    return 2.0 * p * r / (p + r);
}

}  // namespace

ConfusionCounts confusion(std::span<const Label> preds, std::span<const Label> golds) {
    if (preds.size() != golds.size()) {
        throw InputError(fmt::format("score: {} predictions for {} gold labels", preds.size(), golds.size()));
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == Label::positive;
        const bool g = golds[i] == Label::positive;
        if (p && g) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (g) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

ClassificationReport report_from_counts(const ConfusionCounts &c) {
    ClassificationReport r;
    r.counts = c;
    r.support_pos = c.tp + c.fn;
    r.support_neg = c.tn + c.fp;
    bool zd = false;
    r.precision_pos = ratio(c.tp, c.tp + c.fp, zd);
    r.precision_neg = ratio(c.tn, c.tn + c.fn, zd);
    r.recall_pos = ratio(c.tp, r.support_pos, zd);
    r.recall_neg = ratio(c.tn, r.support_neg, zd);
    r.f1_pos = harmonic(r.precision_pos, r.recall_pos, zd);
    r.f1_neg = harmonic(r.precision_neg, r.recall_neg, zd);
    const auto n = static_cast<double>(r.support_pos + r.support_neg);
    r.f1_weighted = n == 0.0 ? 0.0
                             : (static_cast<double>(r.support_pos) * r.f1_pos + static_cast<double>(r.support_neg) * r.f1_neg) / n;
    r.zero_division = zd;
    return r;
}

ClassificationReport score(std::span<const Label> preds, std::span<const Label> golds) {
    if (golds.empty() && preds.empty()) {
        throw InputError("score: no examples");
    }
    return report_from_counts(confusion(preds, golds));
}

ClassificationReport average_reports(std::span<const ClassificationReport> reports) {
    if (reports.empty()) {
        throw InputError("average_reports: no reports");
    }
    ClassificationReport avg;
    for (const ClassificationReport &r : reports) {
        avg.precision_pos += r.precision_pos;
        avg.precision_neg += r.precision_neg;
        avg.recall_pos += r.recall_pos;
        avg.recall_neg += r.recall_neg;
        avg.f1_pos += r.f1_pos;
        avg.f1_neg += r.f1_neg;
        avg.f1_weighted += r.f1_weighted;
        avg.support_pos += r.support_pos;
        avg.support_neg += r.support_neg;
        avg.counts.tp += r.counts.tp;
        avg.counts.fp += r.counts.fp;
        avg.counts.tn += r.counts.tn;
        avg.counts.fn += r.counts.fn;
        avg.zero_division = avg.zero_division || r.zero_division;
    }
    const auto n = static_cast<double>(reports.size());
    avg.precision_pos /= n;
    avg.precision_neg /= n;
    avg.recall_pos /= n;
    avg.recall_neg /= n;
    avg.f1_pos /= n;
    avg.f1_neg /= n;
    avg.f1_weighted /= n;
    return avg;
}

std::string render_text(const ClassificationReport &r, const std::string &title) {
    std::string out;
    if (!title.empty()) {
        out += title + '\n';
    }
    out += fmt::format("{:<6}{:>8.3f}\n", "P+", r.precision_pos);
    out += fmt::format("{:<6}{:>8.3f}\n", "P-", r.precision_neg);
    out += fmt::format("{:<6}{:>8.3f}\n", "R+", r.recall_pos);
    out += fmt::format("{:<6}{:>8.3f}\n", "R-", r.recall_neg);
    out += fmt::format("{:<6}{:>8.3f}\n", "F1w", r.f1_weighted);
    out += fmt::format("support +{} -{}  (tp {} fp {} tn {} fn {}){}\n", r.support_pos, r.support_neg, r.counts.tp,
                       r.counts.fp, r.counts.tn, r.counts.fn, r.zero_division ? "  [zero division -> 0]" : "");
    return out;
}

nlohmann::json to_json(const ClassificationReport &r) {
    return {
        {"P+", r.precision_pos},
        {"P-", r.precision_neg},
        {"R+", r.recall_pos},
        {"R-", r.recall_neg},
        {"F1+", r.f1_pos},
        {"F1-", r.f1_neg},
        {"F1w", r.f1_weighted},
        {"support", {{"positive", r.support_pos}, {"negative", r.support_neg}}},
        {"confusion", {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}}},
        {"zero_division", r.zero_division},
    };
}

}  // namespace aaetag::metrics
