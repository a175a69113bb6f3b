#include "elicit/eval.hpp"

#include "elicit/errors.hpp"
#include "elicit/util.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace elicit::eval {

nlohmann::json ConfusionMatrix::to_json() const {
    return nlohmann::json{{"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};
}

double agreement_fscore(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
    if (tp < 0 || fp < 0 || fn < 0)
        throw ValidationError("agreement_fscore requires nonnegative counts");
    const std::int64_t denominator = 2 * tp + fp + fn;
    if (denominator == 0)
        throw Error(ErrorCode::undefined_score,
                    "agreement F-score undefined: 2tp + fp + fn == 0");
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denominator);
}

nlohmann::json ClassificationMetrics::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    j["precision"] = precision ? nlohmann::json(*precision) : nlohmann::json();
    j["recall"] = recall ? nlohmann::json(*recall) : nlohmann::json();
    j["f1"] = f1 ? nlohmann::json(*f1) : nlohmann::json();
    return j;
}

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm) {
    if (cm.tp < 0 || cm.fp < 0 || cm.fn < 0 || cm.tn < 0)
        throw ValidationError("confusion matrix counts must be nonnegative");
    if (cm.total() == 0)
        throw Error(ErrorCode::undefined_metric,
                    "metrics undefined on an empty confusion matrix");

    ClassificationMetrics metrics;
    if (cm.tp + cm.fp > 0)
        metrics.precision =
            static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    if (cm.tp + cm.fn > 0)
        metrics.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    if (metrics.precision && metrics.recall && (*metrics.precision + *metrics.recall) > 0.0)
        metrics.f1 = 2.0 * (*metrics.precision) * (*metrics.recall) /
                     (*metrics.precision + *metrics.recall);
    return metrics;
}

TTestResult pooled_t_test(double m1, double s1, int n1, double m2, double s2, int n2) {
    if (n1 < 2 || n2 < 2)
        throw ValidationError("pooled_t_test requires n1, n2 >= 2");
    if (s1 < 0.0 || s2 < 0.0)
        throw ValidationError("pooled_t_test requires nonnegative deviations");

    const double pooled_var =
        (static_cast<double>(n1 - 1) * s1 * s1 + static_cast<double>(n2 - 1) * s2 * s2) /
        static_cast<double>(n1 + n2 - 2);
    if (pooled_var <= 0.0)
        throw Error(ErrorCode::degenerate_variance,
                    "pooled variance is zero; t statistic undefined");

    TTestResult result;
    result.t = (m1 - m2) / std::sqrt(pooled_var * (1.0 / n1 + 1.0 / n2));
    result.df = n1 + n2 - 2;
    return result;
}

LabeledNeedDataset LabeledNeedDataset::from_json(const nlohmann::json& j) {
    LabeledNeedDataset dataset;
    for (const auto& item : j) {
        LabeledNeed entry;
        entry.text = item.at("text").get<std::string>();
        entry.gold_latent = item.at("latent").get<bool>();
        dataset.entries.push_back(std::move(entry));
    }
    validate(dataset);
    return dataset;
}

nlohmann::json LabeledNeedDataset::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& entry : entries)
        j.push_back({{"text", entry.text}, {"latent", entry.gold_latent}});
    return j;
}

void validate(const LabeledNeedDataset& dataset) {
    if (dataset.entries.empty())
        throw ValidationError("LabeledNeedDataset must be non-empty");
    for (const auto& entry : dataset.entries)
        if (entry.text.empty())
            throw ValidationError("LabeledNeedDataset texts must be non-empty");
}

void validate(const PricingModel& pricing) {
    if (pricing.input_price_per_1m < 0.0 || pricing.output_price_per_1m < 0.0)
        throw ValidationError("prices must be nonnegative");
}

double cost_estimate(const gw::TokenUsage& usage, const PricingModel& pricing) {
    validate(pricing);
    return static_cast<double>(usage.input_tokens) * pricing.input_price_per_1m / 1e6 +
           static_cast<double>(usage.output_tokens) * pricing.output_price_per_1m / 1e6;
}

std::map<domain::ClassificationMode, BenchmarkModeResult> run_latent_benchmark(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const LabeledNeedDataset& dataset,
    const std::set<domain::ClassificationMode>& modes,
    const std::optional<needs::LatentCriteria>& criteria,
    std::size_t max_in_flight) {
    validate(dataset);
    if (modes.empty()) throw ValidationError("run_latent_benchmark requires modes");
    for (const auto mode : modes)
        if (mode != domain::ClassificationMode::zero_shot && !criteria)
            throw ValidationError("criteria required for mode " + domain::to_string(mode));

    std::map<domain::ClassificationMode, BenchmarkModeResult> results;
    for (const auto mode : modes) {
        BenchmarkModeResult mode_result;
        const auto mode_criteria =
            mode == domain::ClassificationMode::zero_shot
                ? std::optional<needs::LatentCriteria>{}
                : criteria;
        try {
            std::function<bool(std::size_t)> task = [&](std::size_t i) {
                domain::NeedStatement need;
                need.id = "bench-" + std::to_string(i);
                need.agent_name = "benchmark";
                need.source_question_id = "bench";
                need.text = dataset.entries[i].text;
                char key[32];
                std::snprintf(key, sizeof(key), "%s.%04zu",
                              domain::to_string(mode).c_str(), i);
                return needs::classify_latent(gateway, store, need, mode, mode_criteria,
                                              "benchmark", key)
                    .latent;
            };
            const auto predictions =
                util::parallel_map<bool>(dataset.entries.size(), max_in_flight, task);

            for (std::size_t i = 0; i < predictions.size(); ++i) {
                const bool gold = dataset.entries[i].gold_latent;
                const bool predicted = predictions[i];
                if (gold && predicted) ++mode_result.confusion.tp;
                if (!gold && predicted) ++mode_result.confusion.fp;
                if (gold && !predicted) ++mode_result.confusion.fn;
                if (!gold && !predicted) ++mode_result.confusion.tn;
                if (gold != predicted)
                    mode_result.misclassified.push_back(
                        {i, dataset.entries[i].text, gold, predicted});
            }
            mode_result.metrics = classification_metrics(mode_result.confusion);
        } catch (const Error& e) {
            mode_result.error = std::string(error_code_name(e.code())) + ": " + e.what();
        }
        results[mode] = std::move(mode_result);
    }
    return results;
}

nlohmann::json benchmark_to_json(
    const std::map<domain::ClassificationMode, BenchmarkModeResult>& results) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [mode, result] : results) {
        nlohmann::json misclassified = nlohmann::json::array();
        for (const auto& m : result.misclassified)
            misclassified.push_back({{"index", m.index},
                                     {"text", m.text},
                                     {"gold_latent", m.gold_latent},
                                     {"predicted_latent", m.predicted_latent}});
        nlohmann::json entry{{"confusion", result.confusion.to_json()},
                             {"metrics", result.metrics.to_json()},
                             {"misclassified", std::move(misclassified)}};
        if (result.error) entry["error"] = *result.error;
        j[domain::to_string(mode)] = std::move(entry);
    }
    return j;
}

std::string benchmark_matrices_csv(
    const std::map<domain::ClassificationMode, BenchmarkModeResult>& results) {
    std::ostringstream out;
    out << "mode,tp,fp,fn,tn,precision,recall,f1\n";
    for (const auto& [mode, result] : results) {
        out << domain::to_string(mode) << "," << result.confusion.tp << ","
            << result.confusion.fp << "," << result.confusion.fn << ","
            << result.confusion.tn << ",";
        auto cell = [&](const std::optional<double>& v) {
            if (v) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.4f", *v);
                out << buf;
            }
        };
        cell(result.metrics.precision);
        out << ",";
        cell(result.metrics.recall);
        out << ",";
        cell(result.metrics.f1);
        out << "\n";
    }
    return out.str();
}

} // namespace elicit::eval
