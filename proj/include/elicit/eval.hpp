#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/needs.hpp"

namespace elicit::eval {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    std::int64_t tn = 0;

    std::int64_t total() const { return tp + fp + fn + tn; }
    nlohmann::json to_json() const;
};

/// Inter-rater agreement F1 = 2tp / (2tp + fp + fn) over span annotations.
double agreement_fscore(std::int64_t tp, std::int64_t fp, std::int64_t fn);

struct ClassificationMetrics {
    std::optional<double> precision; // absent when tp+fp == 0
    std::optional<double> recall;    // absent when tp+fn == 0
    std::optional<double> f1;        // absent when precision+recall undefined or 0

    nlohmann::json to_json() const;
};

ClassificationMetrics classification_metrics(const ConfusionMatrix& cm);

struct TTestResult {
    double t = 0.0;
    int df = 0;
};

/// Two-sample pooled-variance t statistic with df = n1 + n2 - 2.
TTestResult pooled_t_test(double m1, double s1, int n1, double m2, double s2, int n2);

struct LabeledNeed {
    std::string text;
    bool gold_latent = false;
};

struct LabeledNeedDataset {
    std::vector<LabeledNeed> entries;

    static LabeledNeedDataset from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

void validate(const LabeledNeedDataset& dataset);

struct PricingModel {
    double input_price_per_1m = 10.0;
    double output_price_per_1m = 30.0;
};

void validate(const PricingModel& pricing);

/// Exact (unrounded) cost; round to cents only at display time.
double cost_estimate(const gw::TokenUsage& usage, const PricingModel& pricing);

struct Misclassification {
    std::size_t index = 0;
    std::string text;
    bool gold_latent = false;
    bool predicted_latent = false;
};

struct BenchmarkModeResult {
    ConfusionMatrix confusion;
    ClassificationMetrics metrics;
    std::vector<Misclassification> misclassified;
    std::optional<std::string> error; // set when provider errors aborted the mode
};

/// Classifies every dataset entry under every requested mode through the real
/// classification plumbing; provider errors abort only the affected mode.
std::map<domain::ClassificationMode, BenchmarkModeResult> run_latent_benchmark(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const LabeledNeedDataset& dataset,
    const std::set<domain::ClassificationMode>& modes,
    const std::optional<needs::LatentCriteria>& criteria,
    std::size_t max_in_flight = 8);

nlohmann::json benchmark_to_json(
    const std::map<domain::ClassificationMode, BenchmarkModeResult>& results);

/// CSV rows: mode,tp,fp,fn,tn,precision,recall,f1 (blank cells for undefined).
std::string benchmark_matrices_csv(
    const std::map<domain::ClassificationMode, BenchmarkModeResult>& results);

} // namespace elicit::eval
