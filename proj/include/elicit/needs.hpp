#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/prompts.hpp"

namespace elicit::needs {

struct LatentCriteria {
    std::string text;
};

struct ExtractionResult {
    std::vector<domain::NeedStatement> needs;
    std::vector<std::string> skipped_question_ids; // QAs whose call exhausted retries
};

/// One chat call per Q&A, returning zero or more need statements with ids
/// assigned deterministically as {agent}-{question_id}-{ordinal}.
ExtractionResult extract_needs(gw::Gateway& gateway,
                               const prompts::PromptStore& store,
                               const domain::DesignBrief& brief,
                               const domain::InterviewTranscript& transcript,
                               const std::string& stage = "needs",
                               const std::string& sort_key_prefix = "000");

/// Binary latent/non-latent verdict for one need. zero_shot sends only the
/// need text and the question; criteria modes prepend the criteria verbatim;
/// criteria_cot additionally demands the reasoning before the verdict and
/// stores it on the label. Classification always runs at temperature 0.
domain::NeedLabel classify_latent(gw::Gateway& gateway,
                                  const prompts::PromptStore& store,
                                  const domain::NeedStatement& need,
                                  domain::ClassificationMode mode,
                                  const std::optional<LatentCriteria>& criteria,
                                  const std::string& stage = "needs",
                                  const std::string& sort_key = "0000");

struct AgentNeeds {
    std::vector<domain::NeedStatement> needs;
    std::size_t latent_count = 0;
};

struct NeedsReport {
    std::string run_id;
    domain::ClassificationMode mode = domain::ClassificationMode::zero_shot;
    std::map<std::string, AgentNeeds> per_agent;
    std::size_t total_needs = 0;
    std::size_t total_latent = 0;

    nlohmann::json to_json() const;
};

struct ReportResult {
    NeedsReport report;
    std::string markdown;
};

/// Aggregates labeled needs per agent and renders the report document. Every
/// need must have exactly one label of the report's mode.
ReportResult generate_report(const std::vector<domain::NeedStatement>& needs,
                             const std::vector<domain::NeedLabel>& labels,
                             const domain::RunManifest& manifest,
                             const std::string& criteria_text);

/// Drops needs whose normalized text repeats an earlier one. Off by default in
/// the pipeline; every extracted statement counts unless explicitly enabled.
std::vector<domain::NeedStatement> dedup_needs(
    const std::vector<domain::NeedStatement>& needs);

} // namespace elicit::needs
