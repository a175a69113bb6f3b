#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace elicit::domain {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Core records shared by every pipeline stage. All records are immutable in
// spirit: construct, validate, then only read. Canonical JSON uses snake_case
// field names and lowercase enum strings; those representations are the
// contract of the run-directory files.
// ---------------------------------------------------------------------------

struct DesignBrief {
    std::string product_name;
    std::string product_description;
    std::vector<std::string> categories;
    std::optional<std::string> typical_user_profile;
};

enum class AgentOrigin { serial, parallel, parallel_filtered, manual };

struct AgentProfile {
    std::string name;
    std::string description;
    std::string reasoning;
    AgentOrigin origin = AgentOrigin::manual;
};

struct ExperienceStep {
    int index = 0; // 1-based, contiguous within a ProductExperience
    std::string action;
    std::string observation;
    std::string challenge;
};

struct ProductExperience {
    std::string agent_name;
    std::vector<ExperienceStep> steps;
};

enum class QuestionKind { freestyle, categorical };

struct InterviewQA {
    std::string question_id;
    std::string question_text;
    std::string answer_text;
    QuestionKind kind = QuestionKind::freestyle;
    std::optional<std::string> category; // required iff kind == categorical
};

struct InterviewTranscript {
    std::string agent_name;
    std::vector<InterviewQA> qas;
    bool complete = true; // false when a provider failure aborted the interview
};

struct NeedStatement {
    std::string id;
    std::string agent_name;
    std::string source_question_id;
    std::string text;
};

enum class ClassificationMode { zero_shot, criteria, criteria_cot };

struct NeedLabel {
    std::string need_id;
    bool latent = false;
    ClassificationMode mode = ClassificationMode::zero_shot;
    std::optional<std::string> reasoning; // required iff mode == criteria_cot
};

struct EmbeddingVector {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
};

enum class StageStatus { pending, done };

/// Pipeline stages in execution order.
const std::vector<std::string>& stage_order();

struct RunManifest {
    std::string run_id;
    DesignBrief brief;
    std::int64_t seed = 0;
    std::string provider_id;
    std::map<std::string, StageStatus> stage_status;
    std::string created_at; // ISO-8601 UTC
    std::map<std::string, std::string> artifact_hashes;
};

// --- validation -------------------------------------------------------------
// Each validate() throws ValidationError on the first violated invariant.
// Serialization and parsing both validate, so no invariant-violating record
// can round-trip through the artifact files.

void validate(const DesignBrief& brief, bool categories_required = false);
void validate(const AgentProfile& agent);
void validate(const ProductExperience& experience);
void validate(const InterviewQA& qa,
              const std::vector<std::string>* allowed_categories = nullptr);
void validate(const InterviewTranscript& transcript);
void validate(const NeedStatement& need);
void validate(const NeedLabel& label);
void validate(const EmbeddingVector& vec);
void validate(const RunManifest& manifest);

/// Cross-record check: names unique, all non-empty. Throws DuplicateAgentNames.
void validate_agent_set(const std::vector<AgentProfile>& agents);

// --- enum/string maps --------------------------------------------------------

std::string to_string(AgentOrigin origin);
AgentOrigin agent_origin_from_string(const std::string& s);
std::string to_string(QuestionKind kind);
QuestionKind question_kind_from_string(const std::string& s);
std::string to_string(ClassificationMode mode);
ClassificationMode classification_mode_from_string(const std::string& s);
std::string to_string(StageStatus status);
StageStatus stage_status_from_string(const std::string& s);

// --- canonical JSON ----------------------------------------------------------

json to_json(const DesignBrief& brief);
json to_json(const AgentProfile& agent);
json to_json(const ProductExperience& experience);
json to_json(const InterviewQA& qa);
json to_json(const InterviewTranscript& transcript);
json to_json(const NeedStatement& need);
json to_json(const NeedLabel& label);
json to_json(const EmbeddingVector& vec);
json to_json(const RunManifest& manifest);

DesignBrief brief_from_json(const json& j);
AgentProfile agent_from_json(const json& j);
ProductExperience experience_from_json(const json& j);
InterviewQA qa_from_json(const json& j);
InterviewTranscript transcript_from_json(const json& j);
NeedStatement need_from_json(const json& j);
NeedLabel label_from_json(const json& j);
EmbeddingVector embedding_from_json(const json& j);
RunManifest manifest_from_json(const json& j);

} // namespace elicit::domain
