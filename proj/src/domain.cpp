#include "elicit/domain.hpp"

#include "elicit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace elicit::domain {

namespace {

void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

std::string get_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string())
        throw ValidationError(std::string("missing or non-string field: ") + key);
    return j.at(key).get<std::string>();
}

} // namespace

const std::vector<std::string>& stage_order() {
    static const std::vector<std::string> order = {
        "agents", "experiences", "interviews", "needs", "metrics", "report"};
    return order;
}

// --- validation -------------------------------------------------------------

void validate(const DesignBrief& brief, bool categories_required) {
    require(!brief.product_name.empty(), "DesignBrief.product_name must be non-empty");
    if (categories_required)
        require(!brief.categories.empty(),
                "DesignBrief.categories must be non-empty when categorical questions are requested");
    std::set<std::string> seen;
    for (const auto& c : brief.categories) {
        require(!c.empty(), "DesignBrief.categories entries must be non-empty");
        require(seen.insert(c).second, "DesignBrief.categories contains duplicate: " + c);
    }
    if (brief.typical_user_profile)
        require(!brief.typical_user_profile->empty(),
                "DesignBrief.typical_user_profile must be non-empty when present");
}

void validate(const AgentProfile& agent) {
    require(!agent.name.empty(), "AgentProfile.name must be non-empty");
    require(!agent.description.empty(), "AgentProfile.description must be non-empty");
    require(!agent.reasoning.empty(), "AgentProfile.reasoning must be non-empty");
}

void validate(const ProductExperience& experience) {
    require(!experience.agent_name.empty(), "ProductExperience.agent_name must be non-empty");
    require(!experience.steps.empty(), "ProductExperience must contain at least one step");
    int expected = 1;
    for (const auto& step : experience.steps) {
        require(step.index == expected,
                "ExperienceStep indices must be contiguous from 1");
        require(!step.action.empty(), "ExperienceStep.action must be non-empty");
        require(!step.observation.empty(), "ExperienceStep.observation must be non-empty");
        require(!step.challenge.empty(), "ExperienceStep.challenge must be non-empty");
        ++expected;
    }
}

void validate(const InterviewQA& qa, const std::vector<std::string>* allowed_categories) {
    require(!qa.question_id.empty(), "InterviewQA.question_id must be non-empty");
    require(!qa.question_text.empty(), "InterviewQA.question_text must be non-empty");
    require(!qa.answer_text.empty(), "InterviewQA.answer_text must be non-empty");
    if (qa.kind == QuestionKind::categorical) {
        require(qa.category.has_value() && !qa.category->empty(),
                "categorical InterviewQA requires a category");
    } else {
        require(!qa.category.has_value(), "freestyle InterviewQA must not carry a category");
    }
    if (qa.category && allowed_categories) {
        require(std::find(allowed_categories->begin(), allowed_categories->end(),
                          *qa.category) != allowed_categories->end(),
                "InterviewQA.category not in brief categories: " + *qa.category);
    }
}

void validate(const InterviewTranscript& transcript) {
    require(!transcript.agent_name.empty(), "InterviewTranscript.agent_name must be non-empty");
    std::set<std::string> ids;
    for (const auto& qa : transcript.qas) {
        validate(qa);
        require(ids.insert(qa.question_id).second,
                "duplicate question_id in transcript: " + qa.question_id);
    }
}

void validate(const NeedStatement& need) {
    require(!need.id.empty(), "NeedStatement.id must be non-empty");
    require(!need.agent_name.empty(), "NeedStatement.agent_name must be non-empty");
    require(!need.source_question_id.empty(),
            "NeedStatement.source_question_id must be non-empty");
    require(!need.text.empty(), "NeedStatement.text must be non-empty");
}

void validate(const NeedLabel& label) {
    require(!label.need_id.empty(), "NeedLabel.need_id must be non-empty");
    if (label.mode == ClassificationMode::criteria_cot)
        require(label.reasoning.has_value() && !label.reasoning->empty(),
                "criteria_cot NeedLabel requires non-empty reasoning");
}

void validate(const EmbeddingVector& vec) {
    require(!vec.values.empty(), "EmbeddingVector must be non-empty");
    for (double v : vec.values)
        require(std::isfinite(v), "EmbeddingVector values must be finite");
}

void validate(const RunManifest& manifest) {
    require(!manifest.run_id.empty(), "RunManifest.run_id must be non-empty");
    validate(manifest.brief);
    require(!manifest.provider_id.empty(), "RunManifest.provider_id must be non-empty");
    require(!manifest.created_at.empty(), "RunManifest.created_at must be set");
    // A stage may be done only if every prior stage is done.
    bool prior_done = true;
    for (const auto& stage : stage_order()) {
        auto it = manifest.stage_status.find(stage);
        require(it != manifest.stage_status.end(),
                "RunManifest missing stage entry: " + stage);
        const bool done = it->second == StageStatus::done;
        require(!done || prior_done,
                "RunManifest stage order violated at stage: " + stage);
        prior_done = prior_done && done;
    }
    require(manifest.stage_status.size() == stage_order().size(),
            "RunManifest has unknown stage entries");
}

void validate_agent_set(const std::vector<AgentProfile>& agents) {
    std::set<std::string> names;
    for (const auto& agent : agents) {
        validate(agent);
        if (!names.insert(agent.name).second)
            throw Error(ErrorCode::duplicate_agent_names,
                        "duplicate agent name in run: " + agent.name);
    }
}

// --- enum maps ----------------------------------------------------------------

std::string to_string(AgentOrigin origin) {
    switch (origin) {
        case AgentOrigin::serial: return "serial";
        case AgentOrigin::parallel: return "parallel";
        case AgentOrigin::parallel_filtered: return "parallel_filtered";
        case AgentOrigin::manual: return "manual";
    }
    return "manual";
}

AgentOrigin agent_origin_from_string(const std::string& s) {
    if (s == "serial") return AgentOrigin::serial;
    if (s == "parallel") return AgentOrigin::parallel;
    if (s == "parallel_filtered") return AgentOrigin::parallel_filtered;
    if (s == "manual") return AgentOrigin::manual;
    throw ValidationError("unknown agent origin: " + s);
}

std::string to_string(QuestionKind kind) {
    return kind == QuestionKind::freestyle ? "freestyle" : "categorical";
}

QuestionKind question_kind_from_string(const std::string& s) {
    if (s == "freestyle") return QuestionKind::freestyle;
    if (s == "categorical") return QuestionKind::categorical;
    throw ValidationError("unknown question kind: " + s);
}

std::string to_string(ClassificationMode mode) {
    switch (mode) {
        case ClassificationMode::zero_shot: return "zero_shot";
        case ClassificationMode::criteria: return "criteria";
        case ClassificationMode::criteria_cot: return "criteria_cot";
    }
    return "zero_shot";
}

ClassificationMode classification_mode_from_string(const std::string& s) {
    if (s == "zero_shot") return ClassificationMode::zero_shot;
    if (s == "criteria") return ClassificationMode::criteria;
    if (s == "criteria_cot") return ClassificationMode::criteria_cot;
    throw ValidationError("unknown classification mode: " + s);
}

std::string to_string(StageStatus status) {
    return status == StageStatus::done ? "done" : "pending";
}

StageStatus stage_status_from_string(const std::string& s) {
    if (s == "done") return StageStatus::done;
    if (s == "pending") return StageStatus::pending;
    throw ValidationError("unknown stage status: " + s);
}

// --- canonical JSON -----------------------------------------------------------

json to_json(const DesignBrief& brief) {
    validate(brief);
    json j{{"product_name", brief.product_name},
           {"product_description", brief.product_description},
           {"categories", brief.categories}};
    if (brief.typical_user_profile) j["typical_user_profile"] = *brief.typical_user_profile;
    return j;
}

DesignBrief brief_from_json(const json& j) {
    DesignBrief brief;
    brief.product_name = get_string(j, "product_name");
    brief.product_description = j.value("product_description", std::string{});
    if (j.contains("categories"))
        brief.categories = j.at("categories").get<std::vector<std::string>>();
    if (j.contains("typical_user_profile"))
        brief.typical_user_profile = j.at("typical_user_profile").get<std::string>();
    validate(brief);
    return brief;
}

json to_json(const AgentProfile& agent) {
    validate(agent);
    return json{{"name", agent.name},
                {"description", agent.description},
                {"reasoning", agent.reasoning},
                {"origin", to_string(agent.origin)}};
}

AgentProfile agent_from_json(const json& j) {
    AgentProfile agent;
    agent.name = get_string(j, "name");
    agent.description = get_string(j, "description");
    agent.reasoning = get_string(j, "reasoning");
    agent.origin = agent_origin_from_string(get_string(j, "origin"));
    validate(agent);
    return agent;
}

json to_json(const ProductExperience& experience) {
    validate(experience);
    json steps = json::array();
    for (const auto& step : experience.steps) {
        steps.push_back(json{{"index", step.index},
                             {"action", step.action},
                             {"observation", step.observation},
                             {"challenge", step.challenge}});
    }
    return json{{"agent_name", experience.agent_name}, {"steps", std::move(steps)}};
}

ProductExperience experience_from_json(const json& j) {
    ProductExperience experience;
    experience.agent_name = get_string(j, "agent_name");
    for (const auto& js : j.at("steps")) {
        ExperienceStep step;
        step.index = js.at("index").get<int>();
        step.action = get_string(js, "action");
        step.observation = get_string(js, "observation");
        step.challenge = get_string(js, "challenge");
        experience.steps.push_back(std::move(step));
    }
    validate(experience);
    return experience;
}

json to_json(const InterviewQA& qa) {
    validate(qa);
    json j{{"question_id", qa.question_id},
           {"question_text", qa.question_text},
           {"answer_text", qa.answer_text},
           {"kind", to_string(qa.kind)}};
    if (qa.category) j["category"] = *qa.category;
    return j;
}

InterviewQA qa_from_json(const json& j) {
    InterviewQA qa;
    qa.question_id = get_string(j, "question_id");
    qa.question_text = get_string(j, "question_text");
    qa.answer_text = get_string(j, "answer_text");
    qa.kind = question_kind_from_string(get_string(j, "kind"));
    if (j.contains("category")) qa.category = j.at("category").get<std::string>();
    validate(qa);
    return qa;
}

json to_json(const InterviewTranscript& transcript) {
    validate(transcript);
    json qas = json::array();
    for (const auto& qa : transcript.qas) qas.push_back(to_json(qa));
    return json{{"agent_name", transcript.agent_name},
                {"qas", std::move(qas)},
                {"complete", transcript.complete}};
}

InterviewTranscript transcript_from_json(const json& j) {
    InterviewTranscript transcript;
    transcript.agent_name = get_string(j, "agent_name");
    for (const auto& jq : j.at("qas")) transcript.qas.push_back(qa_from_json(jq));
    transcript.complete = j.value("complete", true);
    validate(transcript);
    return transcript;
}

json to_json(const NeedStatement& need) {
    validate(need);
    return json{{"id", need.id},
                {"agent_name", need.agent_name},
                {"source_question_id", need.source_question_id},
                {"text", need.text}};
}

NeedStatement need_from_json(const json& j) {
    NeedStatement need;
    need.id = get_string(j, "id");
    need.agent_name = get_string(j, "agent_name");
    need.source_question_id = get_string(j, "source_question_id");
    need.text = get_string(j, "text");
    validate(need);
    return need;
}

json to_json(const NeedLabel& label) {
    validate(label);
    json j{{"need_id", label.need_id},
           {"latent", label.latent},
           {"mode", to_string(label.mode)}};
    if (label.reasoning) j["reasoning"] = *label.reasoning;
    return j;
}

NeedLabel label_from_json(const json& j) {
    NeedLabel label;
    label.need_id = get_string(j, "need_id");
    label.latent = j.at("latent").get<bool>();
    label.mode = classification_mode_from_string(get_string(j, "mode"));
    if (j.contains("reasoning")) label.reasoning = j.at("reasoning").get<std::string>();
    validate(label);
    return label;
}

json to_json(const EmbeddingVector& vec) {
    validate(vec);
    return json{{"values", vec.values}, {"dim", vec.values.size()}};
}

EmbeddingVector embedding_from_json(const json& j) {
    EmbeddingVector vec;
    vec.values = j.at("values").get<std::vector<double>>();
    if (j.contains("dim") && j.at("dim").get<std::size_t>() != vec.values.size())
        throw ValidationError("EmbeddingVector dim does not match values length");
    validate(vec);
    return vec;
}

json to_json(const RunManifest& manifest) {
    validate(manifest);
    json status = json::object();
    for (const auto& [stage, st] : manifest.stage_status) status[stage] = to_string(st);
    return json{{"run_id", manifest.run_id},
                {"brief", to_json(manifest.brief)},
                {"seed", manifest.seed},
                {"provider_id", manifest.provider_id},
                {"stage_status", std::move(status)},
                {"created_at", manifest.created_at},
                {"artifact_hashes", manifest.artifact_hashes}};
}

RunManifest manifest_from_json(const json& j) {
    RunManifest manifest;
    manifest.run_id = get_string(j, "run_id");
    manifest.brief = brief_from_json(j.at("brief"));
    manifest.seed = j.at("seed").get<std::int64_t>();
    manifest.provider_id = get_string(j, "provider_id");
    for (const auto& [stage, st] : j.at("stage_status").items())
        manifest.stage_status[stage] = stage_status_from_string(st.get<std::string>());
    manifest.created_at = get_string(j, "created_at");
    if (j.contains("artifact_hashes"))
        manifest.artifact_hashes =
            j.at("artifact_hashes").get<std::map<std::string, std::string>>();
    validate(manifest);
    return manifest;
}

} // namespace elicit::domain
