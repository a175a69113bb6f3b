#include "elicit/needs.hpp"

#include "elicit/errors.hpp"
#include "elicit/util.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

namespace elicit::needs {

ExtractionResult extract_needs(gw::Gateway& gateway,
                               const prompts::PromptStore& store,
                               const domain::DesignBrief& brief,
                               const domain::InterviewTranscript& transcript,
                               const std::string& stage,
                               const std::string& sort_key_prefix) {
    domain::validate(transcript);
    if (!transcript.complete)
        throw ValidationError("extract_needs requires a complete transcript");

    const std::string system_text =
        store.render("needs_extract", {{"product", brief.product_name}});

    ExtractionResult result;
    for (std::size_t qi = 0; qi < transcript.qas.size(); ++qi) {
        const auto& qa = transcript.qas[qi];

        gw::ChatRequest chat;
        chat.stage = stage;
        char key[48];
        std::snprintf(key, sizeof(key), "%s.q%02zu", sort_key_prefix.c_str(), qi);
        chat.sort_key = key;
        chat.system_text = system_text;
        chat.user_turns = {"Question: " + qa.question_text + "\nAnswer: " + qa.answer_text};
        chat.response_schema = schema::Schema::object(
            {{"needs", schema::Schema::array(schema::Schema::string(), 0, -1)}});

        gw::StructuredResult response;
        try {
            response = gateway.chat_structured(chat);
        } catch (const SchemaExhausted&) {
            result.skipped_question_ids.push_back(qa.question_id);
            continue;
        }

        int ordinal = 1;
        for (const auto& text : response.record.at("needs")) {
            domain::NeedStatement need;
            need.id = transcript.agent_name + "-" + qa.question_id + "-" +
                      std::to_string(ordinal++);
            need.agent_name = transcript.agent_name;
            need.source_question_id = qa.question_id;
            need.text = text.get<std::string>();
            domain::validate(need);
            result.needs.push_back(std::move(need));
        }
    }
    return result;
}

domain::NeedLabel classify_latent(gw::Gateway& gateway,
                                  const prompts::PromptStore& store,
                                  const domain::NeedStatement& need,
                                  domain::ClassificationMode mode,
                                  const std::optional<LatentCriteria>& criteria,
                                  const std::string& stage,
                                  const std::string& sort_key) {
    domain::validate(need);
    const bool needs_criteria = mode != domain::ClassificationMode::zero_shot;
    if (needs_criteria != criteria.has_value())
        throw ValidationError(
            "criteria must be present exactly when mode is not zero_shot");
    if (criteria && criteria->text.empty())
        throw ValidationError("LatentCriteria.text must be non-empty");

    gw::ChatRequest chat;
    chat.stage = stage;
    chat.sort_key = sort_key;
    chat.temperature = 0.0;

    std::string turn;
    switch (mode) {
        case domain::ClassificationMode::zero_shot:
            chat.system_text = store.get("classify_zero_shot");
            turn = "Is this a latent need?\n\nNeed: " + need.text;
            chat.response_schema =
                schema::Schema::object({{"latent", schema::Schema::boolean()}});
            break;
        case domain::ClassificationMode::criteria:
            chat.system_text = store.get("classify_criteria");
            turn = criteria->text + "\n\nIs this a latent need?\n\nNeed: " + need.text;
            chat.response_schema =
                schema::Schema::object({{"latent", schema::Schema::boolean()}});
            break;
        case domain::ClassificationMode::criteria_cot:
            chat.system_text = store.get("classify_criteria_cot");
            turn = criteria->text + "\n\nIs this a latent need?\n\nNeed: " + need.text;
            // Field order requests the reasoning before the verdict.
            chat.response_schema =
                schema::Schema::object({{"reasoning", schema::Schema::string()},
                                        {"latent", schema::Schema::boolean()}});
            break;
    }
    chat.user_turns = {turn};

    const auto result = gateway.chat_structured(chat);

    domain::NeedLabel label;
    label.need_id = need.id;
    label.latent = result.record.at("latent").get<bool>();
    label.mode = mode;
    if (mode == domain::ClassificationMode::criteria_cot)
        label.reasoning = result.record.at("reasoning").get<std::string>();
    domain::validate(label);
    return label;
}

nlohmann::json NeedsReport::to_json() const {
    nlohmann::json agents = nlohmann::json::object();
    for (const auto& [name, entry] : per_agent) {
        nlohmann::json needs_json = nlohmann::json::array();
        for (const auto& need : entry.needs) needs_json.push_back(domain::to_json(need));
        agents[name] = nlohmann::json{{"needs", std::move(needs_json)},
                                      {"latent_count", entry.latent_count}};
    }
    return nlohmann::json{{"run_id", run_id},
                          {"mode", domain::to_string(mode)},
                          {"per_agent", std::move(agents)},
                          {"totals", {{"needs", total_needs}, {"latent", total_latent}}}};
}

ReportResult generate_report(const std::vector<domain::NeedStatement>& needs,
                             const std::vector<domain::NeedLabel>& labels,
                             const domain::RunManifest& manifest,
                             const std::string& criteria_text) {
    std::map<std::string, const domain::NeedLabel*> by_need;
    std::optional<domain::ClassificationMode> mode;
    for (const auto& label : labels) {
        domain::validate(label);
        if (!mode) mode = label.mode;
        if (*mode != label.mode)
            throw Error(ErrorCode::missing_label,
                        "labels mix classification modes");
        if (!by_need.emplace(label.need_id, &label).second)
            throw Error(ErrorCode::missing_label,
                        "need labeled more than once: " + label.need_id);
    }

    ReportResult result;
    result.report.run_id = manifest.run_id;
    result.report.mode = mode.value_or(domain::ClassificationMode::zero_shot);

    std::map<std::string, std::map<std::string, bool>> latent_by_agent_need;
    for (const auto& need : needs) {
        domain::validate(need);
        const auto it = by_need.find(need.id);
        if (it == by_need.end())
            throw Error(ErrorCode::missing_label, "no label for need: " + need.id);
        auto& entry = result.report.per_agent[need.agent_name];
        entry.needs.push_back(need);
        if (it->second->latent) ++entry.latent_count;
        latent_by_agent_need[need.agent_name][need.id] = it->second->latent;
        ++result.report.total_needs;
        if (it->second->latent) ++result.report.total_latent;
    }

    std::string doc;
    doc += "# Elicited Needs Report\n\n";
    doc += "- Run: " + manifest.run_id + "\n";
    doc += "- Provider: " + manifest.provider_id + "\n";
    doc += "- Seed: " + std::to_string(manifest.seed) + "\n";
    doc += "- Classification mode: " + domain::to_string(result.report.mode) + "\n";
    doc += "- Needs: " + std::to_string(result.report.total_needs) + " total, " +
           std::to_string(result.report.total_latent) + " latent\n\n";

    if (needs.empty()) {
        doc += "## Findings\n\nNo needs extracted.\n\n";
    } else {
        for (const auto& [agent, entry] : result.report.per_agent) {
            doc += "## Agent: " + agent + "\n\n";
            doc += std::to_string(entry.needs.size()) + " need(s), " +
                   std::to_string(entry.latent_count) + " latent.\n\n";
            for (const auto& need : entry.needs) {
                const bool latent = latent_by_agent_need[agent][need.id];
                doc += std::string("- ") + (latent ? "[LATENT] " : "") + need.text +
                       " *(from " + need.source_question_id + ")*\n";
                const auto label = by_need.at(need.id);
                if (label->reasoning)
                    doc += "  - reasoning: " + *label->reasoning + "\n";
            }
            doc += "\n";
        }
    }

    doc += "## Classification Criteria\n\n";
    doc += criteria_text.empty() ? std::string("(none: zero-shot classification)")
                                 : criteria_text;
    doc += "\n";

    result.markdown = std::move(doc);
    return result;
}

std::vector<domain::NeedStatement> dedup_needs(
    const std::vector<domain::NeedStatement>& needs) {
    std::set<std::string> seen;
    std::vector<domain::NeedStatement> out;
    for (const auto& need : needs)
        if (seen.insert(util::to_lower(util::trim(need.text))).second)
            out.push_back(need);
    return out;
}

} // namespace elicit::needs
