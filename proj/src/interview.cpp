#include "elicit/interview.hpp"

#include "elicit/errors.hpp"
#include "elicit/experience.hpp"
#include "elicit/util.hpp"

#include <cstdio>
#include <set>

namespace elicit::interview {

void validate(const Question& question) {
    if (question.id.empty()) throw ValidationError("Question.id must be non-empty");
    if (question.text.empty()) throw ValidationError("Question.text must be non-empty");
    if (question.kind == domain::QuestionKind::categorical) {
        if (!question.category || question.category->empty())
            throw ValidationError("categorical Question requires a category");
        if (question.text.find(*question.category) == std::string::npos)
            throw ValidationError("categorical Question text must mention its category");
    } else if (question.category) {
        throw ValidationError("freestyle Question must not carry a category");
    }
}

nlohmann::json to_json(const Question& question) {
    validate(question);
    nlohmann::json j{{"id", question.id},
                     {"kind", domain::to_string(question.kind)},
                     {"text", question.text}};
    if (question.category) j["category"] = *question.category;
    return j;
}

Question question_from_json(const nlohmann::json& j) {
    Question q;
    q.id = j.at("id").get<std::string>();
    q.kind = domain::question_kind_from_string(j.at("kind").get<std::string>());
    if (j.contains("category")) q.category = j.at("category").get<std::string>();
    q.text = j.at("text").get<std::string>();
    validate(q);
    return q;
}

std::vector<Question> build_question_pool(const domain::DesignBrief& brief,
                                          bool include_freestyle,
                                          const prompts::PromptStore& store) {
    domain::validate(brief, /*categories_required=*/true);

    std::vector<Question> pool;
    int number = 1;
    char id[32];
    if (include_freestyle) {
        Question q;
        std::snprintf(id, sizeof(id), "q%02d-freestyle", number++);
        q.id = id;
        q.kind = domain::QuestionKind::freestyle;
        q.text = store.render("question_freestyle", {{"product", brief.product_name}});
        validate(q);
        pool.push_back(std::move(q));
    }
    for (const auto& category : brief.categories) {
        Question q;
        std::snprintf(id, sizeof(id), "q%02d-%s", number++, category.c_str());
        q.id = id;
        q.kind = domain::QuestionKind::categorical;
        q.category = category;
        q.text = store.render("question_categorical",
                              {{"product", brief.product_name}, {"category", category}});
        validate(q);
        pool.push_back(std::move(q));
    }

    std::set<std::string> ids;
    for (const auto& q : pool)
        if (!ids.insert(q.id).second)
            throw ValidationError("duplicate question id in pool: " + q.id);
    return pool;
}

domain::InterviewTranscript conduct_interview(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const domain::AgentProfile& agent, const domain::ProductExperience& experience,
    const std::vector<Question>& pool, const std::string& stage,
    const std::string& sort_key_prefix) {
    if (pool.empty()) throw ValidationError("conduct_interview requires questions");
    domain::validate(agent);
    domain::validate(experience);
    if (experience.agent_name != agent.name)
        throw ValidationError("experience does not belong to agent " + agent.name);

    const std::string system_text = store.render(
        "interview_system", {{"agent_name", agent.name},
                             {"agent_description", agent.description},
                             {"agent_reasoning", agent.reasoning},
                             {"experience", experience::render_steps(experience)}});

    domain::InterviewTranscript transcript;
    transcript.agent_name = agent.name;

    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& question = pool[i];
        validate(question);

        gw::ChatRequest chat;
        chat.stage = stage;
        char key[48];
        std::snprintf(key, sizeof(key), "%s.q%02zu", sort_key_prefix.c_str(), i);
        chat.sort_key = key;
        chat.system_text = system_text;
        for (const auto& qa : transcript.qas)
            chat.user_turns.push_back("Q: " + qa.question_text + "\nA: " + qa.answer_text);
        chat.user_turns.push_back("Q: " + question.text);
        chat.response_schema =
            schema::Schema::object({{"answer", schema::Schema::string()}});

        gw::StructuredResult result;
        try {
            result = gateway.chat_structured(chat);
        } catch (const SchemaExhausted& e) {
            transcript.complete = false;
            throw InterviewAborted("interview aborted at question " + question.id +
                                       ": " + e.what(),
                                   transcript);
        }

        domain::InterviewQA qa;
        qa.question_id = question.id;
        qa.question_text = question.text;
        qa.answer_text = result.record.at("answer").get<std::string>();
        qa.kind = question.kind;
        qa.category = question.category;
        domain::validate(qa);
        transcript.qas.push_back(std::move(qa));
    }

    domain::validate(transcript);
    return transcript;
}

} // namespace elicit::interview
