#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elicit/domain.hpp"
#include "elicit/errors.hpp"
#include "elicit/gateway.hpp"
#include "elicit/prompts.hpp"

namespace elicit::interview {

struct Question {
    std::string id;
    domain::QuestionKind kind = domain::QuestionKind::freestyle;
    std::optional<std::string> category;
    std::string text;
};

void validate(const Question& question);
nlohmann::json to_json(const Question& question);
Question question_from_json(const nlohmann::json& j);

/// Optional freestyle question first, then one categorical question per brief
/// category in brief order, instantiated from the templates.
std::vector<Question> build_question_pool(const domain::DesignBrief& brief,
                                          bool include_freestyle,
                                          const prompts::PromptStore& store);

/// Thrown when a question call exhausts its retries mid-interview; carries the
/// partial transcript (flagged incomplete) for persistence.
class InterviewAborted : public Error {
public:
    InterviewAborted(std::string message, domain::InterviewTranscript partial)
        : Error(ErrorCode::schema_exhausted, std::move(message)),
          partial_(std::move(partial)) {}

    const domain::InterviewTranscript& partial() const { return partial_; }

private:
    domain::InterviewTranscript partial_;
};

/// Asks the pool strictly in order, one chat call per question. Every call
/// carries the agent persona, the full experience steps, and all prior Q&A of
/// this interview, in that order.
domain::InterviewTranscript conduct_interview(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const domain::AgentProfile& agent, const domain::ProductExperience& experience,
    const std::vector<Question>& pool, const std::string& stage = "interviews",
    const std::string& sort_key_prefix = "000");

} // namespace elicit::interview
