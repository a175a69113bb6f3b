#include "elicit/experience.hpp"

#include "elicit/errors.hpp"

namespace elicit::experience {

domain::ProductExperience simulate_experience(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const domain::DesignBrief& brief, const domain::AgentProfile& agent,
    int min_steps, int max_steps, const std::string& stage,
    const std::string& sort_key) {
    if (min_steps < 1 || min_steps > max_steps)
        throw ValidationError("simulate_experience requires 1 <= min_steps <= max_steps");
    domain::validate(agent);
    domain::validate(brief);

    std::string brief_text = brief.product_description;

    gw::ChatRequest chat;
    chat.stage = stage;
    chat.sort_key = sort_key;
    chat.system_text = store.render(
        "experience", {{"agent_name", agent.name},
                       {"agent_description", agent.description},
                       {"agent_reasoning", agent.reasoning},
                       {"product", brief.product_name},
                       {"brief", brief_text},
                       {"min_steps", std::to_string(min_steps)},
                       {"max_steps", std::to_string(max_steps)}});
    chat.user_turns = {"Describe your interaction with the product now."};
    chat.response_schema = schema::Schema::object(
        {{"steps",
          schema::Schema::array(
              schema::Schema::object({{"action", schema::Schema::string()},
                                      {"observation", schema::Schema::string()},
                                      {"challenge", schema::Schema::string()}}),
              min_steps, max_steps)}});

    const auto result = gateway.chat_structured(chat);

    domain::ProductExperience experience;
    experience.agent_name = agent.name;
    int index = 1;
    for (const auto& item : result.record.at("steps")) {
        domain::ExperienceStep step;
        step.index = index++;
        step.action = item.at("action").get<std::string>();
        step.observation = item.at("observation").get<std::string>();
        step.challenge = item.at("challenge").get<std::string>();
        experience.steps.push_back(std::move(step));
    }
    // The schema bounds the count; this guard keeps the contract explicit.
    const auto count = static_cast<int>(experience.steps.size());
    if (count < min_steps || count > max_steps)
        throw Error(ErrorCode::step_count_out_of_range,
                    "experience returned " + std::to_string(count) + " steps");
    domain::validate(experience);
    return experience;
}

std::string render_steps(const domain::ProductExperience& experience) {
    std::string out;
    for (const auto& step : experience.steps) {
        out += "Step " + std::to_string(step.index) + ":\n";
        out += "- Action: " + step.action + "\n";
        out += "- Observation: " + step.observation + "\n";
        out += "- Challenge: " + step.challenge + "\n";
    }
    return out;
}

} // namespace elicit::experience
