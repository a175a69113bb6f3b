#pragma once

#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/prompts.hpp"

namespace elicit::experience {

/// One role-playing chat call eliciting the agent's simulated interaction as
/// action/observation/challenge steps, with the step count bounded to
/// [min_steps, max_steps].
domain::ProductExperience simulate_experience(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const domain::DesignBrief& brief, const domain::AgentProfile& agent,
    int min_steps, int max_steps, const std::string& stage = "experiences",
    const std::string& sort_key = "000");

/// Plain-text rendering of the steps, used as interview context.
std::string render_steps(const domain::ProductExperience& experience);

} // namespace elicit::experience
