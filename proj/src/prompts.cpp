#include "elicit/prompts.hpp"

#include "elicit/errors.hpp"
#include "elicit/util.hpp"

namespace elicit::prompts {

namespace {

const std::map<std::string, std::string>& builtin_texts() {
    static const std::map<std::string, std::string> texts = {
        {"agent_serial",
         R"(You are generating simulated users for a requirements elicitation study.

Product: {product}
{brief}

Create {n} distinct user agents. For each agent provide:
- name: a short label representing the user agent
- description: a description of the user characteristics
- reasoning: a rationale for creating this agent

Earlier agents in your answer are context for the later ones; use that context to avoid repeating user types and make the set as diverse as possible.
{steering})"},
        {"agent_parallel",
         R"(You are generating a simulated user for a requirements elicitation study.

Product: {product}
{brief}

Create one user agent with:
- name: a short label representing the user agent
- description: a description of the user characteristics
- reasoning: a rationale for creating this agent
{steering})"},
        {"steering",
         R"(You must create non-typical users based on the following description of a typical user: "{typical_user}")"},
        {"experience",
         R"(You are role-playing the following simulated user.

Name: {agent_name}
Description: {agent_description}
Reasoning: {agent_reasoning}

Product: {product}
{brief}

Describe the steps you would take to interact with this product, from first contact through putting it away. For each step provide:
- action: the description of the interaction step taken
- observation: your reactions and perceptions of the step, including both favorable impressions and points of friction
- challenge: explicit articulation of obstacles or difficulties encountered

Report between {min_steps} and {max_steps} steps and include at least one concrete challenge in every step.)"},
        {"interview_system",
         R"(You are role-playing the following simulated user in a product interview.

Name: {agent_name}
Description: {agent_description}
Reasoning: {agent_reasoning}

Your simulated experience with the product:
{experience}

Answer each interview question in character, grounded in the specific experience above. Be concrete about your needs and any innovative insights.)"},
        {"question_freestyle",
         "If you were to purchase an ideal {product}, what main characteristics "
         "would you look for?"},
        {"question_categorical",
         "Focusing specifically on the {category} aspect of {product}, can you "
         "tell me your needs and any innovative insights to address those needs?"},
        {"needs_extract",
         R"(You extract user needs from interview answers about the following product.

Product: {product}

Given one interview question and the user's answer, list every distinct need the answer expresses. State each need as one self-contained sentence. If the answer expresses no needs, return an empty list.)"},
        {"classify_zero_shot",
         "You label customer needs with a binary verdict."},
        {"classify_criteria",
         "You label customer needs with a binary verdict, strictly following "
         "the criteria you are given."},
        {"classify_criteria_cot",
         "You label customer needs with a binary verdict, strictly following "
         "the criteria you are given. Think step by step: write out your "
         "analysis of the need against each criterion in the reasoning field "
         "before you state the verdict."},
    };
    return texts;
}

} // namespace

const PromptStore& PromptStore::builtin() {
    static const PromptStore store = [] {
        PromptStore s;
        s.texts_ = builtin_texts();
        return s;
    }();
    return store;
}

PromptStore PromptStore::with_overrides(const std::filesystem::path& dir) {
    PromptStore store = builtin();
    for (auto& [name, text] : store.texts_) {
        const auto path = dir / (name + ".txt");
        if (std::filesystem::exists(path)) text = util::read_file(path);
    }
    return store;
}

PromptStore PromptStore::from_map(std::map<std::string, std::string> texts) {
    PromptStore store = builtin();
    for (auto& [name, text] : texts) store.texts_[name] = std::move(text);
    return store;
}

const std::string& PromptStore::get(const std::string& name) const {
    const auto it = texts_.find(name);
    if (it == texts_.end())
        throw Error(ErrorCode::config, "unknown prompt template: " + name);
    return it->second;
}

bool PromptStore::has(const std::string& name) const {
    return texts_.find(name) != texts_.end();
}

std::string PromptStore::render(
    const std::string& name,
    const std::vector<std::pair<std::string, std::string>>& values) const {
    return util::fill_placeholders(get(name), values);
}

const std::string& default_latent_criteria() {
    static const std::string criteria =
        R"(Label the reported customer need as a latent need (latent = True) if either of the following conditions is met:
1. The need represents a significant change to the product design and does not fall into any of the following categories: size, shape, weight, material, safety, durability, aesthetics, ergonomics, cost, setup, or transport.
2. The need reflects an exceptionally innovative and clearly expressed insight regarding the product and/or how it is used.)";
    return criteria;
}

} // namespace elicit::prompts
