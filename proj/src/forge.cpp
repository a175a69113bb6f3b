#include "elicit/forge.hpp"

#include "elicit/diversity/kernels.hpp"
#include "elicit/errors.hpp"
#include "elicit/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>

namespace elicit::forge {

namespace {

schema::Schema agent_object_schema() {
    return schema::Schema::object({{"name", schema::Schema::string()},
                                   {"description", schema::Schema::string()},
                                   {"reasoning", schema::Schema::string()}});
}

domain::AgentProfile profile_from_record(const gw::json& record,
                                         domain::AgentOrigin origin) {
    domain::AgentProfile agent;
    agent.name = util::trim(record.at("name").get<std::string>());
    agent.description = record.at("description").get<std::string>();
    agent.reasoning = record.at("reasoning").get<std::string>();
    agent.origin = origin;
    domain::validate(agent);
    return agent;
}

std::optional<std::string> first_duplicate_name(
    const std::vector<domain::AgentProfile>& agents) {
    std::set<std::string> seen;
    for (const auto& agent : agents)
        if (!seen.insert(agent.name).second) return agent.name;
    return std::nullopt;
}

} // namespace

std::string brief_block(const domain::DesignBrief& brief) {
    std::string block = brief.product_description;
    if (!brief.categories.empty()) {
        if (!block.empty()) block += "\n";
        block += "Relevant aspects: " + util::join(brief.categories, ", ") + ".";
    }
    return block;
}

std::vector<domain::AgentProfile> generate_serial(gw::Gateway& gateway,
                                                  const prompts::PromptStore& store,
                                                  const GenerationRequest& request,
                                                  const std::string& stage) {
    if (request.strategy != domain::AgentOrigin::serial)
        throw ValidationError("generate_serial requires strategy=serial");
    if (request.n < 1) throw ValidationError("generate_serial requires n >= 1");
    if (request.n > request.serial_cap)
        throw ValidationError("serial generation capped at " +
                              std::to_string(request.serial_cap) + " agents per call");
    domain::validate(request.brief);

    const std::string system_text = store.render(
        "agent_serial", {{"product", request.brief.product_name},
                         {"brief", brief_block(request.brief)},
                         {"n", std::to_string(request.n)},
                         {"steering", request.steering_text.value_or("")}});

    gw::ChatRequest chat;
    chat.stage = stage;
    chat.sort_key = "00.serial";
    chat.system_text = system_text;
    chat.user_turns = {"Generate the agents now."};
    chat.response_schema = schema::Schema::object(
        {{"agents", schema::Schema::array(agent_object_schema(), request.n, request.n)}});

    auto result = gateway.chat_structured(chat);
    auto to_profiles = [&](const gw::json& record) {
        std::vector<domain::AgentProfile> agents;
        for (const auto& item : record.at("agents"))
            agents.push_back(profile_from_record(item, domain::AgentOrigin::serial));
        return agents;
    };

    auto agents = to_profiles(result.record);
    if (auto dup = first_duplicate_name(agents)) {
        // One repair attempt: restate the uniqueness requirement with the
        // taken names, then give up.
        std::vector<std::string> names;
        for (const auto& agent : agents) names.push_back(agent.name);
        gw::ChatRequest repair = chat;
        repair.sort_key = "00.serial-repair";
        repair.variant = chat.variant + 1000000;
        repair.user_turns.push_back(
            "Your previous answer reused the name '" + *dup +
            "'. These names were used: " + util::join(names, ", ") +
            ". Generate " + std::to_string(request.n) +
            " agents again with strictly unique names.");
        agents = to_profiles(gateway.chat_structured(repair).record);
        if (auto still = first_duplicate_name(agents))
            throw Error(ErrorCode::duplicate_agent_names,
                        "duplicate agent name after reprompt: " + *still);
    }
    return agents;
}

std::vector<domain::AgentProfile> generate_parallel(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const GenerationRequest& request, std::size_t max_in_flight,
    double max_failure_fraction, const std::string& stage) {
    if (request.strategy != domain::AgentOrigin::parallel &&
        request.strategy != domain::AgentOrigin::parallel_filtered)
        throw ValidationError("generate_parallel requires a parallel strategy");
    if (request.n < 1) throw ValidationError("generate_parallel requires n >= 1");
    const bool filtered = request.strategy == domain::AgentOrigin::parallel_filtered;
    if (filtered != request.overgeneration_factor.has_value())
        throw ValidationError(
            "overgeneration_factor must be present exactly when strategy=parallel_filtered");
    double factor = request.overgeneration_factor.value_or(1.0);
    if (factor < 1.0) throw ValidationError("overgeneration_factor must be >= 1");
    domain::validate(request.brief);

    const auto slots = static_cast<std::size_t>(
        std::ceil(static_cast<double>(request.n) * factor));

    const std::string system_text = store.render(
        "agent_parallel", {{"product", request.brief.product_name},
                           {"brief", brief_block(request.brief)},
                           {"steering", request.steering_text.value_or("")}});

    struct SlotOutcome {
        std::optional<domain::AgentProfile> agent;
    };
    std::vector<gw::ChatRequest> requests(slots);
    for (std::size_t i = 0; i < slots; ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "00.slot%03zu", i);
        requests[i].stage = stage;
        requests[i].sort_key = key;
        requests[i].system_text = system_text;
        requests[i].user_turns = {"Generate the agent now."};
        requests[i].response_schema = agent_object_schema();
        requests[i].variant = i;
    }

    std::function<SlotOutcome(std::size_t)> task = [&](std::size_t i) -> SlotOutcome {
        try {
            return {profile_from_record(gateway.chat_structured(requests[i]).record,
                                        domain::AgentOrigin::parallel)};
        } catch (const SchemaExhausted&) {
            return {std::nullopt}; // this slot is lost; tolerated up to the cap
        }
    };
    const auto outcomes =
        util::parallel_map<SlotOutcome>(slots, max_in_flight, task);

    std::vector<domain::AgentProfile> agents;
    std::size_t failures = 0;
    for (const auto& outcome : outcomes) {
        if (outcome.agent)
            agents.push_back(*outcome.agent);
        else
            ++failures;
    }
    if (static_cast<double>(failures) >
        max_failure_fraction * static_cast<double>(slots))
        throw Error(ErrorCode::schema_exhausted,
                    std::to_string(failures) + " of " + std::to_string(slots) +
                        " parallel generation slots failed");
    domain::validate_agent_set(agents);
    return agents;
}

SelectDiverseResult select_diverse(const std::vector<domain::AgentProfile>& agents,
                                   const std::vector<domain::EmbeddingVector>& embeddings,
                                   int k, std::int64_t seed) {
    if (agents.size() != embeddings.size())
        throw ValidationError("select_diverse: agents/embeddings size mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > agents.size())
        throw ValidationError("select_diverse requires 1 <= k <= len(agents)");

    SelectDiverseResult result;
    result.assignment = diversity::kmeans(embeddings, k, seed);

    for (int c = 0; c < k; ++c) {
        std::size_t best_index = agents.size();
        double best_dist = 0.0;
        for (std::size_t i = 0; i < agents.size(); ++i) {
            if (result.assignment.labels[i] != c) continue;
            const double d = diversity::kernels::squared_distance(
                embeddings[i].values,
                result.assignment.centroids[static_cast<std::size_t>(c)].values);
            if (best_index == agents.size() || d < best_dist) {
                best_index = i;
                best_dist = d;
            }
        }
        if (best_index == agents.size())
            throw Error(ErrorCode::degenerate_clustering,
                        "select_diverse: empty cluster " + std::to_string(c));
        domain::AgentProfile representative = agents[best_index];
        representative.origin = domain::AgentOrigin::parallel_filtered;
        result.selected.push_back(std::move(representative));
        result.selected_indices.push_back(best_index);
    }
    domain::validate_agent_set(result.selected);
    return result;
}

std::vector<domain::AgentProfile> inject_manual(
    const domain::DesignBrief& brief,
    const std::vector<std::pair<std::string, std::string>>& entries) {
    domain::validate(brief);
    if (entries.empty()) throw ValidationError("inject_manual requires entries");

    std::vector<domain::AgentProfile> agents;
    agents.reserve(entries.size());
    for (const auto& [name, description] : entries) {
        domain::AgentProfile agent;
        agent.name = name;
        agent.description = description;
        agent.reasoning = "manually specified empathic lead user";
        agent.origin = domain::AgentOrigin::manual;
        domain::validate(agent);
        agents.push_back(std::move(agent));
    }
    domain::validate_agent_set(agents);
    return agents;
}

} // namespace elicit::forge
