#pragma once

#include <optional>
#include <string>
#include <vector>

#include "elicit/diversity/metrics.hpp"
#include "elicit/domain.hpp"
#include "elicit/gateway.hpp"
#include "elicit/prompts.hpp"

namespace elicit::forge {

struct GenerationRequest {
    domain::DesignBrief brief;
    int n = 20;
    domain::AgentOrigin strategy = domain::AgentOrigin::serial;
    std::optional<std::string> steering_text;
    std::optional<double> overgeneration_factor; // required iff parallel_filtered
    std::int64_t seed = 0;
    int serial_cap = 20;
};

/// One chat call producing all n agents; later agents see the earlier ones as
/// context. Duplicate names get a single reprompt listing the taken names,
/// then the run fails rather than silently renaming.
std::vector<domain::AgentProfile> generate_serial(gw::Gateway& gateway,
                                                  const prompts::PromptStore& store,
                                                  const GenerationRequest& request,
                                                  const std::string& stage = "agents");

/// ceil(n * overgeneration_factor) independent single-agent calls (factor 1
/// for plain parallel), fanned out up to max_in_flight at a time. Slots that
/// exhaust their retries are dropped; if more than max_failure_fraction of
/// slots fail the whole generation fails.
std::vector<domain::AgentProfile> generate_parallel(
    gw::Gateway& gateway, const prompts::PromptStore& store,
    const GenerationRequest& request, std::size_t max_in_flight,
    double max_failure_fraction = 0.10, const std::string& stage = "agents");

struct SelectDiverseResult {
    std::vector<domain::AgentProfile> selected; // one per cluster, cluster order
    std::vector<std::size_t> selected_indices;  // into the input agent list
    diversity::ClusterAssignment assignment;
};

/// KMeans over description embeddings, then one representative per cluster:
/// the member nearest its centroid, ties to the lowest input index. Origins
/// are rewritten to parallel_filtered.
SelectDiverseResult select_diverse(const std::vector<domain::AgentProfile>& agents,
                                   const std::vector<domain::EmbeddingVector>& embeddings,
                                   int k, std::int64_t seed);

/// Hand-authored empathic-lead-user agents from (name, description) pairs.
std::vector<domain::AgentProfile> inject_manual(
    const domain::DesignBrief& brief,
    const std::vector<std::pair<std::string, std::string>>& entries);

/// Brief text block shared by the generation prompts.
std::string brief_block(const domain::DesignBrief& brief);

} // namespace elicit::forge
