#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "elicit/domain.hpp"
#include "elicit/eval.hpp"
#include "elicit/gateway.hpp"
#include "elicit/interview.hpp"

namespace elicit::config {

using ConfigValue =
    std::variant<std::int64_t, double, bool, std::string, std::vector<std::string>>;

/// Flat dotted-key view of a TOML-style file: sections become key prefixes,
/// comments allowed, values are strings, numbers, booleans, or string arrays.
class KeyValues {
public:
    static KeyValues parse_file(const std::filesystem::path& path);
    static KeyValues parse_text(const std::string& text);

    /// Applies a "key=value" override (the --set flag); wins over file values.
    void set_override(const std::string& assignment);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_strings(const std::string& key,
                                         std::vector<std::string> fallback) const;

    const std::map<std::string, ConfigValue>& raw() const { return values_; }

private:
    std::map<std::string, ConfigValue> values_;
};

/// Fully resolved run settings. File contents referenced by the config
/// (criteria, steering, manual agents, question pool, prompt overrides) are
/// inlined at load time so a run directory replays without external files.
struct RunConfig {
    domain::DesignBrief brief;

    std::string provider_kind = "mock"; // mock | http
    gw::ProviderConfig provider;
    std::string api_key_env = "ELICIT_API_KEY";
    int mock_embedding_dim = 16;
    gw::RetryPolicy retry;

    std::string strategy = "serial"; // serial | parallel | parallel_filtered
    int n_agents = 20;
    double overgeneration_factor = 2.0;
    int serial_cap = 20;
    std::optional<std::string> steering_text;               // resolved text
    std::vector<std::pair<std::string, std::string>> manual_agents; // name, description

    int min_steps = 3;
    int max_steps = 6;

    bool include_freestyle = true;
    std::vector<interview::Question> question_pool; // empty -> built from brief

    domain::ClassificationMode mode = domain::ClassificationMode::criteria_cot;
    std::string criteria_text; // resolved; defaults to the builtin block
    bool dedup_needs = false;

    int hull_target_dim = 5;
    int k_max = 8;
    bool cluster_themes = true;

    eval::PricingModel pricing;

    std::int64_t seed = 0;
    int max_in_flight = 8;
    std::string run_id;                          // empty -> derived from brief+seed
    std::map<std::string, std::string> prompt_overrides;
    bool deterministic_timestamps = true;        // defaulted from provider kind

    std::string resolved_run_id() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
};

/// Builds a RunConfig from parsed key/values, loading any referenced files
/// relative to base_dir. Throws Error(ErrorCode::config) on bad settings.
RunConfig resolve(const KeyValues& kv, const std::filesystem::path& base_dir);

void validate(const RunConfig& config);

} // namespace elicit::config
