#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "elicit/domain.hpp"
#include "elicit/schema.hpp"

namespace elicit::gw {

using json = nlohmann::json;

struct ProviderConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string chat_model = "gpt-4-turbo";
    std::string embedding_model = "text-embedding-ada-002";
    double temperature = 1.0;
    int max_output_tokens = 4096;
    std::chrono::milliseconds request_timeout{60000};
};

enum class OnSchemaViolation { reprompt_with_error, fail };

struct RetryPolicy {
    int max_attempts = 3;
    OnSchemaViolation on_schema_violation = OnSchemaViolation::reprompt_with_error;
    std::vector<std::chrono::milliseconds> backoff;
};

struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
};

/// One logical structured-chat exchange, including all retry attempts.
struct ChatExchange {
    std::string system_text;
    std::vector<std::string> user_turns;
    std::string raw_response; // last raw body received
    TokenUsage usage;         // cumulative across attempts
    int attempts = 0;
};

/// Raw provider call. `variant` is a decorrelation ordinal assigned at
/// submission time so independent calls with identical prompts (parallel
/// generation) stay distinguishable and runs stay replay-deterministic.
struct ProviderChatCall {
    std::string system_text;
    std::vector<std::string> user_turns;
    double temperature = 1.0;
    int max_output_tokens = 4096;
    std::uint64_t variant = 0;
    int attempt = 1;
    const schema::Schema* response_schema = nullptr;
};

struct ProviderChatResult {
    std::string raw;
    TokenUsage usage;
};

struct ProviderEmbedResult {
    std::vector<domain::EmbeddingVector> vectors;
    TokenUsage usage;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string id() const = 0;
    virtual ProviderChatResult chat(const ProviderChatCall& call) = 0;
    virtual ProviderEmbedResult embed(const std::vector<std::string>& texts) = 0;
};

/// One ledger row per logical exchange. `sort_key` orders rows
/// deterministically within a stage regardless of completion order.
struct LedgerEntry {
    std::string stage;
    std::string sort_key;
    std::string kind; // "chat" | "embed"
    std::string prompt_hash;
    std::string model;
    int attempts = 1;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    json to_json() const;
    static LedgerEntry from_json(const json& j);
};

class LedgerSink {
public:
    virtual ~LedgerSink() = default;
    virtual void append(LedgerEntry entry) = 0;
};

/// Collects entries in memory; flush() writes them to the jsonl file sorted by
/// (stage, sort_key) so concurrent stages produce byte-stable ledgers.
class BufferingLedger : public LedgerSink {
public:
    explicit BufferingLedger(std::filesystem::path path);

    void append(LedgerEntry entry) override;
    void flush();
    TokenUsage total_usage() const;
    std::vector<LedgerEntry> entries() const;

    static std::vector<LedgerEntry> read_all(const std::filesystem::path& path);

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::vector<LedgerEntry> pending_;
    std::vector<LedgerEntry> written_;
};

struct ChatRequest {
    std::string stage;
    std::string sort_key;
    std::string system_text;
    std::vector<std::string> user_turns;
    schema::Schema response_schema = schema::Schema::object({});
    std::optional<double> temperature; // default: ProviderConfig.temperature
    std::uint64_t variant = 0;
};

struct StructuredResult {
    json record;
    ChatExchange exchange;
};

/// Single seam between the engine and any chat/embedding provider. Renders
/// the response schema into the system text, validates every response, and
/// retries per policy, appending the validator's error as an extra user turn.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, ProviderConfig config,
            RetryPolicy policy, LedgerSink* ledger = nullptr);

    StructuredResult chat_structured(const ChatRequest& request);

    /// Independent requests fanned out over at most max_in_flight threads;
    /// results come back in request order.
    std::vector<StructuredResult> chat_structured_batch(
        std::vector<ChatRequest> requests, std::size_t max_in_flight);

    std::vector<domain::EmbeddingVector> embed(const std::string& stage,
                                               const std::string& sort_key,
                                               const std::vector<std::string>& texts);

    TokenUsage cumulative_usage() const;
    const ProviderConfig& config() const { return config_; }
    const RetryPolicy& policy() const { return policy_; }
    Provider& provider() { return *provider_; }

private:
    std::shared_ptr<Provider> provider_;
    ProviderConfig config_;
    RetryPolicy policy_;
    LedgerSink* ledger_;
    mutable std::mutex usage_mutex_;
    TokenUsage cumulative_;

    void add_usage(const TokenUsage& usage);
};

} // namespace elicit::gw
