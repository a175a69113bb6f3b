#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "elicit/gateway.hpp"

namespace elicit::gw {

/// Offline provider for tests and dry runs. Chat responses are template-filled,
/// schema-valid, and a pure function of (seed, prompt text, variant, attempt),
/// so a fixed seed and prompt sequence replays bit-for-bit. Embeddings are a
/// hash-derived pure function of the text, mapped into a fixed-dim unit ball.
class MockProvider : public Provider {
public:
    struct RecordedCall {
        std::string system_text;
        std::vector<std::string> user_turns;
        double temperature = 0.0;
        std::uint64_t variant = 0;
        int attempt = 1;
        std::string response;
    };

    /// Inspects a call before the generator runs; returning a string serves it
    /// as the raw response. Used by tests to script content-exact replies.
    using Responder =
        std::function<std::optional<std::string>(const ProviderChatCall&)>;

    explicit MockProvider(std::uint64_t seed, std::vector<std::string> script = {},
                          int embedding_dim = 16);

    std::string id() const override { return "mock"; }
    ProviderChatResult chat(const ProviderChatCall& call) override;
    ProviderEmbedResult embed(const std::vector<std::string>& texts) override;

    void set_responder(Responder responder);
    std::vector<RecordedCall> recorded_calls() const;
    std::size_t chat_call_count() const;
    std::size_t embed_call_count() const;

    /// The deterministic embedding function, exposed for direct use in tests.
    static domain::EmbeddingVector embedding_for(const std::string& text, int dim);

private:
    std::uint64_t seed_;
    int embedding_dim_;
    std::vector<std::string> script_;
    std::size_t script_next_ = 0;
    Responder responder_;
    mutable std::mutex mutex_;
    std::vector<RecordedCall> calls_;
    std::size_t embed_calls_ = 0;

    std::string generate(const ProviderChatCall& call) const;
};

} // namespace elicit::gw
