#pragma once

#include <memory>
#include <string>

#include "elicit/gateway.hpp"

namespace elicit::gw {

/// Chat-completions/embeddings client speaking the OpenAI-compatible REST
/// shape: POST {base_url}/chat/completions and {base_url}/embeddings with
/// bearer-token auth. base_url overrides support local inference servers.
class HttpProvider : public Provider {
public:
    explicit HttpProvider(ProviderConfig config);
    ~HttpProvider() override;

    std::string id() const override;
    ProviderChatResult chat(const ProviderChatCall& call) override;
    ProviderEmbedResult embed(const std::vector<std::string>& texts) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace elicit::gw
