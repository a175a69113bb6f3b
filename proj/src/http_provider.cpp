#include "elicit/http_provider.hpp"

#include "elicit/errors.hpp"

#include <httplib.h>

namespace elicit::gw {

namespace {

struct ParsedUrl {
    std::string origin;      // scheme://host:port
    std::string path_prefix; // e.g. "/v1", may be empty
};

ParsedUrl parse_base_url(const std::string& base_url) {
    const auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("base_url must include a scheme: " + base_url);
    const auto path_start = base_url.find('/', scheme_end + 3);
    ParsedUrl parsed;
    if (path_start == std::string::npos) {
        parsed.origin = base_url;
    } else {
        parsed.origin = base_url.substr(0, path_start);
        parsed.path_prefix = base_url.substr(path_start);
        while (!parsed.path_prefix.empty() && parsed.path_prefix.back() == '/')
            parsed.path_prefix.pop_back();
    }
    return parsed;
}

} // namespace

struct HttpProvider::Impl {
    ProviderConfig config;
    ParsedUrl url;
    httplib::Client client;

    explicit Impl(ProviderConfig cfg)
        : config(std::move(cfg)), url(parse_base_url(config.base_url)), client(url.origin) {
        const auto seconds =
            std::max<long>(1, config.request_timeout.count() / 1000);
        client.set_connection_timeout(seconds, 0);
        client.set_read_timeout(seconds, 0);
        client.set_write_timeout(seconds, 0);
        if (!config.api_key.empty()) client.set_bearer_token_auth(config.api_key);
    }

    json post(const std::string& endpoint, const json& body) {
        const auto res = client.Post(url.path_prefix + endpoint, body.dump(),
                                     "application/json");
        if (!res)
            throw Error(ErrorCode::provider_unreachable,
                        "request to " + url.origin + endpoint + " failed: " +
                            httplib::to_string(res.error()));
        if (res->status == 401 || res->status == 403)
            throw Error(ErrorCode::auth_rejected,
                        "provider rejected credentials (HTTP " +
                            std::to_string(res->status) + ")");
        if (res->status < 200 || res->status >= 300)
            throw Error(ErrorCode::provider_unreachable,
                        "provider returned HTTP " + std::to_string(res->status) +
                            ": " + res->body);
        const auto parsed = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
        if (parsed.is_discarded())
            throw Error(ErrorCode::provider_unreachable,
                        "provider returned non-JSON body");
        return parsed;
    }
};

HttpProvider::HttpProvider(ProviderConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpProvider::~HttpProvider() = default;

std::string HttpProvider::id() const {
    return "http:" + impl_->config.chat_model;
}

ProviderChatResult HttpProvider::chat(const ProviderChatCall& call) {
    json messages = json::array();
    messages.push_back({{"role", "system"}, {"content", call.system_text}});
    for (const auto& turn : call.user_turns)
        messages.push_back({{"role", "user"}, {"content", turn}});

    const json body{{"model", impl_->config.chat_model},
                    {"messages", std::move(messages)},
                    {"temperature", call.temperature},
                    {"max_tokens", call.max_output_tokens}};

    const json response = impl_->post("/chat/completions", body);
    ProviderChatResult result;
    try {
        result.raw = response.at("choices").at(0).at("message").at("content")
                         .get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::provider_unreachable,
                    std::string("unexpected chat response shape: ") + e.what());
    }
    if (response.contains("usage")) {
        const auto& usage = response.at("usage");
        result.usage.input_tokens = usage.value("prompt_tokens", std::int64_t{0});
        result.usage.output_tokens = usage.value("completion_tokens", std::int64_t{0});
    } else {
        // Some compatible servers omit usage; approximate from lengths.
        std::size_t prompt_chars = call.system_text.size();
        for (const auto& t : call.user_turns) prompt_chars += t.size();
        result.usage.input_tokens = static_cast<std::int64_t>(prompt_chars / 4);
        result.usage.output_tokens = static_cast<std::int64_t>(result.raw.size() / 4);
    }
    return result;
}

ProviderEmbedResult HttpProvider::embed(const std::vector<std::string>& texts) {
    const json body{{"model", impl_->config.embedding_model}, {"input", texts}};
    const json response = impl_->post("/embeddings", body);

    ProviderEmbedResult result;
    result.vectors.resize(texts.size());
    try {
        for (const auto& item : response.at("data")) {
            const auto index = item.at("index").get<std::size_t>();
            if (index >= result.vectors.size())
                throw Error(ErrorCode::dimension_mismatch,
                            "embedding index out of range");
            result.vectors[index].values =
                item.at("embedding").get<std::vector<double>>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::provider_unreachable,
                    std::string("unexpected embeddings response shape: ") + e.what());
    }
    if (response.contains("usage")) {
        result.usage.input_tokens =
            response.at("usage").value("prompt_tokens", std::int64_t{0});
    } else {
        for (const auto& t : texts)
            result.usage.input_tokens += static_cast<std::int64_t>(t.size() / 4);
    }
    return result;
}

} // namespace elicit::gw
