#include "elicit/gateway.hpp"
#include "elicit/errors.hpp"
#include "elicit/http_provider.hpp"
#include "elicit/mock_provider.hpp"
#include "elicit/schema.hpp"

#include "helpers.hpp"

#include <doctest.h>
#include <httplib.h>

#include <thread>

using namespace elicit;
using test_helpers::make_rig;

namespace {

schema::Schema agent_schema() {
    return schema::Schema::object({{"name", schema::Schema::string()},
                                   {"description", schema::Schema::string()},
                                   {"reasoning", schema::Schema::string()}});
}

gw::ChatRequest simple_request(schema::Schema s = agent_schema()) {
    gw::ChatRequest request;
    request.stage = "test";
    request.sort_key = "0";
    request.system_text = "Produce a user agent for a tent study.";
    request.user_turns = {"Generate the agent now."};
    request.response_schema = std::move(s);
    return request;
}

} // namespace

TEST_CASE("schema validation catches shape violations") {
    const auto s = schema::Schema::object(
        {{"latent", schema::Schema::boolean()},
         {"tags", schema::Schema::array(schema::Schema::string(), 1, 3)}});

    CHECK(!s.validate(nlohmann::json{{"latent", true}, {"tags", {"a"}}}));
    CHECK(s.validate(nlohmann::json{{"latent", 1}, {"tags", {"a"}}}));       // wrong type
    CHECK(s.validate(nlohmann::json{{"tags", {"a"}}}));                      // missing field
    CHECK(s.validate(nlohmann::json{{"latent", true}, {"tags", nlohmann::json::array()}}));
    CHECK(s.validate(nlohmann::json{{"latent", true}, {"tags", {"a", "b", "c", "d"}}}));
    CHECK(s.validate(nlohmann::json{{"latent", true}, {"tags", {""}}}));     // empty string

    const auto e = schema::Schema::object(
        {{"kind", schema::Schema::string_enum({"red", "blue"})}});
    CHECK(!e.validate(nlohmann::json{{"kind", "red"}}));
    CHECK(e.validate(nlohmann::json{{"kind", "green"}}));
}

TEST_CASE("extract_json tolerates fences and prose") {
    CHECK(schema::extract_json("{\"a\": 1}"));
    CHECK(schema::extract_json("Sure! Here you go:\n```json\n{\"a\": 1}\n```\n"));
    CHECK(schema::extract_json("prefix {\"a\": [1, 2]} suffix"));
    CHECK(!schema::extract_json("no json here"));
    CHECK(!schema::extract_json("{broken"));
    const auto v = schema::extract_json("```json\n{\"a\": 3}\n```");
    REQUIRE(v);
    CHECK((*v)["a"] == 3);
}

TEST_CASE("mock returns a valid record on the first attempt") {
    auto rig = make_rig(7);
    const auto result = rig.gateway->chat_structured(simple_request());
    CHECK(result.exchange.attempts == 1);
    CHECK(!agent_schema().validate(result.record));
    CHECK(result.record.at("name").get<std::string>() != "");
}

TEST_CASE("mock determinism: same seed and prompts give identical outputs") {
    auto rig_a = make_rig(42);
    auto rig_b = make_rig(42);
    for (int i = 0; i < 5; ++i) {
        auto request = simple_request();
        request.variant = static_cast<std::uint64_t>(i);
        const auto a = rig_a.gateway->chat_structured(request);
        const auto b = rig_b.gateway->chat_structured(request);
        CHECK(a.exchange.raw_response == b.exchange.raw_response);
        CHECK(a.record == b.record);
    }
}

TEST_CASE("different seeds draw different names from the pool") {
    auto rig_a = make_rig(1);
    auto rig_b = make_rig(2);
    const auto a = rig_a.gateway->chat_structured(simple_request());
    const auto b = rig_b.gateway->chat_structured(simple_request());
    CHECK(a.record.at("name") != b.record.at("name"));
}

TEST_CASE("scripted malformed-then-valid response retries once and sums usage") {
    const std::string valid =
        R"({"name": "Scripted Scout", "description": "camps in storms", "reasoning": "edge case"})";
    auto rig = make_rig(7, {"this is not json", valid});

    const auto result = rig.gateway->chat_structured(simple_request());
    CHECK(result.exchange.attempts == 2);
    CHECK(result.record.at("name") == "Scripted Scout");

    // Usage accumulated over both attempts: more than the single valid body.
    const auto single = make_rig(7, {valid}).gateway->chat_structured(simple_request());
    CHECK(result.exchange.usage.output_tokens > single.exchange.usage.output_tokens);

    // The reprompt carried the validator's complaint as an extra user turn.
    const auto calls = rig.mock->recorded_calls();
    REQUIRE(calls.size() == 2);
    CHECK(calls[1].user_turns.size() == 2);
    CHECK(calls[1].user_turns[1].find("invalid") != std::string::npos);
}

TEST_CASE("three malformed responses exhaust the retry budget") {
    auto rig = make_rig(7, {"junk", "junk", "junk"});
    try {
        rig.gateway->chat_structured(simple_request());
        FAIL("expected SchemaExhausted");
    } catch (const SchemaExhausted& e) {
        CHECK(e.last_raw() == "junk");
        CHECK(rig.mock->chat_call_count() == 3);
    }
}

TEST_CASE("fail policy stops after the first schema violation") {
    auto rig = make_rig(7, {"junk", "would-be-valid"});
    gw::RetryPolicy policy;
    policy.max_attempts = 3;
    policy.on_schema_violation = gw::OnSchemaViolation::fail;
    gw::Gateway gateway(rig.mock, gw::ProviderConfig{}, policy);
    CHECK_THROWS_AS(gateway.chat_structured(simple_request()), SchemaExhausted);
    CHECK(rig.mock->chat_call_count() == 1);
}

TEST_CASE("cumulative usage reconciles with the ledger") {
    gw::BufferingLedger ledger(std::filesystem::temp_directory_path() /
                               "elicit-test-ledger.jsonl");
    auto rig = make_rig(7, {}, &ledger);
    gw::TokenUsage expected;
    for (int i = 0; i < 4; ++i) {
        auto request = simple_request();
        request.variant = static_cast<std::uint64_t>(i);
        expected += rig.gateway->chat_structured(request).exchange.usage;
    }
    rig.gateway->embed("test", "e", {"alpha", "beta"});

    const auto cumulative = rig.gateway->cumulative_usage();
    const auto ledger_total = ledger.total_usage();
    CHECK(cumulative.output_tokens == expected.output_tokens);
    CHECK(ledger_total.output_tokens == expected.output_tokens);
    CHECK(ledger_total.input_tokens == cumulative.input_tokens);
}

TEST_CASE("embed: order, dimension, and determinism") {
    auto rig = make_rig(7);
    const auto vectors =
        rig.gateway->embed("test", "e", {"one text", "another text", "one text"});
    REQUIRE(vectors.size() == 3);
    const auto dim = vectors[0].dim();
    for (const auto& v : vectors) CHECK(v.dim() == dim);
    CHECK(vectors[0].values == vectors[2].values); // identical text, identical vector
    CHECK(vectors[0].values != vectors[1].values);

    // Unit ball
    for (const auto& v : vectors) {
        double norm = 0.0;
        for (double x : v.values) norm += x * x;
        CHECK(std::sqrt(norm) <= 1.0 + 1e-12);
    }

    CHECK_THROWS_AS(rig.gateway->embed("test", "e", {}), ValidationError);
    CHECK_THROWS_AS(rig.gateway->embed("test", "e", {""}), ValidationError);
}

TEST_CASE("batched requests keep their submission order") {
    auto rig = make_rig(7);
    std::vector<gw::ChatRequest> requests;
    for (int i = 0; i < 12; ++i) {
        auto request = simple_request();
        request.variant = static_cast<std::uint64_t>(i);
        request.sort_key = std::to_string(i);
        requests.push_back(std::move(request));
    }
    const auto serial = rig.gateway->chat_structured_batch(requests, 1);
    const auto fanned = rig.gateway->chat_structured_batch(requests, 6);
    REQUIRE(serial.size() == fanned.size());
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i].record == fanned[i].record);
}

TEST_CASE("revalidating a returned record never fails") {
    auto rig = make_rig(11);
    const auto s = schema::Schema::object(
        {{"steps", schema::Schema::array(
                       schema::Schema::object({{"action", schema::Schema::string()},
                                               {"observation", schema::Schema::string()},
                                               {"challenge", schema::Schema::string()}}),
                       2, 4)}});
    for (int i = 0; i < 8; ++i) {
        auto request = simple_request(s);
        request.variant = static_cast<std::uint64_t>(i);
        const auto result = rig.gateway->chat_structured(request);
        CHECK(!s.validate(result.record));
        const auto n = result.record.at("steps").size();
        CHECK(n >= 2);
        CHECK(n <= 4);
    }
}

TEST_CASE("http provider speaks the chat-completions shape") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request& req,
                                           httplib::Response& res) {
        if (req.get_header_value("Authorization") != "Bearer sk-test") {
            res.status = 401;
            res.set_content("{}", "application/json");
            return;
        }
        const auto body = nlohmann::json::parse(req.body);
        REQUIRE(body.at("messages").size() >= 2);
        CHECK(body.at("messages")[0].at("role") == "system");
        const nlohmann::json reply{
            {"choices",
             {{{"message",
                {{"role", "assistant"},
                 {"content",
                  R"({"name": "HttpAgent", "description": "d", "reasoning": "r"})"}}}}}},
            {"usage", {{"prompt_tokens", 21}, {"completion_tokens", 9}}}};
        res.set_content(reply.dump(), "application/json");
    });
    server.Post("/v1/embeddings", [](const httplib::Request& req,
                                     httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        nlohmann::json data = nlohmann::json::array();
        for (std::size_t i = 0; i < body.at("input").size(); ++i)
            data.push_back({{"index", i},
                            {"embedding", {0.1 * static_cast<double>(i + 1), 0.2}}});
        res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    gw::ProviderConfig config;
    config.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    config.api_key = "sk-test";

    {
        auto provider = std::make_shared<gw::HttpProvider>(config);
        gw::Gateway gateway(provider, config, gw::RetryPolicy{});
        const auto result = gateway.chat_structured(simple_request());
        CHECK(result.record.at("name") == "HttpAgent");
        CHECK(result.exchange.usage.input_tokens == 21);
        CHECK(result.exchange.usage.output_tokens == 9);

        const auto vectors = gateway.embed("test", "e", {"a", "b"});
        REQUIRE(vectors.size() == 2);
        CHECK(vectors[1].values[0] == doctest::Approx(0.2));
    }

    {
        gw::ProviderConfig bad = config;
        bad.api_key = "wrong";
        auto provider = std::make_shared<gw::HttpProvider>(bad);
        gw::Gateway gateway(provider, bad, gw::RetryPolicy{});
        try {
            gateway.chat_structured(simple_request());
            FAIL("expected AuthRejected");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::auth_rejected);
        }
    }

    server.stop();
    server_thread.join();

    // A stopped server is unreachable.
    auto provider = std::make_shared<gw::HttpProvider>(config);
    gw::Gateway gateway(provider, config, gw::RetryPolicy{});
    try {
        gateway.chat_structured(simple_request());
        FAIL("expected ProviderUnreachable");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::provider_unreachable);
    }
}
