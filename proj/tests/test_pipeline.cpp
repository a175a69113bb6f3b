#include "elicit/config.hpp"
#include "elicit/errors.hpp"
#include "elicit/mock_provider.hpp"
#include "elicit/pipeline.hpp"
#include "elicit/util.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace elicit;
using test_helpers::small_mock_config;
using test_helpers::TempDir;

namespace {

std::shared_ptr<gw::MockProvider> mock_for(const config::RunConfig& cfg) {
    return std::make_shared<gw::MockProvider>(static_cast<std::uint64_t>(cfg.seed),
                                              std::vector<std::string>{},
                                              cfg.mock_embedding_dim);
}

} // namespace

TEST_CASE("config file parsing with sections, arrays, and overrides") {
    const std::string text = R"(
# a comment
seed = 42
[brief]
product_name = "tent"
categories = ["size", "shape"]   # inline comment
[generation]
strategy = "serial"
n = 4
[provider]
kind = "mock"
temperature = 0.5
[needs]
mode = "criteria"
)";
    auto kv = config::KeyValues::parse_text(text);
    CHECK(kv.get_int("seed", 0) == 42);
    CHECK(kv.get_string("brief.product_name", "") == "tent");
    CHECK(kv.get_strings("brief.categories", {}) ==
          std::vector<std::string>{"size", "shape"});
    CHECK(kv.get_double("provider.temperature", 0.0) == doctest::Approx(0.5));

    kv.set_override("generation.n=9");
    kv.set_override("brief.product_name=\"lantern\"");
    const auto cfg = config::resolve(kv, ".");
    CHECK(cfg.n_agents == 9);
    CHECK(cfg.brief.product_name == "lantern");
    CHECK(cfg.mode == domain::ClassificationMode::criteria);
    CHECK(cfg.criteria_text == prompts::default_latent_criteria());
    CHECK(cfg.deterministic_timestamps); // mock default

    CHECK_THROWS_AS(config::KeyValues::parse_text("oops"), Error);
    try {
        config::KeyValues bad;
        bad.set_override("no_equals");
        FAIL("expected config error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::config);
    }
}

TEST_CASE("run config round-trips through json") {
    auto cfg = small_mock_config(4, 11);
    cfg.steering_text = "steer this way";
    cfg.manual_agents = {{"Hunter", "sets up in the dark"}};
    cfg.prompt_overrides["classify_zero_shot"] = "custom text";
    const auto back = config::RunConfig::from_json(cfg.to_json());
    CHECK(back.brief.product_name == cfg.brief.product_name);
    CHECK(back.seed == cfg.seed);
    CHECK(back.steering_text == cfg.steering_text);
    CHECK(back.manual_agents == cfg.manual_agents);
    CHECK(back.mode == cfg.mode);
    CHECK(back.prompt_overrides.at("classify_zero_shot") == "custom text");
    CHECK(back.resolved_run_id() == cfg.resolved_run_id());
}

TEST_CASE("full mock pipeline produces the staged artifacts") {
    TempDir dir("pipeline");
    const auto cfg = small_mock_config(3, 7);

    std::vector<std::string> completed;
    pipeline::Runner runner(cfg, dir.path(), mock_for(cfg));
    runner.set_stage_callback([&](const std::string& stage) {
        completed.push_back(stage);
        // stage-order invariant holds at every flush
        CHECK_NOTHROW(domain::validate(pipeline::Runner::read_manifest(dir.path())));
    });
    runner.run_all();

    CHECK(completed == domain::stage_order());
    for (const auto& file :
         {"agents.json", "experiences.json", "interviews.json", "needs.json",
          "metrics.json", "report.md", "report.json", "questions.json",
          "manifest.json", "config.json", "calls.ledger.jsonl",
          "silhouette_vs_k.csv", "projection_2d.csv"})
        CHECK(std::filesystem::exists(dir.path() / file));

    const auto agents = runner.load_agents();
    CHECK(agents.size() == 3);
    const auto transcripts = runner.load_transcripts();
    REQUIRE(transcripts.size() == 3);
    for (const auto& t : transcripts) CHECK(t.qas.size() == 12);

    // Lock released after the run.
    CHECK(!std::filesystem::exists(dir.path() / "run.lock"));
}

TEST_CASE("interview failure halts the run with a resumable manifest") {
    TempDir dir("halt");
    const auto cfg = small_mock_config(3, 7);
    auto mock = mock_for(cfg);
    // Interview answers have an "answer" field; break every interview call.
    mock->set_responder([](const gw::ProviderChatCall& call)
                            -> std::optional<std::string> {
        if (call.response_schema &&
            call.system_text.find("product interview") != std::string::npos)
            return "broken";
        return std::nullopt;
    });

    pipeline::Runner runner(cfg, dir.path(), mock);
    CHECK_THROWS_AS(runner.run_all(), Error);

    const auto manifest = pipeline::Runner::read_manifest(dir.path());
    CHECK(manifest.stage_status.at("agents") == domain::StageStatus::done);
    CHECK(manifest.stage_status.at("experiences") == domain::StageStatus::done);
    CHECK(manifest.stage_status.at("interviews") == domain::StageStatus::pending);
    CHECK(manifest.stage_status.at("needs") == domain::StageStatus::pending);

    // Partial transcripts persisted, flagged incomplete.
    const auto interviews =
        nlohmann::json::parse(util::read_file(dir.path() / "interviews.json"));
    REQUIRE(interviews.size() == 3);
    for (const auto& t : interviews) CHECK(t.at("complete") == false);

    // Artifacts of completed stages remain valid and loadable.
    CHECK(runner.load_agents().size() == 3);
    CHECK(runner.load_experiences().size() == 3);
}

TEST_CASE("resume continues without re-invoking completed stages") {
    TempDir dir("resume");
    const auto cfg = small_mock_config(3, 7);

    {
        auto mock = mock_for(cfg);
        mock->set_responder([](const gw::ProviderChatCall& call)
                                -> std::optional<std::string> {
            if (call.system_text.find("product interview") != std::string::npos)
                return "broken";
            return std::nullopt;
        });
        pipeline::Runner runner(cfg, dir.path(), mock);
        CHECK_THROWS_AS(runner.run_all(), Error);
    }

    auto fresh_mock = mock_for(cfg);
    auto resumed = pipeline::Runner::open(dir.path(), fresh_mock);
    resumed.run_all();

    const auto manifest = pipeline::Runner::read_manifest(dir.path());
    for (const auto& stage : domain::stage_order())
        CHECK(manifest.stage_status.at(stage) == domain::StageStatus::done);

    // The resumed provider saw zero agent/experience chat calls.
    for (const auto& call : fresh_mock->recorded_calls()) {
        CHECK(call.system_text.find("generating simulated users") == std::string::npos);
        CHECK(call.system_text.find("Describe the steps") == std::string::npos);
    }
    // Ledger reflects both the failed and the resumed run.
    const auto entries =
        gw::BufferingLedger::read_all(dir.path() / "calls.ledger.jsonl");
    std::size_t agent_calls = 0;
    for (const auto& entry : entries)
        if (entry.stage == "agents") ++agent_calls;
    CHECK(agent_calls == 1); // only from the first run

    // Resuming a finished run is a no-op.
    auto noop_mock = mock_for(cfg);
    auto noop = pipeline::Runner::open(dir.path(), noop_mock);
    noop.run_all();
    CHECK(noop_mock->chat_call_count() == 0);
}

TEST_CASE("tampered artifacts are rejected at open") {
    TempDir dir("tamper");
    const auto cfg = small_mock_config(3, 7);
    pipeline::Runner(cfg, dir.path(), mock_for(cfg)).run_all();

    auto tampered = nlohmann::json::parse(util::read_file(dir.path() / "agents.json"));
    tampered[0]["description"] = "edited by hand";
    util::write_file(dir.path() / "agents.json", tampered.dump(2) + "\n");

    try {
        pipeline::Runner::open(dir.path(), mock_for(cfg));
        FAIL("expected ArtifactHashMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::artifact_hash_mismatch);
    }
}

TEST_CASE("corrupt manifest is rejected at open") {
    TempDir dir("corrupt");
    const auto cfg = small_mock_config(3, 7);
    pipeline::Runner(cfg, dir.path(), mock_for(cfg)).run_all();

    util::write_file(dir.path() / "manifest.json", "{not json");
    try {
        pipeline::Runner::open(dir.path(), mock_for(cfg));
        FAIL("expected CorruptManifest");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::corrupt_manifest);
    }
}

TEST_CASE("single-stage commands enforce ordering and idempotence") {
    TempDir dir("stages");
    const auto cfg = small_mock_config(3, 7);

    {
        pipeline::Runner runner(cfg, dir.path(), mock_for(cfg));
        try {
            runner.run_stage("needs");
            FAIL("expected MissingPriorStage");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::missing_prior_stage);
        }
        CHECK(runner.run_stage("agents"));
    }

    auto mock = mock_for(cfg);
    auto runner = pipeline::Runner::open(dir.path(), mock);
    CHECK(!runner.run_stage("agents")); // already done: no-op
    CHECK(mock->chat_call_count() == 0);
    CHECK(runner.run_stage("agents", /*force=*/true));
    CHECK(mock->chat_call_count() > 0);
}

TEST_CASE("manual strategy runs the ELU roster through the pipeline") {
    TempDir dir("manual");
    auto cfg = small_mock_config(3, 7);
    cfg.strategy = "manual";
    cfg.manual_agents = {{"Hunter", "sets up a tent in the dark"},
                         {"Visually impaired", "navigates camp by touch"},
                         {"Beach camper", "camps on loose sand"}};

    pipeline::Runner runner(cfg, dir.path(), mock_for(cfg));
    runner.run_all();
    const auto agents = runner.load_agents();
    REQUIRE(agents.size() == 3);
    for (const auto& agent : agents) {
        CHECK(agent.origin == domain::AgentOrigin::manual);
        CHECK(agent.reasoning == "manually specified empathic lead user");
    }
}

TEST_CASE("parallel_filtered strategy embeds and selects in the agents stage") {
    TempDir dir("filtered");
    auto cfg = small_mock_config(4, 7);
    cfg.strategy = "parallel_filtered";
    cfg.overgeneration_factor = 2.0;

    auto mock = mock_for(cfg);
    pipeline::Runner runner(cfg, dir.path(), mock);
    CHECK(runner.run_stage("agents"));
    const auto agents = runner.load_agents();
    CHECK(agents.size() == 4);
    for (const auto& agent : agents)
        CHECK(agent.origin == domain::AgentOrigin::parallel_filtered);
    CHECK(mock->chat_call_count() == 8); // ceil(4 * 2.0) candidate calls
    CHECK(mock->embed_call_count() == 1);
}

TEST_CASE("run directory cannot be initialized twice") {
    TempDir dir("reinit");
    const auto cfg = small_mock_config(3, 7);
    pipeline::Runner first(cfg, dir.path(), mock_for(cfg));
    CHECK_THROWS_AS(pipeline::Runner(cfg, dir.path(), mock_for(cfg)), Error);
}

TEST_CASE("prompt assets on disk mirror the builtin templates") {
    const auto dir = std::filesystem::path(ELICIT_SOURCE_DIR) / "assets" / "prompts";
    const auto& store = prompts::PromptStore::builtin();
    for (const auto& [name, text] : store.all()) {
        const auto path = dir / (name + ".txt");
        REQUIRE_MESSAGE(std::filesystem::exists(path), name);
        CHECK_MESSAGE(util::read_file(path) == text, name);
    }
    const auto criteria =
        util::read_file(std::filesystem::path(ELICIT_SOURCE_DIR) / "assets" /
                        "latent_criteria.txt");
    CHECK(criteria == prompts::default_latent_criteria());

    // Overrides replace builtins.
    TempDir tmp("prompts");
    util::write_file(tmp.path() / "classify_zero_shot.txt", "override text");
    const auto overridden = prompts::PromptStore::with_overrides(tmp.path());
    CHECK(overridden.get("classify_zero_shot") == "override text");
    CHECK(overridden.get("agent_serial") == store.get("agent_serial"));
}
