#include "elicit/needs.hpp"
#include "elicit/errors.hpp"
#include "elicit/mock_provider.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace elicit;
using test_helpers::make_rig;
using test_helpers::tent_brief;

namespace {

domain::InterviewTranscript sample_transcript() {
    domain::InterviewTranscript t;
    t.agent_name = "Elderly with arthritis";
    domain::InterviewQA q1;
    q1.question_id = "q01-freestyle";
    q1.question_text =
        "If you were to purchase an ideal tent, what main characteristics would "
        "you look for?";
    q1.answer_text =
        "The ideal tent would need large, easy-grip zippers for limited dexterity.";
    t.qas.push_back(q1);
    domain::InterviewQA q2;
    q2.question_id = "q11-setup";
    q2.question_text = "Focusing specifically on the setup aspect of tent, can you "
                       "tell me your needs?";
    q2.answer_text = "I would want a self-erecting tent structure that expands on "
                     "its own when removed from the bag.";
    q2.kind = domain::QuestionKind::categorical;
    q2.category = "setup";
    t.qas.push_back(q2);
    return t;
}

domain::NeedStatement need_with(const std::string& id, const std::string& text) {
    domain::NeedStatement need;
    need.id = id;
    need.agent_name = "Elderly with arthritis";
    need.source_question_id = "q11-setup";
    need.text = text;
    return need;
}

const needs::LatentCriteria kCriteria{prompts::default_latent_criteria()};

} // namespace

TEST_CASE("extract_needs: per-QA calls, deterministic ids, zero-needs allowed") {
    auto rig = make_rig(7);
    const auto transcript = sample_transcript();

    // First QA yields nothing, second yields two scripted needs.
    rig.mock->set_responder([&](const gw::ProviderChatCall& call)
                                -> std::optional<std::string> {
        for (const auto& turn : call.user_turns) {
            if (turn.find("easy-grip zippers") != std::string::npos)
                return R"({"needs": []})";
            if (turn.find("self-erecting") != std::string::npos)
                return R"({"needs": ["A self-erecting tent structure that sets itself up.",
                                      "A storage bag that guides repacking."]})";
        }
        return std::nullopt;
    });

    const auto result = needs::extract_needs(*rig.gateway, prompts::PromptStore::builtin(),
                                             tent_brief(), transcript);
    REQUIRE(result.needs.size() == 2);
    CHECK(result.skipped_question_ids.empty());
    CHECK(result.needs[0].id == "Elderly with arthritis-q11-setup-1");
    CHECK(result.needs[1].id == "Elderly with arthritis-q11-setup-2");
    CHECK(result.needs[0].text.find("self-erecting tent structure") != std::string::npos);
    for (const auto& need : result.needs) {
        CHECK(need.agent_name == transcript.agent_name);
        CHECK(need.source_question_id == "q11-setup");
    }
    CHECK(rig.mock->chat_call_count() == 2); // one call per QA

    domain::InterviewTranscript incomplete = transcript;
    incomplete.complete = false;
    CHECK_THROWS_AS(needs::extract_needs(*rig.gateway, prompts::PromptStore::builtin(),
                                         tent_brief(), incomplete),
                    ValidationError);
}

TEST_CASE("extract_needs skips QAs whose call exhausts retries") {
    auto rig = make_rig(7);
    rig.mock->set_responder([&](const gw::ProviderChatCall& call)
                                -> std::optional<std::string> {
        for (const auto& turn : call.user_turns)
            if (turn.find("easy-grip zippers") != std::string::npos) return "garbage";
        return std::nullopt;
    });
    const auto result = needs::extract_needs(*rig.gateway, prompts::PromptStore::builtin(),
                                             tent_brief(), sample_transcript());
    REQUIRE(result.skipped_question_ids.size() == 1);
    CHECK(result.skipped_question_ids[0] == "q01-freestyle");
    for (const auto& need : result.needs)
        CHECK(need.source_question_id == "q11-setup");
}

TEST_CASE("classify_latent prompt composition per mode") {
    const auto need = need_with("n1", "wide angles would maximize the field of view "
                                      "for photography");

    SUBCASE("zero_shot carries only the question and the need") {
        auto rig = make_rig(7);
        const auto label = needs::classify_latent(
            *rig.gateway, prompts::PromptStore::builtin(), need,
            domain::ClassificationMode::zero_shot, std::nullopt);
        CHECK(label.mode == domain::ClassificationMode::zero_shot);
        CHECK(!label.reasoning);
        const auto calls = rig.mock->recorded_calls();
        REQUIRE(calls.size() == 1);
        REQUIRE(calls[0].user_turns.size() == 1);
        CHECK(calls[0].user_turns[0] ==
              "Is this a latent need?\n\nNeed: " + need.text);
        // criteria text never appears in zero-shot prompts
        CHECK(calls[0].system_text.find("latent = True") == std::string::npos);
        CHECK(calls[0].user_turns[0].find("significant change") == std::string::npos);
        CHECK(calls[0].temperature == doctest::Approx(0.0));
    }

    SUBCASE("criteria mode prepends the criteria verbatim") {
        auto rig = make_rig(7);
        needs::classify_latent(*rig.gateway, prompts::PromptStore::builtin(), need,
                               domain::ClassificationMode::criteria, kCriteria);
        const auto calls = rig.mock->recorded_calls();
        CHECK(calls[0].user_turns[0].rfind(kCriteria.text, 0) == 0);
    }

    SUBCASE("criteria_cot stores the reasoning and orders it before the verdict") {
        auto rig = make_rig(7);
        const auto label = needs::classify_latent(
            *rig.gateway, prompts::PromptStore::builtin(), need,
            domain::ClassificationMode::criteria_cot, kCriteria);
        REQUIRE(label.reasoning);
        CHECK(!label.reasoning->empty());
        const auto calls = rig.mock->recorded_calls();
        const auto& sys = calls[0].system_text;
        const auto reasoning_pos = sys.find("\"reasoning\"");
        const auto latent_pos = sys.find("\"latent\"");
        REQUIRE(reasoning_pos != std::string::npos);
        REQUIRE(latent_pos != std::string::npos);
        CHECK(reasoning_pos < latent_pos);
    }

    SUBCASE("criteria must be present exactly for criteria modes") {
        auto rig = make_rig(7);
        CHECK_THROWS_AS(
            needs::classify_latent(*rig.gateway, prompts::PromptStore::builtin(), need,
                                   domain::ClassificationMode::criteria, std::nullopt),
            ValidationError);
        CHECK_THROWS_AS(
            needs::classify_latent(*rig.gateway, prompts::PromptStore::builtin(), need,
                                   domain::ClassificationMode::zero_shot, kCriteria),
            ValidationError);
    }
}

TEST_CASE("classify_latent: reference verdicts replay through the real plumbing") {
    // Scripted verdicts for the two canonical example needs.
    const auto latent_need = need_with(
        "n-photo", "For the interior, a design focused on wide angles would maximize "
                   "the field of view for photography through designated openings.");
    const auto plain_need = need_with(
        "n-floor", "A tent floor that is resilient against tears from sharp objects "
                   "and general wear.");

    auto rig = make_rig(7);
    rig.mock->set_responder([&](const gw::ProviderChatCall& call)
                                -> std::optional<std::string> {
        const bool is_latent =
            call.user_turns[0].find("wide angles") != std::string::npos;
        const char* verdict_reason =
            is_latent ? "The need reshapes how the tent interior is used for "
                        "observation; it fits no exclusion category."
                      : "The need falls squarely into the durability category, so it "
                        "is not latent.";
        return nlohmann::json{{"reasoning", verdict_reason}, {"latent", is_latent}}
            .dump();
    });

    const auto latent_label = needs::classify_latent(
        *rig.gateway, prompts::PromptStore::builtin(), latent_need,
        domain::ClassificationMode::criteria_cot, kCriteria);
    CHECK(latent_label.latent);
    REQUIRE(latent_label.reasoning);
    CHECK(latent_label.reasoning->find("exclusion category") != std::string::npos);

    const auto plain_label = needs::classify_latent(
        *rig.gateway, prompts::PromptStore::builtin(), plain_need,
        domain::ClassificationMode::criteria_cot, kCriteria);
    CHECK_FALSE(plain_label.latent);
    REQUIRE(plain_label.reasoning);
    CHECK(plain_label.reasoning->find("durability") != std::string::npos);
}

TEST_CASE("classify_latent is deterministic under the mock") {
    const auto need = need_with("n1", "a tent floor that is resilient against tears");
    auto once = make_rig(5);
    auto twice = make_rig(5);
    const auto a =
        needs::classify_latent(*once.gateway, prompts::PromptStore::builtin(), need,
                               domain::ClassificationMode::criteria_cot, kCriteria);
    const auto b =
        needs::classify_latent(*twice.gateway, prompts::PromptStore::builtin(), need,
                               domain::ClassificationMode::criteria_cot, kCriteria);
    CHECK(a.latent == b.latent);
    CHECK(a.reasoning == b.reasoning);
}

TEST_CASE("generate_report aggregates per agent and reconciles totals") {
    domain::RunManifest manifest;
    manifest.run_id = "r1";
    manifest.brief = tent_brief();
    manifest.provider_id = "mock";
    manifest.created_at = "1970-01-01T00:00:00Z";
    for (const auto& stage : domain::stage_order())
        manifest.stage_status[stage] = domain::StageStatus::pending;

    SUBCASE("zero needs yields an explicit empty section") {
        const auto result = needs::generate_report({}, {}, manifest, kCriteria.text);
        CHECK(result.report.total_needs == 0);
        CHECK(result.report.total_latent == 0);
        CHECK(result.markdown.find("No needs extracted.") != std::string::npos);
        CHECK(result.markdown.find(kCriteria.text) != std::string::npos);
    }

    SUBCASE("3 needs, 2 latent across 2 agents") {
        std::vector<domain::NeedStatement> statements = {
            need_with("a-1", "self-erecting structure"),
            need_with("a-2", "larger door"),
            need_with("b-1", "dew-harvesting skin")};
        statements[2].agent_name = "Hunter";
        std::vector<domain::NeedLabel> labels;
        for (const auto& [id, latent] :
             std::vector<std::pair<std::string, bool>>{{"a-1", true},
                                                       {"a-2", false},
                                                       {"b-1", true}}) {
            domain::NeedLabel label;
            label.need_id = id;
            label.latent = latent;
            label.mode = domain::ClassificationMode::criteria;
            labels.push_back(label);
        }

        const auto result =
            needs::generate_report(statements, labels, manifest, kCriteria.text);
        CHECK(result.report.total_needs == 3);
        CHECK(result.report.total_latent == 2);
        std::size_t sum_needs = 0;
        std::size_t sum_latent = 0;
        for (const auto& [agent, entry] : result.report.per_agent) {
            sum_needs += entry.needs.size();
            sum_latent += entry.latent_count;
        }
        CHECK(sum_needs == result.report.total_needs);
        CHECK(sum_latent == result.report.total_latent);
        CHECK(result.markdown.find("[LATENT] self-erecting structure") !=
              std::string::npos);

        // Regenerating from identical inputs gives identical bytes.
        const auto again =
            needs::generate_report(statements, labels, manifest, kCriteria.text);
        CHECK(again.markdown == result.markdown);
        CHECK(again.report.to_json().dump() == result.report.to_json().dump());
    }

    SUBCASE("mode mismatch or missing label is rejected") {
        const auto statement = need_with("a-1", "text");
        domain::NeedLabel label;
        label.need_id = "a-1";
        label.mode = domain::ClassificationMode::criteria;

        domain::NeedLabel other;
        other.need_id = "a-2";
        other.mode = domain::ClassificationMode::zero_shot;

        try {
            needs::generate_report({statement}, {label, other}, manifest, "");
            FAIL("expected MissingLabel");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::missing_label);
        }
        try {
            needs::generate_report({statement}, {}, manifest, "");
            FAIL("expected MissingLabel");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::missing_label);
        }
    }
}

TEST_CASE("dedup_needs drops repeated normalized texts") {
    std::vector<domain::NeedStatement> statements = {
        need_with("a-1", "A self-erecting structure"),
        need_with("a-2", "a self-erecting structure  "),
        need_with("a-3", "something else")};
    const auto unique = needs::dedup_needs(statements);
    REQUIRE(unique.size() == 2);
    CHECK(unique[0].id == "a-1");
    CHECK(unique[1].id == "a-3");
}
