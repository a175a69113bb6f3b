#include "elicit/experience.hpp"
#include "elicit/errors.hpp"
#include "elicit/interview.hpp"
#include "elicit/mock_provider.hpp"

#include "helpers.hpp"

#include <doctest.h>

using namespace elicit;
using test_helpers::make_rig;
using test_helpers::tent_brief;

namespace {

domain::AgentProfile arthritis_agent() {
    domain::AgentProfile agent;
    agent.name = "Elderly with arthritis";
    agent.description =
        "Has limited finger dexterity and grip strength; small fasteners are painful.";
    agent.reasoning = "manually specified empathic lead user";
    agent.origin = domain::AgentOrigin::manual;
    return agent;
}

} // namespace

TEST_CASE("simulate_experience returns bounded, contiguous steps") {
    auto rig = make_rig(7);
    const auto exp = experience::simulate_experience(
        *rig.gateway, prompts::PromptStore::builtin(), tent_brief(), arthritis_agent(),
        3, 6);
    CHECK(exp.agent_name == "Elderly with arthritis");
    CHECK(exp.steps.size() >= 3);
    CHECK(exp.steps.size() <= 6);
    for (std::size_t i = 0; i < exp.steps.size(); ++i) {
        CHECK(exp.steps[i].index == static_cast<int>(i) + 1);
        CHECK(!exp.steps[i].action.empty());
        CHECK(!exp.steps[i].observation.empty());
        CHECK(!exp.steps[i].challenge.empty());
    }

    // Prompt lineage: the persona appears verbatim in the issued system text.
    const auto calls = rig.mock->recorded_calls();
    REQUIRE(calls.size() == 1);
    CHECK(calls[0].system_text.find(arthritis_agent().description) != std::string::npos);
    CHECK(calls[0].system_text.find(arthritis_agent().name) != std::string::npos);
}

TEST_CASE("simulate_experience honors min=max=1 and rejects bad bounds") {
    auto rig = make_rig(7);
    const auto exp = experience::simulate_experience(
        *rig.gateway, prompts::PromptStore::builtin(), tent_brief(), arthritis_agent(),
        1, 1);
    CHECK(exp.steps.size() == 1);

    CHECK_THROWS_AS(
        experience::simulate_experience(*rig.gateway, prompts::PromptStore::builtin(),
                                        tent_brief(), arthritis_agent(), 3, 2),
        ValidationError);
}

TEST_CASE("build_question_pool: freestyle first, then one per category") {
    const auto& store = prompts::PromptStore::builtin();
    const auto pool = interview::build_question_pool(tent_brief(), true, store);
    REQUIRE(pool.size() == 12); // 11 categories + freestyle

    CHECK(pool[0].kind == domain::QuestionKind::freestyle);
    CHECK(pool[0].text ==
          "If you were to purchase an ideal tent, what main characteristics would "
          "you look for?");
    for (std::size_t i = 1; i < pool.size(); ++i) {
        CHECK(pool[i].kind == domain::QuestionKind::categorical);
        CHECK(pool[i].category == tent_brief().categories[i - 1]);
        CHECK(pool[i].text.find(*pool[i].category) != std::string::npos);
        CHECK(pool[i].text.find("tent") != std::string::npos);
    }

    domain::DesignBrief one_cat;
    one_cat.product_name = "tent";
    one_cat.categories = {"setup"};
    CHECK(interview::build_question_pool(one_cat, false, store).size() == 1);

    domain::DesignBrief no_cats;
    no_cats.product_name = "tent";
    CHECK_THROWS_AS(interview::build_question_pool(no_cats, true, store),
                    ValidationError);
}

TEST_CASE("conduct_interview asks in order with monotone context") {
    auto rig = make_rig(7);
    const auto& store = prompts::PromptStore::builtin();
    const auto agent = arthritis_agent();
    const auto exp = experience::simulate_experience(*rig.gateway, store, tent_brief(),
                                                     agent, 3, 4);
    const auto pool = interview::build_question_pool(tent_brief(), true, store);

    const auto transcript =
        interview::conduct_interview(*rig.gateway, store, agent, exp, pool);
    REQUIRE(transcript.qas.size() == 12);
    CHECK(transcript.complete);
    for (std::size_t i = 0; i < pool.size(); ++i) {
        CHECK(transcript.qas[i].question_id == pool[i].id);
        CHECK(!transcript.qas[i].answer_text.empty());
    }

    const auto calls = rig.mock->recorded_calls();
    REQUIRE(calls.size() == 13); // 1 experience + 12 questions

    // Question 5's prompt contains answers 1-4 verbatim, and context grows
    // monotonically question over question.
    const auto& q5 = calls[5 + 0]; // calls[1]..calls[12] are the questions
    for (int prior = 0; prior < 4; ++prior) {
        bool found = false;
        for (const auto& turn : q5.user_turns)
            if (turn.find(transcript.qas[static_cast<std::size_t>(prior)].answer_text) !=
                std::string::npos)
                found = true;
        CHECK(found);
    }
    for (std::size_t q = 1; q < 12; ++q) {
        CHECK(calls[q + 1].user_turns.size() == calls[q].user_turns.size() + 1);
        // persona + experience in every call
        CHECK(calls[q + 1].system_text.find(agent.description) != std::string::npos);
        CHECK(calls[q + 1].system_text.find(exp.steps[0].action) != std::string::npos);
    }

    CHECK_THROWS_AS(
        interview::conduct_interview(*rig.gateway, store, agent, exp, {}),
        ValidationError);
}

TEST_CASE("mid-interview exhaustion yields a partial transcript") {
    auto rig = make_rig(7);
    const auto& store = prompts::PromptStore::builtin();
    const auto agent = arthritis_agent();
    const auto exp = experience::simulate_experience(*rig.gateway, store, tent_brief(),
                                                     agent, 3, 4);
    const auto pool = interview::build_question_pool(tent_brief(), true, store);

    // Fail every attempt of the 4th question (0-based index 3).
    rig.mock->set_responder([&](const gw::ProviderChatCall& call)
                                -> std::optional<std::string> {
        for (const auto& turn : call.user_turns)
            if (turn.find(pool[3].text) != std::string::npos) return "not json";
        return std::nullopt;
    });

    try {
        interview::conduct_interview(*rig.gateway, store, agent, exp, pool);
        FAIL("expected InterviewAborted");
    } catch (const interview::InterviewAborted& aborted) {
        CHECK(aborted.partial().qas.size() == 3);
        CHECK_FALSE(aborted.partial().complete);
        CHECK(aborted.partial().agent_name == agent.name);
    }
}
