#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stride/json_io.hpp"
#include "stride/planner.hpp"

using namespace stride;

namespace {

const char* kTwoStepPlan = R"__({"general_strategy": ["identify the source book of the movie", "find the author of that book"],
 "concrete_plan": [{"id": 1, "question": "What book was the movie Lincoln based on?", "depends_on": []},
                   {"id": 2, "question": "Who wrote #1?", "depends_on": [1]}]})__";

struct Fixture {
    std::shared_ptr<ScriptedProvider> provider;
    Gateway gateway;
    GatewaySession session;
    PromptLibrary prompts;

    explicit Fixture(std::vector<ScriptedProvider::Rule> rules)
        : provider(std::make_shared<ScriptedProvider>(std::move(rules))),
          gateway(provider, [] {
              GatewayConfig c;
              c.sleep_on_retry = false;
              return c;
          }()),
          session(gateway) {}
};

}  // namespace

TEST_CASE("planner parses a two-step blueprint from scripted output") {
    Fixture fx({{Role::planner, {"movie Lincoln"}, kTwoStepPlan}});
    MetaPlanner planner(fx.session, fx.prompts);
    Question q{"q1", "Who wrote the book that the movie Lincoln was based on?", {}, {}};

    Blueprint bp = planner.plan_one(q);
    REQUIRE(bp.strategy.size() == 2);
    REQUIRE(bp.plan.size() == 2);
    CHECK(bp.plan[0].depends_on.empty());
    CHECK(bp.plan[1].depends_on == std::set<int>{1});
    CHECK(bp.plan[1].template_text == "Who wrote #1?");
}

TEST_CASE("forward placeholder reference is rejected as invalid") {
    const char* bad = R"__({"general_strategy": ["s"],
 "concrete_plan": [{"id": 1, "question": "What is #3?", "depends_on": []},
                   {"id": 2, "question": "Who is it?", "depends_on": []}]})__";
    Fixture fx({{Role::planner, {}, bad}});
    MetaPlanner planner(fx.session, fx.prompts);
    CHECK_THROWS_AS(planner.plan_one({"q", "anything", {}, {}}), PlanInvalid);
}

TEST_CASE("validate_blueprint repairs depends_on from placeholders") {
    Blueprint cand;
    cand.strategy.push_back({1, "step"});
    cand.plan.push_back({1, "Base question", {}});
    cand.plan.push_back({2, "Who wrote #1?", {}});  // missing dep annotation

    Warnings w;
    auto result = validate_blueprint(cand, true, &w);
    REQUIRE(result.blueprint.has_value());
    CHECK(result.blueprint->plan[1].depends_on == std::set<int>{1});
    CHECK(!w.empty());
}

TEST_CASE("validate_blueprint reports id gaps and empty sections") {
    Blueprint cand;
    cand.strategy.push_back({1, "step"});
    cand.plan.push_back({1, "q1", {}});
    cand.plan.push_back({3, "q3", {}});
    auto result = validate_blueprint(cand);
    CHECK(!result.blueprint.has_value());
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].find("1..n") != std::string::npos);

    Blueprint empty_strategy;
    empty_strategy.plan.push_back({1, "q", {}});
    CHECK(!validate_blueprint(empty_strategy, true).blueprint.has_value());
    // the no-meta-planner mode accepts a missing strategy
    CHECK(validate_blueprint(empty_strategy, false).blueprint.has_value());

    Blueprint no_plan;
    no_plan.strategy.push_back({1, "s"});
    CHECK(!validate_blueprint(no_plan).blueprint.has_value());
}

TEST_CASE("one re-prompt with violations, then abort") {
    // Both calls return the same malformed output; planner must give up after
    // the second attempt.
    Fixture fx({{Role::planner, {}, "not json at all"}});
    MetaPlanner planner(fx.session, fx.prompts);
    CHECK_THROWS_AS(planner.plan_one({"q", "text", {}, {}}), PlanParseError);
    CHECK(fx.gateway.usage().calls == 2);
}

TEST_CASE("re-prompt succeeds when the retry rule matches the reminder") {
    // First attempt matches the bare rule; the retry prompt contains the
    // violation note, which routes to the good rule.
    Fixture fx({
        {Role::planner, {"could not be used"}, kTwoStepPlan},
        {Role::planner, {}, "garbled"},
    });
    MetaPlanner planner(fx.session, fx.prompts);
    Blueprint bp = planner.plan_one({"q", "text", {}, {}});
    CHECK(bp.plan.size() == 2);
    CHECK(fx.gateway.usage().calls == 2);
}

TEST_CASE("sample_count=8 issues 8 independent calls") {
    Fixture fx({{Role::planner, {}, kTwoStepPlan}});
    MetaPlanner planner(fx.session, fx.prompts);
    auto blueprints = planner.plan({"q", "text", {}, {}}, 8);
    CHECK(blueprints.size() == 8);
    CHECK(fx.gateway.usage().calls == 8);
    CHECK(fx.gateway.usage().calls_by_role[static_cast<int>(Role::planner)] == 8);
}

TEST_CASE("no-meta-planner mode drops the strategy level") {
    Fixture fx({{Role::planner, {}, kTwoStepPlan}});
    MetaPlanner planner(fx.session, fx.prompts, /*include_strategy=*/false);
    Blueprint bp = planner.plan_one({"q", "text", {}, {}});
    CHECK(bp.strategy.empty());
    CHECK(bp.plan.size() == 2);
    // the direct prompt must not ask for a general strategy
    CHECK(planner.build_user_prompt({"q", "text", {}, {}}).find("general_strategy") ==
          std::string::npos);
}

TEST_CASE("instantiate substitutes solved answers") {
    Blueprint bp;
    bp.plan.push_back({1, "What book was the movie Lincoln based on?", {}});
    bp.plan.push_back({2, "Who wrote #1?", {1}});
    bp.plan.push_back({3, "Is #1 older than #2?", {1, 2}});
    ExecutionState state = initial_state(bp);

    CHECK_THROWS_AS(instantiate(bp.plan[1], state), UnresolvedDependency);

    state.solved[1] = {1, "Klara and the Sun", {}, "", Action::retrieve};
    state.pending.erase(1);
    CHECK(instantiate(bp.plan[1], state) == "Who wrote Klara and the Sun?");

    state.solved[2] = {2, "Kazuo Ishiguro", {}, "", Action::retrieve};
    state.pending.erase(2);
    CHECK(instantiate(bp.plan[2], state) == "Is Klara and the Sun older than Kazuo Ishiguro?");
    CHECK(parse_placeholders(instantiate(bp.plan[2], state)).empty());
}
