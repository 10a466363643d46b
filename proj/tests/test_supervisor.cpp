#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stride/json_io.hpp"
#include "stride/supervisor.hpp"

using namespace stride;

namespace {

std::vector<SubQuestion> three_step_plan() {
    return {
        {1, "What is the birth year of Ada?", {}},
        {2, "What is the birth year of Ben?", {}},
        {3, "Who is older, the person born in #1 or the person born in #2?", {1, 2}},
    };
}

ExecutionState state_for(const std::vector<SubQuestion>& plan) {
    Blueprint bp;
    bp.plan = plan;
    return initial_state(bp);
}

void solve(ExecutionState& state, int id, const std::string& answer) {
    state.solved[id] = {id, answer, {{answer + " fact", "d1"}}, "q" + std::to_string(id), Action::retrieve};
    state.pending.erase(id);
}

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

TEST_CASE("ready_set follows dependency availability") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    CHECK(ready_set(plan, state) == std::set<int>{1, 2});
    solve(state, 1, "1815");
    CHECK(ready_set(plan, state) == std::set<int>{2});
    solve(state, 2, "1820");
    CHECK(ready_set(plan, state) == std::set<int>{3});
    solve(state, 3, "Ada");
    CHECK(ready_set(plan, state).empty());
}

TEST_CASE("validate_directives drops non-ready, empty, duplicate targets") {
    auto plan = three_step_plan();
    auto state = state_for(plan);

    std::vector<Directive> ds = {
        {3, Action::answer, "not ready yet"},
        {1, Action::retrieve, "birth year of Ada"},
        {1, Action::retrieve, "duplicate for id one"},
        {2, Action::retrieve, ""},
    };
    auto result = validate_directives(ds, plan, state);
    REQUIRE(result.accepted.size() == 1);
    CHECK(result.accepted[0].sub_question_id == 1);
    CHECK(result.violations.size() == 3);
}

TEST_CASE("rewrite equal to a failed query is rejected, modulo case/spacing") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    state.failed[1] = {"Birth year of Ada"};

    std::vector<Directive> ds = {{1, Action::rewrite, "birth  YEAR of ada"}};
    auto result = validate_directives(ds, plan, state);
    CHECK(result.accepted.empty());
    REQUIRE(result.violations.size() == 1);
    CHECK(result.violations[0].find("repeats a failed query") != std::string::npos);
}

TEST_CASE("retrieve with failure history coerces to rewrite when fresh") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    state.failed[1] = {"first try"};

    auto coerced = validate_directives({{1, Action::retrieve, "a fresh phrasing"}}, plan, state);
    REQUIRE(coerced.accepted.size() == 1);
    CHECK(coerced.accepted[0].action == Action::rewrite);

    auto rejected = validate_directives({{1, Action::retrieve, "First  Try"}}, plan, state);
    CHECK(rejected.accepted.empty());
}

TEST_CASE("deterministic policy: retrieve, answer, rewrite") {
    auto plan = three_step_plan();
    auto state = state_for(plan);

    SUBCASE("fresh fact-seeking ids retrieve their instantiated text") {
        auto ds = deterministic_policy(plan, state);
        REQUIRE(ds.size() == 2);
        CHECK(ds[0].action == Action::retrieve);
        CHECK(ds[0].query == "What is the birth year of Ada?");
        CHECK(ds[1].action == Action::retrieve);
    }

    SUBCASE("comparison step with substituted deps becomes answer") {
        solve(state, 1, "1815");
        solve(state, 2, "1820");
        auto ds = deterministic_policy(plan, state);
        REQUIRE(ds.size() == 1);
        CHECK(ds[0].sub_question_id == 3);
        CHECK(ds[0].action == Action::answer);
        CHECK(ds[0].query == "Who is older, the person born in 1815 or the person born in 1820?");
    }

    SUBCASE("failed first attempt yields a fresh mechanical rewrite") {
        state.failed[1] = {"What is the birth year of Ada?"};
        auto ds = deterministic_policy(plan, state);
        REQUIRE(ds.size() == 2);
        CHECK(ds[0].sub_question_id == 1);
        CHECK(ds[0].action == Action::rewrite);
        CHECK(normalize_query(ds[0].query) !=
              normalize_query("What is the birth year of Ada?"));

        // and the produced query is itself fresh against the failed list
        for (const auto& f : state.failed[1])
            CHECK(normalize_query(ds[0].query) != normalize_query(f));
    }

    SUBCASE("exhausted rewrites are skipped with a warning") {
        state.failed[1] = {"What is the birth year of Ada?",
                           "facts about: What is the birth year of Ada?"};
        Warnings w;
        auto ds = deterministic_policy(plan, state, &w);
        REQUIRE(ds.size() == 1);  // only id 2 remains schedulable
        CHECK(ds[0].sub_question_id == 2);
        REQUIRE(w.size() == 1);
        CHECK(w[0].find("rewrite exhausted") != std::string::npos);
    }
}

TEST_CASE("decide uses scripted directives when parseable") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    const char* response = R"__({"directives": [
        {"id": 1, "action": "retrieve", "query": "Ada birth year"},
        {"id": 2, "action": "retrieve", "query": "Ben birth year"}]})__";
    Fixture fx({{Role::supervisor, {"Ready: [1, 2]"}, response}});
    Supervisor sup(fx.session, fx.prompts);

    auto ds = sup.decide({"q", "Who is older, Ada or Ben?", {}, {}}, plan, state);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].query == "Ada birth year");
    CHECK(fx.gateway.usage().calls == 1);
}

TEST_CASE("decide falls back to deterministic policy when the model is unusable") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    Fixture fx({{Role::supervisor, {}, "complete gibberish"}});
    Supervisor sup(fx.session, fx.prompts);

    Warnings w;
    auto ds = sup.decide({"q", "Who is older, Ada or Ben?", {}, {}}, plan, state, &w);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].action == Action::retrieve);
    // one original call + one re-prompt, both unusable
    CHECK(fx.gateway.usage().calls == 2);
    CHECK(!w.empty());
}

TEST_CASE("decide grounds #k placeholders left in model queries") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    solve(state, 1, "1815");
    solve(state, 2, "1820");
    const char* response = R"__({"directives": [
        {"id": 3, "action": "answer", "query": "Who is older, #1 or #2?"}]})__";
    Fixture fx({{Role::supervisor, {}, response}});
    Supervisor sup(fx.session, fx.prompts);

    auto ds = sup.decide({"q", "Who is older, Ada or Ben?", {}, {}}, plan, state);
    REQUIRE(ds.size() == 1);
    CHECK(ds[0].query == "Who is older, 1815 or 1820?");
}

TEST_CASE("decide fills ready ids the model did not cover") {
    auto plan = three_step_plan();
    auto state = state_for(plan);
    const char* partial = R"__({"directives": [
        {"id": 1, "action": "retrieve", "query": "Ada birth year"}]})__";
    Fixture fx({{Role::supervisor, {}, partial}});
    Supervisor sup(fx.session, fx.prompts);

    auto ds = sup.decide({"q", "Who is older, Ada or Ben?", {}, {}}, plan, state);
    REQUIRE(ds.size() == 2);
    CHECK(ds[0].sub_question_id == 1);
    CHECK(ds[0].query == "Ada birth year");
    CHECK(ds[1].sub_question_id == 2);
    CHECK(ds[1].query == "What is the birth year of Ben?");
    // partial output is not re-prompted, only filled
    CHECK(fx.gateway.usage().calls == 1);
}

TEST_CASE("property: accepted directives always target ready ids, rewrites always fresh") {
    std::mt19937 rng(2024);
    for (int round = 0; round < 300; ++round) {
        // random plan of size 1..6 with random back-deps
        std::vector<SubQuestion> plan;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int id = 1; id <= n; ++id) {
            SubQuestion sq;
            sq.id = id;
            sq.template_text = "question " + std::to_string(id);
            if (id > 1 && rng() % 2) {
                int dep = 1 + static_cast<int>(rng() % (id - 1));
                sq.depends_on.insert(dep);
                sq.template_text += " about #" + std::to_string(dep);
            }
            plan.push_back(sq);
        }
        auto state = state_for(plan);
        // randomly solve a prefix-closed subset and add failures
        for (const auto& sq : plan) {
            bool deps_ok = true;
            for (int dep : sq.depends_on) deps_ok = deps_ok && state.is_solved(dep);
            if (deps_ok && rng() % 2) {
                state.solved[sq.id] = {sq.id, "ans" + std::to_string(sq.id), {}, "", Action::retrieve};
                state.pending.erase(sq.id);
            } else if (rng() % 3 == 0) {
                state.failed[sq.id].push_back("question " + std::to_string(sq.id) + " try");
            }
        }
        // random directives, some bogus
        std::vector<Directive> raw;
        for (int i = 0; i < 6; ++i) {
            Directive d;
            d.sub_question_id = 1 + static_cast<int>(rng() % (n + 2));
            d.action = static_cast<Action>(rng() % 3);
            switch (rng() % 3) {
                case 0: d.query = ""; break;
                case 1: d.query = "question " + std::to_string(d.sub_question_id) + " try"; break;
                default: d.query = "fresh query " + std::to_string(rng() % 1000);
            }
            raw.push_back(d);
        }
        auto ready = ready_set(plan, state);
        auto result = validate_directives(raw, plan, state);
        std::set<int> seen;
        for (const auto& d : result.accepted) {
            CHECK(ready.count(d.sub_question_id) == 1);
            CHECK(seen.insert(d.sub_question_id).second);
            CHECK(!d.query.empty());
            if (d.action == Action::rewrite)
                for (const auto& f : state.failed_queries(d.sub_question_id))
                    CHECK(normalize_query(d.query) != normalize_query(f));
        }
        // deterministic policy obeys the same contract
        if (!ready.empty()) {
            for (const auto& d : deterministic_policy(plan, state)) {
                CHECK(ready.count(d.sub_question_id) == 1);
                if (d.action == Action::rewrite)
                    for (const auto& f : state.failed_queries(d.sub_question_id))
                        CHECK(normalize_query(d.query) != normalize_query(f));
            }
        }
    }
}
