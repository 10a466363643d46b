#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "stride/domain.hpp"
#include "stride/json_io.hpp"

using namespace stride;

TEST_CASE("parse_placeholders finds standalone #k tokens") {
    CHECK(parse_placeholders("Who directed #1?") == std::set<int>{1});
    CHECK(parse_placeholders("Who is older, #1 or #2?") == std::set<int>{1, 2});
    CHECK(parse_placeholders("Who wrote Dune?") == std::set<int>{});
    CHECK(parse_placeholders("#3 and #3 again") == std::set<int>{3});
    CHECK(parse_placeholders("#12 vs #2") == std::set<int>{2, 12});
}

TEST_CASE("parse_placeholders ignores malformed refs and warns") {
    Warnings w;
    CHECK(parse_placeholders("#0 is invalid", &w) == std::set<int>{});
    CHECK(w.size() == 1);
    w.clear();
    CHECK(parse_placeholders("price in $# or #abc", &w) == std::set<int>{});
    CHECK(w.size() == 2);
    // '#' glued to preceding identifier characters is not a placeholder
    CHECK(parse_placeholders("issue#4 closed") == std::set<int>{});
}

TEST_CASE("state invariant checker flags broken partitions") {
    Blueprint bp;
    bp.plan.push_back({1, "a", {}});
    bp.plan.push_back({2, "b #1", {1}});
    ExecutionState s = initial_state(bp);
    CHECK(s.pending == std::set<int>{1, 2});
    CHECK(s.check_invariants({1, 2}).empty());

    SolvedEntry e;
    e.sub_question_id = 1;
    e.answer = "x";
    s.solved[1] = e;
    // 1 is now both solved and pending
    CHECK(!s.check_invariants({1, 2}).empty());
    s.pending.erase(1);
    CHECK(s.check_invariants({1, 2}).empty());

    s.failed[2] = {"q", "q"};
    auto violations = s.check_invariants({1, 2});
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].find("duplicate failed query") != std::string::npos);
}

TEST_CASE("trajectory serialization round-trips and keeps field names") {
    Trajectory t;
    t.question = {"q1", "Who wrote #1?", {"An Author"}, 2};
    t.blueprint.strategy.push_back({1, "find the work"});
    t.blueprint.plan.push_back({1, "What book?", {}});
    t.blueprint.plan.push_back({2, "Who wrote #1?", {1}});
    IterationRecord rec;
    rec.iteration = 1;
    rec.ready_ids = {1};
    rec.directives.push_back({1, Action::retrieve, "What book?"});
    ResolutionOutcome o;
    o.sub_question_id = 1;
    o.kind = ResolutionOutcome::Kind::solved;
    o.entry = {1, "The Book", {{"The Book exists", "d1"}}, "What book?", Action::retrieve};
    rec.outcomes.push_back(o);
    t.iterations.push_back(rec);
    t.final_answer = "An Author";
    t.metrics = Metrics{1.0, 1.0, 1.0, 1.0};

    json j = t;
    CHECK(j["schema"] == "traj_v1");
    CHECK(j["question"]["gold_answers"][0] == "An Author");
    CHECK(j["blueprint"]["plan"][1]["template_text"] == "Who wrote #1?");
    CHECK(j["iterations"][0]["outcomes"][0]["entry"]["action_used"] == "retrieve");

    Trajectory back = j.get<Trajectory>();
    CHECK(back.question.id == t.question.id);
    CHECK(back.blueprint.plan.size() == 2);
    CHECK(back.iterations.at(0).outcomes.at(0).entry.answer == "The Book");
    CHECK(back.metrics.has_value());
    CHECK(json(back).dump() == j.dump());
}

TEST_CASE("substitution removes every placeholder (idempotence property)") {
    std::mt19937 rng(11);
    for (int round = 0; round < 200; ++round) {
        // build a random template over ids 1..5 and a state solving them all
        std::string tmpl;
        const int pieces = 1 + static_cast<int>(rng() % 5);
        for (int i = 0; i < pieces; ++i) {
            tmpl += "word" + std::to_string(rng() % 100) + " ";
            if (rng() % 2) tmpl += "#" + std::to_string(1 + rng() % 5) + " ";
        }
        tmpl += "?";
        auto refs = parse_placeholders(tmpl);

        // substitute manually the way instantiate() does
        std::string out = tmpl;
        for (int k : refs) {
            std::string needle = "#" + std::to_string(k);
            size_t pos;
            while ((pos = out.find(needle)) != std::string::npos)
                out.replace(pos, needle.size(), "ans" + std::to_string(k));
        }
        CHECK(parse_placeholders(out).empty());
    }
}
