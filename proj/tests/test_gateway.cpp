#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stride/gateway.hpp"
#include "stride/json_io.hpp"

using namespace stride;
namespace fs = std::filesystem;

namespace {

GatewayConfig fast_config() {
    GatewayConfig cfg;
    cfg.sleep_on_retry = false;
    return cfg;
}

ChatRequest make_request(Role role, const std::string& user) {
    ChatRequest req;
    req.role_tag = role;
    req.user_prompt = user;
    return req;
}

}  // namespace

TEST_CASE("scripted provider matches role and substrings, first rule wins") {
    std::vector<ScriptedProvider::Rule> rules = {
        {Role::reasoner, {"capital of France"}, "Answer: Paris"},
        {Role::reasoner, {"capital"}, "Answer: generic"},
        {Role::extractor, {"capital"}, "1. a fact (doc d1)"},
    };
    Gateway gw(std::make_shared<ScriptedProvider>(rules), fast_config());

    CHECK(gw.complete(make_request(Role::reasoner, "What is the capital of France?")).text ==
          "Answer: Paris");
    CHECK(gw.complete(make_request(Role::reasoner, "what capital?")).text == "Answer: generic");
    // role filter applies
    CHECK(gw.complete(make_request(Role::extractor, "the capital docs")).text ==
          "1. a fact (doc d1)");
    CHECK_THROWS_AS(gw.complete(make_request(Role::planner, "capital of France")),
                    ProviderUnavailable);
}

TEST_CASE("scripted provider is deterministic and usage is additive") {
    std::vector<ScriptedProvider::Rule> rules = {{Role::reasoner, {}, "four words in reply"}};
    Gateway gw(std::make_shared<ScriptedProvider>(rules), fast_config());

    auto r1 = gw.complete(make_request(Role::reasoner, "one two three"));
    auto r2 = gw.complete(make_request(Role::reasoner, "one two three"));
    CHECK(r1.text == r2.text);
    CHECK(r1.token_usage.prompt == 3);
    CHECK(r1.token_usage.completion == 4);

    auto snap = gw.usage();
    CHECK(snap.calls == 2);
    CHECK(snap.prompt_tokens == 6);
    CHECK(snap.completion_tokens == 8);
}

TEST_CASE("empty script always errors; load_script validates records") {
    auto dir = fs::temp_directory_path() / "stride_gw_test";
    fs::create_directories(dir);

    {
        std::ofstream(dir / "empty.jsonl").close();
        auto provider = load_script(dir / "empty.jsonl");
        Gateway gw(provider, fast_config());
        CHECK_THROWS_AS(gw.complete(make_request(Role::planner, "x")), ProviderUnavailable);
    }
    {
        std::ofstream out(dir / "bad.jsonl");
        out << R"({"role_tag": "planner", "match": [], "response": "ok"})" << "\n";
        out << "{not json}\n";
        out.close();
        CHECK_THROWS_AS(load_script(dir / "bad.jsonl"), ScriptParseError);
    }
    {
        std::ofstream out(dir / "badrole.jsonl");
        out << R"({"role_tag": "chef", "match": [], "response": "ok"})" << "\n";
        out.close();
        try {
            load_script(dir / "badrole.jsonl");
            FAIL("expected ScriptParseError");
        } catch (const ScriptParseError& e) {
            CHECK(std::string(e.what()).find("record 1") != std::string::npos);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("script save/load round-trip") {
    auto dir = fs::temp_directory_path() / "stride_gw_rt";
    fs::create_directories(dir);
    std::vector<ScriptedProvider::Rule> rules = {
        {Role::planner, {"needle one", "needle two"}, "resp 1"},
        {Role::fallback, {}, "resp 2\nAnswer: x"},
    };
    save_script(rules, dir / "s.jsonl");
    auto provider = load_script(dir / "s.jsonl");
    REQUIRE(provider->rules().size() == 2);
    CHECK(provider->rules()[0].match.size() == 2);
    CHECK(provider->rules()[1].response == "resp 2\nAnswer: x");
    fs::remove_all(dir);
}

namespace {

// Provider that fails a fixed number of times before succeeding.
class FlakyProvider : public Provider {
public:
    explicit FlakyProvider(int failures) : remaining_(failures) {}
    ChatResponse complete(const ChatRequest&) override {
        if (remaining_-- > 0) throw ProviderUnavailable("transient");
        ChatResponse r;
        r.text = "ok";
        return r;
    }
    bool retryable() const override { return true; }
    int calls_seen() const { return calls_; }

private:
    int remaining_;
    int calls_ = 0;
};

}  // namespace

TEST_CASE("transient failures are retried up to the attempt budget") {
    {
        Gateway gw(std::make_shared<FlakyProvider>(2), fast_config());
        CHECK(gw.complete(make_request(Role::planner, "x")).text == "ok");
    }
    {
        Gateway gw(std::make_shared<FlakyProvider>(3), fast_config());
        CHECK_THROWS_AS(gw.complete(make_request(Role::planner, "x")), ProviderUnavailable);
    }
}

TEST_CASE("request validation") {
    Gateway gw(std::make_shared<ScriptedProvider>(std::vector<ScriptedProvider::Rule>{}),
               fast_config());
    ChatRequest req = make_request(Role::planner, "x");
    req.temperature = -0.5;
    CHECK_THROWS_AS(gw.complete(req), Error);
    req.temperature = 1.0;
    req.max_tokens = 0;
    CHECK_THROWS_AS(gw.complete(req), Error);
}

TEST_CASE("role defaults come from gateway config") {
    // paper-fixed defaults: temperature 1.0, max generation 512
    GatewayConfig cfg = fast_config();
    CHECK(cfg.temperature == 1.0);
    CHECK(cfg.max_tokens == 512);
    CHECK(cfg.max_attempts == 3);
    CHECK(cfg.backoff_base.count() == 500);
}
