#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace stride {

// Warning channel shared by parsers and validators. Callers that care pass a
// sink; everyone else passes nullptr and the message is dropped.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
    if (sink) sink->push_back(std::move(message));
}

struct Question {
    std::string id;
    std::string text;
    std::vector<std::string> gold_answers;  // evaluation only
    std::optional<int> hop_count;
};

struct Document {
    std::string id;
    std::string title;
    std::string text;
};

// One abstract reasoning step phrased over entity types, never proper nouns.
struct StrategyStep {
    int index = 0;  // 1-based
    std::string description;
};

// A concrete sub-question. Placeholders `#k` in template_text reference the
// answer of sub-question k; depends_on mirrors the parsed placeholder set.
struct SubQuestion {
    int id = 0;  // 1-based plan position
    std::string template_text;
    std::set<int> depends_on;
};

struct Blueprint {
    std::vector<StrategyStep> strategy;
    std::vector<SubQuestion> plan;
};

// Sentinel source id for facts the model states without citing a document.
inline constexpr const char* kInferredSource = "inferred";

struct Fact {
    std::string text;
    std::string source_doc_id = kInferredSource;
};

enum class Action { retrieve, rewrite, answer };

std::string to_string(Action a);
Action action_from_string(const std::string& s);

struct SolvedEntry {
    int sub_question_id = 0;
    std::string answer;
    std::vector<Fact> facts;
    std::string resolved_query;
    Action action_used = Action::retrieve;
};

// Execution state: solved sub-questions with answers, still-pending ids, and
// the per-sub-question history of retrieval queries that produced no facts.
struct ExecutionState {
    std::map<int, SolvedEntry> solved;
    std::set<int> pending;
    std::map<int, std::vector<std::string>> failed;

    bool is_solved(int id) const { return solved.count(id) != 0; }
    const std::vector<std::string>& failed_queries(int id) const;

    // Checks the structural invariants against the given full plan id set.
    // Returns human-readable violations; empty means the state is sound.
    std::vector<std::string> check_invariants(const std::set<int>& plan_ids) const;
};

ExecutionState initial_state(const Blueprint& blueprint);

struct Directive {
    int sub_question_id = 0;
    Action action = Action::retrieve;
    std::string query;
};

struct ResolutionOutcome {
    int sub_question_id = 0;
    enum class Kind { solved, retrieval_failed } kind = Kind::solved;
    SolvedEntry entry;         // populated when kind == solved
    std::string failed_query;  // populated when kind == retrieval_failed
};

struct IterationRecord {
    int iteration = 0;  // t >= 1
    std::set<int> ready_ids;
    std::vector<Directive> directives;
    std::vector<ResolutionOutcome> outcomes;
};

struct Metrics {
    double em = 0.0;
    double f1 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

struct TokenUsage {
    long long prompt = 0;
    long long completion = 0;

    TokenUsage& operator+=(const TokenUsage& other) {
        prompt += other.prompt;
        completion += other.completion;
        return *this;
    }
};

// Full per-question execution record; the raw material for training-data
// construction and for replay/determinism checks.
struct Trajectory {
    Question question;
    Blueprint blueprint;
    std::vector<IterationRecord> iterations;
    std::string final_answer;
    bool used_fallback = false;
    std::optional<Metrics> metrics;
    bool aborted = false;
    TokenUsage usage;
};

// Extracts the set of `#k` placeholder references from a sub-question
// template. A placeholder is `#` followed by digits, delimited on both sides
// by non-identifier characters. `#0` and bare `#` are reported as warnings
// and skipped.
std::set<int> parse_placeholders(const std::string& template_text, Warnings* warnings = nullptr);

// Base class for all error types raised by the engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnresolvedDependency : Error {
    using Error::Error;
};
struct DuplicateOutcome : Error {
    using Error::Error;
};

}  // namespace stride
