#pragma once

#include "stride/domain.hpp"
#include "stride/prompts.hpp"
#include "stride/retrieval.hpp"
#include "stride/session.hpp"

namespace stride {

struct ExtractParseError : Error {
    using Error::Error;
};
struct ReasonParseError : Error {
    using Error::Error;
};

// Union of facts across solved entries, in sub-question-id order,
// de-duplicated by whitespace-normalized text.
std::vector<Fact> collected_fact_union(const ExecutionState& state);

// Parses the extractor's mandated output format: numbered lines
// "1. <fact> (doc <id>)", or the single token NONE. Uncited lines get the
// "inferred" source; anything unrecognizable yields an empty list.
std::vector<Fact> parse_fact_lines(const std::string& text, Warnings* warnings = nullptr);

// Finds the last "Answer:" line of a reasoner reply.
std::optional<std::string> parse_answer_line(const std::string& text);

// Execution layer: resolves directives through retrieve -> extract -> reason,
// or direct reasoning over accumulated facts; provides the best-effort
// fallback answer for runs that end with unsolved sub-questions.
class Executor {
public:
    Executor(GatewaySession& session, const PromptLibrary& prompts, bool use_extractor = true)
        : session_(session), prompts_(prompts), use_extractor_(use_extractor) {}

    std::vector<Fact> extract(const std::string& query, const std::vector<Document>& docs,
                              Warnings* warnings = nullptr);

    // Throws ReasonParseError when the model produces no Answer line twice.
    std::string reason(const std::string& query, const std::vector<Fact>& context_facts);

    ResolutionOutcome resolve(const Directive& directive, const ExecutionState& state,
                              const Index& index, int k, Warnings* warnings = nullptr);

    struct FallbackResult {
        std::string answer;
        bool aborted = false;
    };

    // Never throws: retrieves with a query built from the facts of the
    // highest-id solved entry (or the question itself when nothing solved)
    // and asks for a best-effort answer over everything collected.
    FallbackResult fallback_answer(const Question& question, const Blueprint& blueprint,
                                   const ExecutionState& state, const Index& index, int k);

    std::string build_extractor_prompt(const std::string& query, const std::vector<Document>& docs) const;
    std::string build_reasoner_prompt(const std::string& query, const std::vector<Fact>& facts) const;

private:
    GatewaySession& session_;
    const PromptLibrary& prompts_;
    bool use_extractor_;
};

// Query the fallback reasoner retrieves with: concatenated fact texts of the
// highest-id solved entry, truncated to 256 characters; the question text
// when nothing is solved yet.
std::string fallback_retrieval_query(const Question& question, const ExecutionState& state);

}  // namespace stride
