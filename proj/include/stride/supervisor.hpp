#pragma once

#include "stride/domain.hpp"
#include "stride/prompts.hpp"
#include "stride/session.hpp"

namespace stride {

// Pending sub-questions whose dependencies are all solved.
std::set<int> ready_set(const std::vector<SubQuestion>& plan, const ExecutionState& state);

// Comparison key for rewrite-freshness checks: lowercase, whitespace collapsed.
std::string normalize_query(const std::string& query);

struct DirectiveValidation {
    std::vector<Directive> accepted;
    std::vector<std::string> violations;
};

// Enforces the scheduling rules on model-proposed directives:
//   - directives for non-ready ids are dropped;
//   - a rewrite whose query matches a failed query is rejected;
//   - a retrieve for an id with failed attempts is coerced to rewrite when the
//     query is fresh, rejected otherwise;
//   - empty queries and duplicate ids (first kept) are rejected.
DirectiveValidation validate_directives(const std::vector<Directive>& directives,
                                        const std::vector<SubQuestion>& plan,
                                        const ExecutionState& state);

// Rule-based scheduling used when the model output is unusable, and as the
// donor for ready ids the model left uncovered. Sub-questions whose template
// references earlier answers and contains a comparison/intersection keyword
// get `answer`; otherwise first attempts retrieve, later attempts rewrite
// with a mechanical reformulation guaranteed fresh against the failed list.
// Ids with no fresh reformulation left are skipped (reported as warnings).
std::vector<Directive> deterministic_policy(const std::vector<SubQuestion>& plan,
                                            const ExecutionState& state,
                                            Warnings* warnings = nullptr);

std::string build_supervisor_prompt(const PromptLibrary& prompts, const Question& question,
                                    const std::vector<SubQuestion>& plan,
                                    const ExecutionState& state);

class Supervisor {
public:
    Supervisor(GatewaySession& session, const PromptLibrary& prompts)
        : session_(session), prompts_(prompts) {}

    // One directive per ready id. Model-first: unusable model output falls
    // back (after a single re-prompt) to the deterministic policy, so the
    // engine always makes progress when progress is possible.
    std::vector<Directive> decide(const Question& question, const std::vector<SubQuestion>& plan,
                                  const ExecutionState& state, Warnings* warnings = nullptr);

    std::string build_user_prompt(const Question& question, const std::vector<SubQuestion>& plan,
                                  const ExecutionState& state) const;

private:
    std::vector<Directive> parse_response(const std::string& text) const;

    GatewaySession& session_;
    const PromptLibrary& prompts_;
};

}  // namespace stride
