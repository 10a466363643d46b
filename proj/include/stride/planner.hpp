#pragma once

#include <optional>

#include "stride/domain.hpp"
#include "stride/prompts.hpp"
#include "stride/session.hpp"

namespace stride {

struct PlanParseError : Error {
    using Error::Error;
};
struct PlanInvalid : Error {
    using Error::Error;
};

struct BlueprintValidation {
    std::optional<Blueprint> blueprint;  // set iff violations is empty
    std::vector<std::string> violations;
};

// Structural validation of a candidate blueprint. Repairs depends_on fields
// that disagree with the `#k` placeholders actually present (placeholders
// win; the repair is reported through the warning channel). Never throws.
BlueprintValidation validate_blueprint(Blueprint candidate, bool require_strategy = true,
                                       Warnings* warnings = nullptr);

// Substitutes every `#k` in the sub-question with the answer of solved
// sub-question k. Throws UnresolvedDependency when a referenced id is not
// solved yet.
std::string instantiate(const SubQuestion& sub_question, const ExecutionState& state);

std::string build_planner_prompt(const PromptLibrary& prompts, const Question& question,
                                 bool include_strategy = true);

// Strategy layer: asks the model for a General Strategy plus Concrete Plan
// and returns validated blueprints.
class MetaPlanner {
public:
    MetaPlanner(GatewaySession& session, const PromptLibrary& prompts, bool include_strategy = true)
        : session_(session), prompts_(prompts), include_strategy_(include_strategy) {}

    // One model call per sample; throws PlanParseError / PlanInvalid after a
    // single format-reminder re-prompt fails.
    std::vector<Blueprint> plan(const Question& question, int sample_count = 1,
                                Warnings* warnings = nullptr);

    Blueprint plan_one(const Question& question, Warnings* warnings = nullptr);

    std::string build_user_prompt(const Question& question) const;

private:
    Blueprint parse_response(const std::string& text, Warnings* warnings) const;

    GatewaySession& session_;
    const PromptLibrary& prompts_;
    bool include_strategy_;
};

}  // namespace stride
