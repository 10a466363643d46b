#pragma once

#include "stride/domain.hpp"
#include "stride/executor.hpp"
#include "stride/planner.hpp"
#include "stride/prompts.hpp"
#include "stride/retrieval.hpp"
#include "stride/supervisor.hpp"

namespace stride {

struct RunConfig {
    int max_iterations = 5;
    int top_k = 5;
    // Ablation switches.
    bool no_meta_planner = false;   // planner prompted without the strategy level
    bool no_supervisor = false;     // strict sequential execution, always retrieve
    bool no_extractor = false;      // reasoner consumes raw documents
    bool no_fallback = false;       // unresolved runs answer via single-step RAG
    bool attach_metrics = true;     // score against gold answers when present
};

// Applies one iteration's outcomes: solved entries move pending -> solved,
// failed queries are appended (once) to the id's failed list. Throws
// DuplicateOutcome when two outcomes target the same id.
ExecutionState apply_outcomes(ExecutionState state, const std::vector<ResolutionOutcome>& outcomes);

// The iteration-loop coordinator: plan, schedule, resolve in parallel, apply,
// terminate, pick the final answer, record the trajectory.
class Pipeline {
public:
    Pipeline(Gateway& gateway, const Index& index, const PromptLibrary& prompts)
        : gateway_(gateway), index_(index), prompts_(prompts) {}

    Trajectory run(const Question& question, const RunConfig& config = {},
                   Warnings* warnings = nullptr) const;

    // Baseline: one retrieval with the original question, extract, reason.
    Trajectory run_single_step_rag(const Question& question, const RunConfig& config = {},
                                   Warnings* warnings = nullptr) const;

private:
    Gateway& gateway_;
    const Index& index_;
    const PromptLibrary& prompts_;
};

}  // namespace stride
