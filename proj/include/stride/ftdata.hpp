#pragma once

#include <cstdint>
#include <filesystem>

#include "stride/domain.hpp"
#include "stride/gateway.hpp"
#include "stride/prompts.hpp"
#include "stride/retrieval.hpp"

namespace stride::ft {

// Outcome signals used to filter trajectories into training data.
struct TrajectoryScore {
    bool correct = false;  // exact match with the gold answer
    double f1 = 0.0;
    int iterations = 0;
    bool failure_flag = false;  // any failed retrieval, abort, or fallback
};

TrajectoryScore score_trajectory(const Trajectory& trajectory);

struct PlanPreferencePair {
    std::string prompt;
    std::string chosen;
    std::string rejected;
};

enum class SftTag { supervisor_rewrite, extractor, reasoner };
std::string to_string(SftTag tag);

struct SftExample {
    SftTag module_tag = SftTag::reasoner;
    std::string prompt;
    std::string completion;
};

// Text the planner is trained to emit: the blueprint in its structured
// output format.
std::string serialize_blueprint(const Blueprint& blueprint);

// Token-level F1 between the two concrete plans (sub-question texts joined in
// id order); 1.0 means identical wording.
double plan_similarity(const Blueprint& a, const Blueprint& b);

// Preference pairs over diverse plans for one question. A pair qualifies when
// one plan clearly beats the other (correct vs incorrect, or F1 gap > 0.3)
// and the two plans are sufficiently distinct (similarity < 0.8). All
// qualifying pairs are emitted, ordered by decreasing outcome gap
// (correctness, then F1 gap, then iteration gap, then failure flag).
std::vector<PlanPreferencePair> build_plan_pairs(
    const Question& question, const std::vector<std::pair<Blueprint, Trajectory>>& runs,
    const PromptLibrary& prompts);

// Rewrites that causally enabled a correct answer: issued with a non-empty
// failure history, executed, and solved in that same resolution. First-attempt
// "rewrites" and never-executed rewrites are excluded.
std::vector<SftExample> filter_rewrite_examples(const std::vector<Trajectory>& trajectories,
                                                const PromptLibrary& prompts);

// Minimal-fact extraction targets: a frozen selector model picks the strict
// subset of facts required per solved retrieval with more than one fact.
// Documents are reconstructed by re-running retrieval on the recorded query.
std::vector<SftExample> build_extractor_examples(const std::vector<Trajectory>& trajectories,
                                                 Gateway& selector, const Index& index, int k,
                                                 const PromptLibrary& prompts,
                                                 Warnings* warnings = nullptr);

// Concise-answer targets: verbose near-misses (F1 > 0.3, not exact, length
// over 1.5x the gold) mapped to the gold answer, balanced with twice as many
// seeded samples of already-exact answers.
std::vector<SftExample> build_reasoner_examples(const std::vector<Trajectory>& trajectories,
                                                uint64_t rng_seed, const PromptLibrary& prompts,
                                                Warnings* warnings = nullptr);

struct Manifest {
    size_t plan_pairs = 0;
    size_t supervisor_sft = 0;
    size_t extractor_sft = 0;
    size_t reasoner_sft = 0;
};

// Runs all four builders over a trajectory log (grouping plan samples by
// question id) and writes plan_dpo.jsonl, supervisor_sft.jsonl,
// extractor_sft.jsonl, reasoner_sft.jsonl and manifest.json into out_dir.
Manifest write_training_files(const std::vector<Trajectory>& trajectories, Gateway& selector,
                              const Index& index, int k, const PromptLibrary& prompts,
                              uint64_t rng_seed, const std::filesystem::path& out_dir,
                              Warnings* warnings = nullptr);

}  // namespace stride::ft
