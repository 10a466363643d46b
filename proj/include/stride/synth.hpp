#pragma once

#include <cstdint>
#include <memory>

#include "stride/domain.hpp"
#include "stride/gateway.hpp"
#include "stride/retrieval.hpp"

namespace stride::synth {

struct InsufficientKG : Error {
    using Error::Error;
};

struct SynthEntity {
    std::string id;
    std::string name;
    std::string type;  // person | city | book | film | year
};

struct SynthRelation {
    std::string subject;    // entity name
    std::string predicate;  // wrote | based_on | born_in_year | lives_in
    std::string object;     // entity name
};

struct SynthKG {
    std::vector<SynthEntity> entities;
    std::vector<SynthRelation> relations;
    uint64_t seed = 0;
};

enum class Pattern { sequential, parallel_compare, fork_join };

std::string to_string(Pattern p);

// Ground truth for one sub-question of a generated question: the answer, the
// fact the extractor should produce, and where that fact lives.
struct GoldStep {
    int id = 0;
    std::string gold_answer;
    std::string fact_sentence;
    std::string fact_doc_id;  // corpus doc id, or "inferred" for reasoning steps
    bool reasoning = false;   // resolved via the answer action
};

struct SynthQuestion {
    Question question;
    Blueprint gold_blueprint;
    Pattern pattern = Pattern::sequential;
    int expected_iterations = 0;  // dependency-DAG depth of the gold plan
    std::vector<GoldStep> gold_steps;
};

struct SynthCounts {
    int entities = 60;
    int sequential_q = 4;
    int parallel_q = 4;
    int forkjoin_q = 4;
};

struct SynthOutput {
    SynthKG kg;
    std::vector<Document> corpus;
    std::vector<SynthQuestion> questions;
};

// Dependency-DAG depth: length of the longest chain in the plan.
int dag_depth(const Blueprint& blueprint);

// Embedding dimension the harness self-check and harness tests use.
inline constexpr int kHarnessDim = 256;

// Deterministically synthesizes a knowledge graph, a corpus (one document per
// relation plus 3x distractors), and multi-hop questions with gold blueprints
// and answers. Post-condition (verified internally, with a bounded number of
// reseeded retries): for every retrieval sub-question, the needed relation
// document ranks in the hash-embedder top-3 for the instantiated query text.
// Throws InsufficientKG when the entity budget cannot cover the questions.
SynthOutput generate(uint64_t seed, const SynthCounts& counts);

struct AdversarialSpec {
    // Instantiated queries whose first extraction attempt yields NONE; the
    // reformulated query then succeeds.
    std::set<std::string> fail_first;
    // "questionId#subQuestionId" keys whose extraction never succeeds.
    std::set<std::string> fail_always;
};

// Fails the first phrasing of sub-question 1 of every question.
AdversarialSpec default_adversarial_spec(const SynthOutput& out);

// Scripted rules that make every generated question answerable: the planner
// returns the gold blueprint, the supervisor schedules like the deterministic
// policy, the extractor reads facts off the knowledge graph, the reasoner
// answers from it. Built by simulating the engine's own execution walk.
std::vector<ScriptedProvider::Rule> cooperative_rules(const SynthOutput& out);

// Like cooperative_rules, but extraction fails per the adversarial spec,
// exercising rewrite recovery and (with fail_always) the fallback path.
std::vector<ScriptedProvider::Rule> adversarial_rules(const SynthOutput& out,
                                                      const AdversarialSpec& spec);

std::shared_ptr<ScriptedProvider> cooperative_provider(const SynthOutput& out);
std::shared_ptr<ScriptedProvider> adversarial_provider(const SynthOutput& out,
                                                       const AdversarialSpec& spec);

// The harness corpus indexed with the hash embedder at kHarnessDim.
Index build_index(const SynthOutput& out);

}  // namespace stride::synth
