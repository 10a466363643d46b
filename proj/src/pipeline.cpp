#include "stride/pipeline.hpp"

#include <algorithm>
#include <future>

#include "stride/metrics.hpp"
#include "stride/session.hpp"

namespace stride {

ExecutionState apply_outcomes(ExecutionState state, const std::vector<ResolutionOutcome>& outcomes) {
    std::set<int> touched;
    for (const auto& o : outcomes)
        if (!touched.insert(o.sub_question_id).second)
            throw DuplicateOutcome("two outcomes for sub-question " + std::to_string(o.sub_question_id));

    for (const auto& o : outcomes) {
        if (o.kind == ResolutionOutcome::Kind::solved) {
            state.solved[o.sub_question_id] = o.entry;
            state.pending.erase(o.sub_question_id);
        } else {
            auto& list = state.failed[o.sub_question_id];
            const std::string key = normalize_query(o.failed_query);
            const bool present = std::any_of(list.begin(), list.end(), [&](const std::string& q) {
                return normalize_query(q) == key;
            });
            if (!present) list.push_back(o.failed_query);
        }
    }
    return state;
}

namespace {

// Resolves one iteration's directives concurrently against a state snapshot;
// outcomes come back ordered by sub-question id regardless of timing.
std::vector<ResolutionOutcome> resolve_all(Executor& executor, const std::vector<Directive>& directives,
                                           const ExecutionState& state, const Index& index, int k,
                                           bool& aborted) {
    std::vector<std::future<ResolutionOutcome>> futures;
    futures.reserve(directives.size());
    for (const auto& d : directives)
        futures.push_back(std::async(std::launch::async, [&executor, &d, &state, &index, k] {
            return executor.resolve(d, state, index, k);
        }));
    std::vector<ResolutionOutcome> outcomes;
    for (auto& f : futures) {
        try {
            outcomes.push_back(f.get());
        } catch (const Error&) {
            // Unrecoverable resolution failure (no Answer line after retry,
            // provider gone): abort this trajectory, keep sibling outcomes.
            aborted = true;
        }
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const ResolutionOutcome& a, const ResolutionOutcome& b) {
                  return a.sub_question_id < b.sub_question_id;
              });
    return outcomes;
}

// Sequential-ablation scheduling: the lowest pending sub-question, always
// retrieved, one per iteration.
std::vector<Directive> sequential_directive(const std::vector<SubQuestion>& plan,
                                            const ExecutionState& state) {
    for (const auto& sq : plan) {
        if (!state.pending.count(sq.id)) continue;
        bool deps_solved = true;
        for (int dep : sq.depends_on) deps_solved = deps_solved && state.is_solved(dep);
        if (!deps_solved) return {};
        Directive d;
        d.sub_question_id = sq.id;
        d.action = Action::retrieve;
        d.query = instantiate(sq, state);
        return {d};
    }
    return {};
}

void attach_metrics_if_gold(Trajectory& t) {
    if (!t.question.gold_answers.empty())
        t.metrics = metrics::score(t.final_answer, t.question.gold_answers);
}

}  // namespace

Trajectory Pipeline::run(const Question& question, const RunConfig& config, Warnings* warnings) const {
    GatewaySession session(gateway_);
    MetaPlanner planner(session, prompts_, !config.no_meta_planner);
    Supervisor supervisor(session, prompts_);
    Executor executor(session, prompts_, !config.no_extractor);

    Trajectory traj;
    traj.question = question;

    ExecutionState state;
    try {
        traj.blueprint = planner.plan_one(question, warnings);
        state = initial_state(traj.blueprint);
    } catch (const Error& e) {
        warn(warnings, std::string("planning failed: ") + e.what());
        traj.aborted = true;
        traj.used_fallback = true;
        auto fb = executor.fallback_answer(question, traj.blueprint, state, index_, config.top_k);
        traj.final_answer = fb.answer;
        traj.usage = session.usage();
        if (config.attach_metrics) attach_metrics_if_gold(traj);
        return traj;
    }

    const auto& plan = traj.blueprint.plan;
    for (int t = 1; t <= config.max_iterations && !state.pending.empty(); ++t) {
        IterationRecord record;
        record.iteration = t;
        record.ready_ids = ready_set(plan, state);
        if (record.ready_ids.empty()) {
            // Can only happen after abort-skips wiped a dependency; the
            // fallback path below still produces an answer.
            traj.iterations.push_back(std::move(record));
            break;
        }

        record.directives = config.no_supervisor ? sequential_directive(plan, state)
                                                 : supervisor.decide(question, plan, state, warnings);

        bool aborted = false;
        record.outcomes =
            resolve_all(executor, record.directives, state, index_, config.top_k, aborted);
        state = apply_outcomes(std::move(state), record.outcomes);
        traj.iterations.push_back(std::move(record));
        if (aborted) {
            traj.aborted = true;
            break;
        }
    }

    if (state.pending.empty() && !state.solved.empty()) {
        traj.final_answer = state.solved.rbegin()->second.answer;
        traj.used_fallback = false;
    } else {
        traj.used_fallback = true;
        if (config.no_fallback) {
            // Fallback ablation: answer the original question with plain
            // single-step RAG instead of the recovery prompt.
            Trajectory rag = run_single_step_rag(question, config, warnings);
            traj.final_answer = rag.final_answer;
            traj.aborted = traj.aborted || rag.aborted;
            traj.usage += rag.usage;
        } else {
            auto fb = executor.fallback_answer(question, traj.blueprint, state, index_, config.top_k);
            traj.final_answer = fb.answer;
            traj.aborted = traj.aborted || fb.aborted;
        }
    }
    if (traj.final_answer.empty() && !traj.used_fallback) {
        // Defensive: a solved plan whose last answer is empty still answers.
        auto fb = executor.fallback_answer(question, traj.blueprint, state, index_, config.top_k);
        traj.final_answer = fb.answer;
        traj.used_fallback = true;
        traj.aborted = traj.aborted || fb.aborted;
    }

    traj.usage += session.usage();
    if (config.attach_metrics) attach_metrics_if_gold(traj);
    return traj;
}

Trajectory Pipeline::run_single_step_rag(const Question& question, const RunConfig& config,
                                         Warnings* warnings) const {
    GatewaySession session(gateway_);
    Executor executor(session, prompts_, !config.no_extractor);

    Trajectory traj;
    traj.question = question;

    SubQuestion whole;
    whole.id = 1;
    whole.template_text = question.text;
    traj.blueprint.plan.push_back(whole);

    ExecutionState state = initial_state(traj.blueprint);

    IterationRecord record;
    record.iteration = 1;
    record.ready_ids = {1};
    Directive d;
    d.sub_question_id = 1;
    d.action = Action::retrieve;
    d.query = question.text;
    record.directives.push_back(d);

    const auto docs = index_.documents(index_.top_k(question.text, config.top_k));
    auto facts = executor.extract(question.text, docs, warnings);
    try {
        if (!facts.empty()) {
            ResolutionOutcome o;
            o.sub_question_id = 1;
            o.kind = ResolutionOutcome::Kind::solved;
            o.entry.sub_question_id = 1;
            o.entry.answer = executor.reason(question.text, facts);
            o.entry.facts = std::move(facts);
            o.entry.resolved_query = question.text;
            o.entry.action_used = Action::retrieve;
            record.outcomes.push_back(o);
            state = apply_outcomes(std::move(state), record.outcomes);
            traj.final_answer = state.solved.at(1).answer;
            traj.used_fallback = false;
        } else {
            // No extractable facts: reason directly over the raw documents.
            ResolutionOutcome o;
            o.sub_question_id = 1;
            o.kind = ResolutionOutcome::Kind::retrieval_failed;
            o.failed_query = question.text;
            record.outcomes.push_back(o);
            state = apply_outcomes(std::move(state), record.outcomes);
            std::vector<Fact> doc_facts;
            for (const auto& doc : docs) doc_facts.push_back(Fact{doc.text, doc.id});
            traj.final_answer = executor.reason(question.text, doc_facts);
            traj.used_fallback = true;
        }
    } catch (const ReasonParseError& e) {
        warn(warnings, std::string("single-step reasoning failed: ") + e.what());
        traj.aborted = true;
        traj.used_fallback = state.pending.count(1) != 0;
    } catch (const ProviderUnavailable& e) {
        warn(warnings, std::string("single-step reasoning unavailable: ") + e.what());
        traj.aborted = true;
        traj.used_fallback = state.pending.count(1) != 0;
    }
    traj.iterations.push_back(std::move(record));

    traj.usage = session.usage();
    if (config.attach_metrics) attach_metrics_if_gold(traj);
    return traj;
}

}  // namespace stride
