#include "stride/supervisor.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "stride/json_io.hpp"
#include "stride/planner.hpp"

namespace stride {

std::set<int> ready_set(const std::vector<SubQuestion>& plan, const ExecutionState& state) {
    std::set<int> ready;
    for (const auto& sq : plan) {
        if (!state.pending.count(sq.id)) continue;
        bool ok = true;
        for (int dep : sq.depends_on)
            if (!state.is_solved(dep)) {
                ok = false;
                break;
            }
        if (ok) ready.insert(sq.id);
    }
    return ready;
}

std::string normalize_query(const std::string& query) {
    std::istringstream in(query);
    std::string token;
    std::string out;
    while (in >> token) {
        for (char& c : token) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        if (!out.empty()) out.push_back(' ');
        out += token;
    }
    return out;
}

namespace {

bool query_in_failed(const std::string& query, const std::vector<std::string>& failed) {
    const std::string needle = normalize_query(query);
    return std::any_of(failed.begin(), failed.end(),
                       [&](const std::string& f) { return normalize_query(f) == needle; });
}

const SubQuestion* find_sub_question(const std::vector<SubQuestion>& plan, int id) {
    for (const auto& sq : plan)
        if (sq.id == id) return &sq;
    return nullptr;
}

// Keyword test for sub-questions resolvable by pure reasoning over known
// answers (comparisons, intersections).
bool reasoning_pattern(const std::string& template_text) {
    std::string lower = template_text;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const char* kw : {"older", "both", "same", "which of"})
        if (lower.find(kw) != std::string::npos) return true;
    return false;
}

}  // namespace

DirectiveValidation validate_directives(const std::vector<Directive>& directives,
                                        const std::vector<SubQuestion>& plan,
                                        const ExecutionState& state) {
    DirectiveValidation result;
    const std::set<int> ready = ready_set(plan, state);
    std::set<int> seen;
    for (Directive d : directives) {
        if (!ready.count(d.sub_question_id)) {
            result.violations.push_back("directive for non-ready id " +
                                        std::to_string(d.sub_question_id) + " dropped");
            continue;
        }
        if (!seen.insert(d.sub_question_id).second) {
            result.violations.push_back("duplicate directive for id " +
                                        std::to_string(d.sub_question_id) + " dropped");
            continue;
        }
        if (d.query.empty()) {
            result.violations.push_back("empty query for id " + std::to_string(d.sub_question_id));
            seen.erase(d.sub_question_id);
            continue;
        }
        const auto& failed = state.failed_queries(d.sub_question_id);
        if (d.action == Action::rewrite && query_in_failed(d.query, failed)) {
            result.violations.push_back("rewrite for id " + std::to_string(d.sub_question_id) +
                                        " repeats a failed query");
            seen.erase(d.sub_question_id);
            continue;
        }
        if (d.action == Action::retrieve && !failed.empty()) {
            if (query_in_failed(d.query, failed)) {
                result.violations.push_back("retrieve for id " + std::to_string(d.sub_question_id) +
                                            " repeats a failed query");
                seen.erase(d.sub_question_id);
                continue;
            }
            result.violations.push_back("retrieve for id " + std::to_string(d.sub_question_id) +
                                        " coerced to rewrite (failed attempts exist)");
            d.action = Action::rewrite;
        }
        result.accepted.push_back(std::move(d));
    }
    return result;
}

std::vector<Directive> deterministic_policy(const std::vector<SubQuestion>& plan,
                                            const ExecutionState& state, Warnings* warnings) {
    std::vector<Directive> directives;
    for (int id : ready_set(plan, state)) {
        const SubQuestion* sq = find_sub_question(plan, id);
        if (!sq) continue;
        const std::string text = instantiate(*sq, state);
        const auto& failed = state.failed_queries(id);

        Directive d;
        d.sub_question_id = id;
        if (!sq->depends_on.empty() && reasoning_pattern(sq->template_text)) {
            d.action = Action::answer;
            d.query = text;
        } else if (failed.empty()) {
            d.action = Action::retrieve;
            d.query = text;
        } else {
            d.action = Action::rewrite;
            std::string dep_answers;
            for (int dep : sq->depends_on)
                if (state.is_solved(dep)) dep_answers += " " + state.solved.at(dep).answer;
            std::string candidate = text + dep_answers;
            if (query_in_failed(candidate, failed)) candidate = "facts about: " + candidate;
            if (query_in_failed(candidate, failed)) {
                warn(warnings, "rewrite exhausted for sub-question " + std::to_string(id) +
                                   "; skipping this iteration");
                continue;
            }
            d.query = candidate;
        }
        directives.push_back(std::move(d));
    }
    return directives;
}

std::string build_supervisor_prompt(const PromptLibrary& prompts, const Question& question,
                                    const std::vector<SubQuestion>& plan,
                                    const ExecutionState& state) {
    return prompts.render("supervisor_user",
                          {{"question", question.text},
                           {"plan", format_plan_lines(plan)},
                           {"solved", format_solved_lines(state)},
                           {"pending", format_id_set(state.pending)},
                           {"ready", format_id_set(ready_set(plan, state))},
                           {"failed_section", format_failed_section(state)}});
}

std::string Supervisor::build_user_prompt(const Question& question, const std::vector<SubQuestion>& plan,
                                          const ExecutionState& state) const {
    return build_supervisor_prompt(prompts_, question, plan, state);
}

std::vector<Directive> Supervisor::parse_response(const std::string& text) const {
    auto start = text.find('{');
    auto end = text.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start)
        throw Error("no JSON object in supervisor response");
    json j = json::parse(text.substr(start, end - start + 1));
    std::vector<Directive> out;
    for (const auto& item : j.at("directives")) out.push_back(item.get<Directive>());
    return out;
}

std::vector<Directive> Supervisor::decide(const Question& question, const std::vector<SubQuestion>& plan,
                                          const ExecutionState& state, Warnings* warnings) {
    const std::set<int> ready = ready_set(plan, state);
    const std::string system = prompts_.raw("supervisor_system");
    const std::string user = build_user_prompt(question, plan, state);

    std::vector<Directive> accepted;
    std::set<int> covered;
    // One re-prompt on unparseable output (parse error or provider failure);
    // partially valid output is kept and only the gaps are filled below.
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string prompt = user;
        if (attempt == 1)
            prompt += "\n\nYour previous reply was unusable. Reply with exactly the JSON shape "
                      "requested, one directive per ready sub-question.";
        try {
            auto proposed = parse_response(session_.complete(Role::supervisor, system, prompt).text);
            // The model may leave placeholders in queries; ground them now.
            for (auto& d : proposed) {
                SubQuestion q;
                q.id = d.sub_question_id;
                q.template_text = d.query;
                q.depends_on = {};  // substitution only; missing deps left as-is
                d.query = instantiate(q, state);
            }
            DirectiveValidation validated = validate_directives(proposed, plan, state);
            if (warnings)
                warnings->insert(warnings->end(), validated.violations.begin(),
                                 validated.violations.end());
            for (auto& d : validated.accepted)
                if (covered.insert(d.sub_question_id).second) accepted.push_back(std::move(d));
            break;
        } catch (const std::exception& e) {
            warn(warnings, std::string("supervisor output unusable: ") + e.what());
        }
    }

    // Fill any ready ids the model failed to cover from the deterministic
    // policy, so every schedulable sub-question gets exactly one directive.
    if (covered.size() < ready.size()) {
        for (auto& d : deterministic_policy(plan, state, warnings)) {
            if (covered.count(d.sub_question_id)) continue;
            covered.insert(d.sub_question_id);
            accepted.push_back(std::move(d));
        }
    }

    std::sort(accepted.begin(), accepted.end(),
              [](const Directive& a, const Directive& b) { return a.sub_question_id < b.sub_question_id; });
    return accepted;
}

}  // namespace stride
