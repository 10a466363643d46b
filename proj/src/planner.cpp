#include "stride/planner.hpp"

#include <algorithm>
#include <cctype>
#include <future>

#include "stride/json_io.hpp"

namespace stride {

BlueprintValidation validate_blueprint(Blueprint candidate, bool require_strategy, Warnings* warnings) {
    BlueprintValidation result;
    auto& violations = result.violations;

    if (candidate.plan.empty()) violations.push_back("concrete plan is empty");
    if (require_strategy && candidate.strategy.empty()) violations.push_back("general strategy is empty");

    for (size_t i = 0; i < candidate.strategy.size(); ++i) {
        candidate.strategy[i].index = static_cast<int>(i) + 1;
        if (candidate.strategy[i].description.empty())
            violations.push_back("strategy step " + std::to_string(i + 1) + " is empty");
    }

    for (size_t i = 0; i < candidate.plan.size(); ++i) {
        auto& sq = candidate.plan[i];
        const int expected = static_cast<int>(i) + 1;
        if (sq.id != expected)
            violations.push_back("sub-question ids must be 1..n with no gaps (position " +
                                 std::to_string(expected) + " has id " + std::to_string(sq.id) + ")");
        if (sq.template_text.empty())
            violations.push_back("sub-question " + std::to_string(sq.id) + " has empty text");

        const std::set<int> parsed = parse_placeholders(sq.template_text, warnings);
        if (parsed != sq.depends_on) {
            warn(warnings, "sub-question " + std::to_string(sq.id) +
                               ": depends_on repaired to match #k placeholders");
            sq.depends_on = parsed;
        }
        for (int dep : sq.depends_on)
            if (dep >= sq.id)
                violations.push_back("sub-question " + std::to_string(sq.id) +
                                     " references #" + std::to_string(dep) +
                                     " which is not an earlier sub-question");
    }

    if (violations.empty()) result.blueprint = std::move(candidate);
    return result;
}

std::string instantiate(const SubQuestion& sub_question, const ExecutionState& state) {
    for (int dep : sub_question.depends_on)
        if (!state.is_solved(dep))
            throw UnresolvedDependency("sub-question " + std::to_string(sub_question.id) +
                                       " needs unsolved dependency " + std::to_string(dep));
    const std::string& text = sub_question.template_text;
    std::string out;
    out.reserve(text.size());
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '#' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])) &&
            (i == 0 || (!std::isalnum(static_cast<unsigned char>(text[i - 1])) && text[i - 1] != '#'))) {
            size_t j = i + 1;
            while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
            const int k = std::stoi(text.substr(i + 1, j - i - 1));
            auto it = state.solved.find(k);
            if (k >= 1 && it != state.solved.end()) {
                out += it->second.answer;
                i = j - 1;
                continue;
            }
        }
        out.push_back(text[i]);
    }
    return out;
}

std::string build_planner_prompt(const PromptLibrary& prompts, const Question& question,
                                 bool include_strategy) {
    return prompts.render(include_strategy ? "planner_user" : "planner_user_direct",
                          {{"question", question.text}});
}

std::string MetaPlanner::build_user_prompt(const Question& question) const {
    return build_planner_prompt(prompts_, question, include_strategy_);
}

namespace {

// Pulls the outermost JSON object out of free-form model text.
json extract_json_object(const std::string& text) {
    auto start = text.find('{');
    auto end = text.rfind('}');
    if (start == std::string::npos || end == std::string::npos || end < start)
        throw PlanParseError("no JSON object in planner response");
    try {
        return json::parse(text.substr(start, end - start + 1));
    } catch (const json::parse_error& e) {
        throw PlanParseError(std::string("planner response is not valid JSON: ") + e.what());
    }
}

}  // namespace

Blueprint MetaPlanner::parse_response(const std::string& text, Warnings* warnings) const {
    json j = extract_json_object(text);
    Blueprint bp;
    if (include_strategy_ && j.contains("general_strategy")) {
        int idx = 0;
        for (const auto& step : j["general_strategy"]) {
            StrategyStep s;
            s.index = ++idx;
            s.description = step.is_string() ? step.get<std::string>() : step.dump();
            bp.strategy.push_back(std::move(s));
        }
    }
    if (!j.contains("concrete_plan")) throw PlanParseError("planner response lacks concrete_plan");
    for (const auto& item : j["concrete_plan"]) {
        SubQuestion sq;
        try {
            sq.id = item.at("id").get<int>();
            sq.template_text = item.at("question").get<std::string>();
        } catch (const json::exception& e) {
            throw PlanParseError(std::string("malformed concrete_plan entry: ") + e.what());
        }
        if (item.contains("depends_on")) sq.depends_on = item["depends_on"].get<std::set<int>>();
        bp.plan.push_back(std::move(sq));
    }
    (void)warnings;
    return bp;
}

Blueprint MetaPlanner::plan_one(const Question& question, Warnings* warnings) {
    const std::string system = prompts_.raw("planner_system");
    const std::string user = build_user_prompt(question);

    std::string violation_note;
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string prompt = user;
        if (attempt == 1)
            prompt += prompts_.render("planner_retry", {{"violations", violation_note}});
        std::string text;
        try {
            text = session_.complete(Role::planner, system, prompt).text;
        } catch (const ProviderUnavailable& e) {
            throw PlanParseError(std::string("planner unavailable: ") + e.what());
        }
        try {
            Blueprint candidate = parse_response(text, warnings);
            BlueprintValidation validated =
                validate_blueprint(std::move(candidate), include_strategy_, warnings);
            if (validated.blueprint) return *std::move(validated.blueprint);
            violation_note.clear();
            for (const auto& v : validated.violations) violation_note += "- " + v + "\n";
            if (attempt == 1) throw PlanInvalid("blueprint invalid after re-prompt:\n" + violation_note);
        } catch (const PlanParseError& e) {
            if (attempt == 1) throw;
            violation_note = std::string("- ") + e.what() + "\n";
        }
    }
    throw PlanInvalid("unreachable");
}

std::vector<Blueprint> MetaPlanner::plan(const Question& question, int sample_count, Warnings* warnings) {
    if (sample_count <= 1) return {plan_one(question, warnings)};
    // Samples fan out concurrently; the gateway's in-flight limit applies.
    // Each sample gets its own warning sink, merged in sample order so the
    // output stays deterministic.
    std::vector<Warnings> sample_warnings(sample_count);
    std::vector<std::future<Blueprint>> futures;
    futures.reserve(sample_count);
    for (int i = 0; i < sample_count; ++i) {
        Warnings* sink = warnings ? &sample_warnings[i] : nullptr;
        futures.push_back(
            std::async(std::launch::async, [this, &question, sink] { return plan_one(question, sink); }));
    }
    std::vector<Blueprint> out;
    out.reserve(sample_count);
    for (auto& f : futures) out.push_back(f.get());
    if (warnings)
        for (auto& w : sample_warnings) warnings->insert(warnings->end(), w.begin(), w.end());
    return out;
}

}  // namespace stride
