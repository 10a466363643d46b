#include "stride/domain.hpp"

#include <cctype>

namespace stride {

std::string to_string(Action a) {
    switch (a) {
        case Action::retrieve: return "retrieve";
        case Action::rewrite: return "rewrite";
        case Action::answer: return "answer";
    }
    return "retrieve";
}

Action action_from_string(const std::string& s) {
    if (s == "retrieve") return Action::retrieve;
    if (s == "rewrite") return Action::rewrite;
    if (s == "answer") return Action::answer;
    throw Error("unknown action: " + s);
}

const std::vector<std::string>& ExecutionState::failed_queries(int id) const {
    static const std::vector<std::string> empty;
    auto it = failed.find(id);
    return it == failed.end() ? empty : it->second;
}

std::vector<std::string> ExecutionState::check_invariants(const std::set<int>& plan_ids) const {
    std::vector<std::string> violations;
    std::set<int> solved_ids;
    for (const auto& [id, entry] : solved) {
        solved_ids.insert(id);
        if (pending.count(id))
            violations.push_back("id " + std::to_string(id) + " both solved and pending");
        if (entry.answer.empty())
            violations.push_back("solved entry " + std::to_string(id) + " has empty answer");
    }
    std::set<int> all;
    all.insert(solved_ids.begin(), solved_ids.end());
    all.insert(pending.begin(), pending.end());
    if (all != plan_ids) violations.push_back("solved + pending do not partition the plan id set");
    for (const auto& [id, queries] : failed) {
        if (!pending.count(id) && !solved_ids.count(id))
            violations.push_back("failed map references unknown id " + std::to_string(id));
        std::set<std::string> seen;
        for (const auto& q : queries)
            if (!seen.insert(q).second)
                violations.push_back("duplicate failed query for id " + std::to_string(id));
    }
    return violations;
}

ExecutionState initial_state(const Blueprint& blueprint) {
    ExecutionState state;
    for (const auto& sq : blueprint.plan) state.pending.insert(sq.id);
    return state;
}

std::set<int> parse_placeholders(const std::string& text, Warnings* warnings) {
    auto is_ident = [](unsigned char c) { return std::isalnum(c) != 0; };
    std::set<int> refs;
    for (size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '#') continue;
        if (i > 0 && (is_ident(text[i - 1]) || text[i - 1] == '#')) continue;
        size_t j = i + 1;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        if (j == i + 1) {
            warn(warnings, "malformed placeholder at offset " + std::to_string(i) + ": '#' without digits");
            continue;
        }
        int k = std::stoi(text.substr(i + 1, j - i - 1));
        if (k < 1) {
            warn(warnings, "placeholder #" + std::to_string(k) + " ignored: ids are 1-based");
        } else {
            refs.insert(k);
        }
        i = j - 1;
    }
    return refs;
}

}  // namespace stride
