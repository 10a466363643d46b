#include "stride/executor.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "stride/supervisor.hpp"

namespace stride {

std::vector<Fact> collected_fact_union(const ExecutionState& state) {
    std::vector<Fact> facts;
    std::set<std::string> seen;
    for (const auto& [id, entry] : state.solved)
        for (const auto& f : entry.facts)
            if (seen.insert(normalize_query(f.text)).second) facts.push_back(f);
    return facts;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// "1. text (doc d7)" -> {text, d7}; returns false for non-fact lines.
bool parse_one_fact_line(const std::string& raw, Fact& out) {
    std::string line = trim(raw);
    size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size()) return false;
    if (line[i] != '.' && line[i] != ')') return false;
    std::string body = trim(line.substr(i + 1));
    if (body.empty()) return false;

    out.source_doc_id = kInferredSource;
    if (body.back() == ')') {
        auto open = body.rfind("(doc ");
        if (open != std::string::npos) {
            std::string id = trim(body.substr(open + 5, body.size() - open - 6));
            if (!id.empty()) {
                out.source_doc_id = id;
                body = trim(body.substr(0, open));
            }
        }
    }
    if (body.empty()) return false;
    out.text = body;
    return true;
}

}  // namespace

std::vector<Fact> parse_fact_lines(const std::string& text, Warnings* warnings) {
    const std::string whole = trim(text);
    if (whole.empty() || whole == "NONE") return {};
    std::vector<Fact> facts;
    std::istringstream in(whole);
    std::string line;
    while (std::getline(in, line)) {
        Fact f;
        if (parse_one_fact_line(line, f)) facts.push_back(std::move(f));
    }
    if (facts.empty()) warn(warnings, "extractor output had no parseable fact lines");
    return facts;
}

std::optional<std::string> parse_answer_line(const std::string& text) {
    std::optional<std::string> answer;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("Answer:", 0) == 0) answer = trim(t.substr(7));
    }
    return answer;
}

std::string Executor::build_extractor_prompt(const std::string& query,
                                             const std::vector<Document>& docs) const {
    return prompts_.render("extractor_user",
                           {{"query", query}, {"documents", format_document_blocks(docs)}});
}

std::string Executor::build_reasoner_prompt(const std::string& query,
                                            const std::vector<Fact>& facts) const {
    return prompts_.render("reasoner_user", {{"query", query}, {"facts", format_fact_lines(facts)}});
}

std::vector<Fact> Executor::extract(const std::string& query, const std::vector<Document>& docs,
                                    Warnings* warnings) {
    if (docs.empty()) return {};
    std::string text;
    try {
        text = session_.complete(Role::extractor, prompts_.raw("extractor_system"),
                                 build_extractor_prompt(query, docs))
                   .text;
    } catch (const ProviderUnavailable& e) {
        warn(warnings, std::string("extractor unavailable: ") + e.what());
        return {};
    }
    return parse_fact_lines(text, warnings);
}

std::string Executor::reason(const std::string& query, const std::vector<Fact>& context_facts) {
    const std::string system = prompts_.raw("reasoner_system");
    const std::string user = build_reasoner_prompt(query, context_facts);
    for (int attempt = 0; attempt < 2; ++attempt) {
        std::string prompt = user;
        if (attempt == 1) prompt += prompts_.raw("reasoner_retry");
        const std::string text = session_.complete(Role::reasoner, system, prompt).text;
        if (auto answer = parse_answer_line(text)) return *answer;
    }
    throw ReasonParseError("reasoner produced no Answer line for: " + query);
}

ResolutionOutcome Executor::resolve(const Directive& directive, const ExecutionState& state,
                                    const Index& index, int k, Warnings* warnings) {
    ResolutionOutcome outcome;
    outcome.sub_question_id = directive.sub_question_id;

    std::vector<Fact> facts;
    if (directive.action == Action::answer) {
        facts = collected_fact_union(state);
    } else {
        const auto docs = index.documents(index.top_k(directive.query, k));
        if (use_extractor_) {
            facts = extract(directive.query, docs, warnings);
        } else {
            // Extraction ablation: the reasoner consumes documents directly.
            for (const auto& d : docs) facts.push_back(Fact{d.text, d.id});
        }
        if (facts.empty()) {
            outcome.kind = ResolutionOutcome::Kind::retrieval_failed;
            outcome.failed_query = directive.query;
            return outcome;
        }
    }

    outcome.kind = ResolutionOutcome::Kind::solved;
    outcome.entry.sub_question_id = directive.sub_question_id;
    outcome.entry.answer = reason(directive.query, facts);
    outcome.entry.facts = std::move(facts);
    outcome.entry.resolved_query = directive.query;
    outcome.entry.action_used = directive.action;
    return outcome;
}

std::string fallback_retrieval_query(const Question& question, const ExecutionState& state) {
    if (state.solved.empty()) return question.text;
    const SolvedEntry& last = state.solved.rbegin()->second;  // highest plan id
    std::string q;
    for (const auto& f : last.facts) {
        if (!q.empty()) q.push_back(' ');
        q += f.text;
    }
    if (q.empty()) q = question.text;
    if (q.size() > 256) q.resize(256);
    return q;
}

Executor::FallbackResult Executor::fallback_answer(const Question& question, const Blueprint& blueprint,
                                                   const ExecutionState& state, const Index& index,
                                                   int k) {
    FallbackResult result;
    try {
        const std::string query = fallback_retrieval_query(question, state);
        std::vector<Document> docs;
        try {
            docs = index.documents(index.top_k(query, k));
        } catch (const Error&) {
            // An unusable query (e.g. no tokens) just means no extra docs.
        }
        const std::string user = prompts_.render("fallback_user",
                                                 {{"question", question.text},
                                                  {"plan", format_plan_lines(blueprint.plan)},
                                                  {"facts", format_fact_lines(collected_fact_union(state))},
                                                  {"documents", format_document_blocks(docs)}});
        const std::string text =
            session_.complete(Role::fallback, prompts_.raw("fallback_system"), user).text;
        if (auto answer = parse_answer_line(text)) {
            result.answer = *answer;
        } else {
            result.answer = trim(text);
        }
        if (result.answer.empty()) result.aborted = true;
    } catch (const std::exception&) {
        result.answer.clear();
        result.aborted = true;
    }
    return result;
}

}  // namespace stride
