#include "stride/prompts.hpp"

#include <fstream>
#include <sstream>

namespace stride {

namespace {

const char* kPlannerSystem =
    "You decompose multi-hop questions into a structured reasoning blueprint. "
    "Plan the abstract reasoning flow over entity types first, then write "
    "executable sub-questions. Reply with a single JSON object and nothing else.";

const char* kPlannerUser = R"__(Question: {question}

Reply with one JSON object of this shape:
{"general_strategy": ["abstract step over entity types (person, work, location, ...)", "..."],
 "concrete_plan": [{"id": 1, "question": "...", "depends_on": []},
                   {"id": 2, "question": "... #1 ...", "depends_on": [1]}]}

Rules:
- Sub-question ids are consecutive integers starting at 1.
- Write #k wherever the answer of sub-question k must be inserted later.
- depends_on lists exactly the ids referenced via #k.
- Keep the plan minimal: no redundant sub-questions.)__";

const char* kPlannerUserDirect = R"__(Question: {question}

Reply with one JSON object of this shape:
{"concrete_plan": [{"id": 1, "question": "...", "depends_on": []},
                   {"id": 2, "question": "... #1 ...", "depends_on": [1]}]}

Rules:
- Sub-question ids are consecutive integers starting at 1.
- Write #k wherever the answer of sub-question k must be inserted later.
- depends_on lists exactly the ids referenced via #k.
- Keep the plan minimal: no redundant sub-questions.)__";

const char* kPlannerRetry = R"__(

Your previous reply could not be used:
{violations}
Reply again with exactly the JSON shape requested above.)__";

const char* kSupervisorSystem =
    "You schedule sub-questions of a multi-hop reasoning plan. For every ready "
    "sub-question pick one action and a query. Reply with JSON only.";

const char* kSupervisorUser = R"__(Question: {question}
Plan:
{plan}
Solved:
{solved}
Pending: {pending}
Ready: {ready}
{failed_section}Pick one action per ready sub-question:
- retrieve: no failed attempts yet; give one concise, entity-grounded search query.
- rewrite: earlier queries failed; give a reformulated query that differs from every failed one.
- answer: the sub-question only combines already-known answers (comparison, intersection); no retrieval.
Insert solved answers in place of #k references when writing queries.
Reply with one JSON object: {"directives": [{"id": 1, "action": "retrieve", "query": "..."}]})__";

const char* kExtractorSystem =
    "You extract atomic facts from documents. Be faithful: state only what the "
    "documents say, one self-contained fact per line, citing the source.";

const char* kExtractorUser = R"__(Query: {query}
Documents:
{documents}
List the atomic facts from these documents that help answer the query.
Format: numbered lines like "1. <fact> (doc <id>)".
If no document contains relevant information, reply with the single token NONE.)__";

const char* kReasonerSystem =
    "You answer a question strictly from the supplied facts, reasoning step by "
    "step. The last line of your reply must be \"Answer: <short answer>\".";

const char* kReasonerUser = R"__(Question: {query}
Facts:
{facts}
Reason over the facts, then end with the final line exactly as:
Answer: <short answer>)__";

const char* kReasonerRetry = R"__(

Your previous reply had no "Answer:" line. Reply again and end with the final
line exactly as:
Answer: <short answer>)__";

const char* kFallbackSystem =
    "The multi-hop reasoning run ended before every sub-question was resolved. "
    "Give the best answer you can from the partial evidence. The last line of "
    "your reply must be \"Answer: <short answer>\".";

const char* kFallbackUser = R"__(Question: {question}
Plan:
{plan}
Collected facts:
{facts}
Documents:
{documents}
Give your best answer to the question. End with the final line exactly as:
Answer: <short answer>)__";

const char* kSelectorSystem =
    "You prune fact lists to the minimal subset needed to answer a query. "
    "Reply with the numbers of the required facts, comma-separated, nothing else.";

const char* kSelectorUser =
    R"__(Given query: {query}, and candidate facts: {facts}, select only the facts strictly required to answer the question.
The facts are numbered; reply with the numbers of the required facts, comma-separated.)__";

}  // namespace

const std::vector<std::pair<std::string, std::string>>& PromptLibrary::defaults() {
    static const std::vector<std::pair<std::string, std::string>> kDefaults = {
        {"planner_system", kPlannerSystem},
        {"planner_user", kPlannerUser},
        {"planner_user_direct", kPlannerUserDirect},
        {"planner_retry", kPlannerRetry},
        {"supervisor_system", kSupervisorSystem},
        {"supervisor_user", kSupervisorUser},
        {"extractor_system", kExtractorSystem},
        {"extractor_user", kExtractorUser},
        {"reasoner_system", kReasonerSystem},
        {"reasoner_user", kReasonerUser},
        {"reasoner_retry", kReasonerRetry},
        {"fallback_system", kFallbackSystem},
        {"fallback_user", kFallbackUser},
        {"fact_selector_system", kSelectorSystem},
        {"fact_selector_user", kSelectorUser},
    };
    return kDefaults;
}

PromptLibrary::PromptLibrary() {
    for (const auto& [name, text] : defaults()) templates_[name] = text;
}

PromptLibrary::PromptLibrary(const std::filesystem::path& template_dir) : PromptLibrary() {
    if (template_dir.empty()) return;
    for (auto& [name, text] : templates_) {
        auto path = template_dir / (name + ".txt");
        std::ifstream in(path);
        if (!in) continue;
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string content = buf.str();
        // Editors append a final newline; the embedded defaults carry none.
        if (!content.empty() && content.back() == '\n') content.pop_back();
        text = content;
    }
}

const std::string& PromptLibrary::raw(const std::string& name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw Error("unknown prompt template: " + name);
    return it->second;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& slots) const {
    std::string out = raw(name);
    for (const auto& [slot, value] : slots) {
        const std::string needle = "{" + slot + "}";
        size_t pos = 0;
        while ((pos = out.find(needle, pos)) != std::string::npos) {
            out.replace(pos, needle.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string format_id_set(const std::set<int>& ids) {
    std::string out = "[";
    for (int id : ids) {
        if (out.size() > 1) out += ", ";
        out += std::to_string(id);
    }
    return out + "]";
}

std::string format_plan_lines(const std::vector<SubQuestion>& plan) {
    std::string out;
    for (const auto& sq : plan) {
        out += "  " + std::to_string(sq.id) + ". " + sq.template_text;
        if (!sq.depends_on.empty()) out += " (depends on " + format_id_set(sq.depends_on) + ")__";
        out += "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string format_solved_lines(const ExecutionState& state) {
    if (state.solved.empty()) return "  (none)__";
    std::string out;
    for (const auto& [id, entry] : state.solved)
        out += "  " + std::to_string(id) + ". " + entry.resolved_query + " => " + entry.answer + "\n";
    out.pop_back();
    return out;
}

std::string format_failed_section(const ExecutionState& state) {
    bool any = false;
    for (const auto& [id, queries] : state.failed) any = any || !queries.empty();
    if (!any) return "";
    std::string out = "Failed attempts:\n";
    for (const auto& [id, queries] : state.failed) {
        if (queries.empty()) continue;
        out += "  " + std::to_string(id) + ":";
        for (const auto& q : queries) out += " \"" + q + "\"";
        out += "\n";
    }
    return out;
}

std::string format_document_blocks(const std::vector<Document>& docs) {
    std::string out;
    for (const auto& d : docs) out += "[doc " + d.id + "] " + d.title + ": " + d.text + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

std::string format_fact_lines(const std::vector<Fact>& facts) {
    if (facts.empty()) return "  (none)__";
    std::string out;
    int n = 0;
    for (const auto& f : facts) {
        out += std::to_string(++n) + ". " + f.text;
        if (f.source_doc_id != kInferredSource) out += " (doc " + f.source_doc_id + ")__";
        out += "\n";
    }
    out.pop_back();
    return out;
}

}  // namespace stride
