#include "stride/json_io.hpp"

#include <fstream>

namespace stride {

void to_json(json& j, const Question& q) {
    j = json{{"id", q.id}, {"text", q.text}, {"gold_answers", q.gold_answers}};
    if (q.hop_count) j["hop_count"] = *q.hop_count;
}

void from_json(const json& j, Question& q) {
    q.id = j.at("id").get<std::string>();
    q.text = j.at("text").get<std::string>();
    q.gold_answers = j.value("gold_answers", std::vector<std::string>{});
    if (j.contains("hop_count") && !j["hop_count"].is_null()) q.hop_count = j["hop_count"].get<int>();
}

void to_json(json& j, const Document& d) {
    j = json{{"id", d.id}, {"title", d.title}, {"text", d.text}};
}

void from_json(const json& j, Document& d) {
    d.id = j.at("id").get<std::string>();
    d.title = j.value("title", "");
    d.text = j.at("text").get<std::string>();
}

void to_json(json& j, const StrategyStep& s) {
    j = json{{"index", s.index}, {"description", s.description}};
}

void from_json(const json& j, StrategyStep& s) {
    s.index = j.at("index").get<int>();
    s.description = j.at("description").get<std::string>();
}

void to_json(json& j, const SubQuestion& s) {
    j = json{{"id", s.id}, {"template_text", s.template_text}, {"depends_on", s.depends_on}};
}

void from_json(const json& j, SubQuestion& s) {
    s.id = j.at("id").get<int>();
    s.template_text = j.at("template_text").get<std::string>();
    s.depends_on = j.value("depends_on", std::set<int>{});
}

void to_json(json& j, const Blueprint& b) {
    j = json{{"strategy", b.strategy}, {"plan", b.plan}};
}

void from_json(const json& j, Blueprint& b) {
    b.strategy = j.value("strategy", std::vector<StrategyStep>{});
    b.plan = j.value("plan", std::vector<SubQuestion>{});
}

void to_json(json& j, const Fact& f) {
    j = json{{"text", f.text}, {"source_doc_id", f.source_doc_id}};
}

void from_json(const json& j, Fact& f) {
    f.text = j.at("text").get<std::string>();
    f.source_doc_id = j.value("source_doc_id", std::string(kInferredSource));
}

void to_json(json& j, const SolvedEntry& e) {
    j = json{{"sub_question_id", e.sub_question_id},
             {"answer", e.answer},
             {"facts", e.facts},
             {"resolved_query", e.resolved_query},
             {"action_used", to_string(e.action_used)}};
}

void from_json(const json& j, SolvedEntry& e) {
    e.sub_question_id = j.at("sub_question_id").get<int>();
    e.answer = j.at("answer").get<std::string>();
    e.facts = j.value("facts", std::vector<Fact>{});
    e.resolved_query = j.value("resolved_query", "");
    e.action_used = action_from_string(j.value("action_used", "retrieve"));
}

void to_json(json& j, const ExecutionState& s) {
    json solved = json::object();
    for (const auto& [id, entry] : s.solved) solved[std::to_string(id)] = entry;
    json failed = json::object();
    for (const auto& [id, queries] : s.failed) failed[std::to_string(id)] = queries;
    j = json{{"solved", solved}, {"pending", s.pending}, {"failed", failed}};
}

void from_json(const json& j, ExecutionState& s) {
    s = ExecutionState{};
    for (const auto& [key, value] : j.at("solved").items())
        s.solved[std::stoi(key)] = value.get<SolvedEntry>();
    s.pending = j.value("pending", std::set<int>{});
    if (j.contains("failed"))
        for (const auto& [key, value] : j["failed"].items())
            s.failed[std::stoi(key)] = value.get<std::vector<std::string>>();
}

void to_json(json& j, const Directive& d) {
    j = json{{"sub_question_id", d.sub_question_id}, {"action", to_string(d.action)}, {"query", d.query}};
}

void from_json(const json& j, Directive& d) {
    // Accept both the canonical key and the short "id" the model prompt uses.
    if (j.contains("sub_question_id"))
        d.sub_question_id = j.at("sub_question_id").get<int>();
    else
        d.sub_question_id = j.at("id").get<int>();
    d.action = action_from_string(j.at("action").get<std::string>());
    d.query = j.value("query", "");
}

void to_json(json& j, const ResolutionOutcome& o) {
    j = json{{"sub_question_id", o.sub_question_id}};
    if (o.kind == ResolutionOutcome::Kind::solved) {
        j["kind"] = "solved";
        j["entry"] = o.entry;
    } else {
        j["kind"] = "retrieval_failed";
        j["failed_query"] = o.failed_query;
    }
}

void from_json(const json& j, ResolutionOutcome& o) {
    o.sub_question_id = j.at("sub_question_id").get<int>();
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "solved") {
        o.kind = ResolutionOutcome::Kind::solved;
        o.entry = j.at("entry").get<SolvedEntry>();
    } else if (kind == "retrieval_failed") {
        o.kind = ResolutionOutcome::Kind::retrieval_failed;
        o.failed_query = j.at("failed_query").get<std::string>();
    } else {
        throw Error("unknown outcome kind: " + kind);
    }
}

void to_json(json& j, const IterationRecord& r) {
    j = json{{"iteration", r.iteration},
             {"ready_ids", r.ready_ids},
             {"directives", r.directives},
             {"outcomes", r.outcomes}};
}

void from_json(const json& j, IterationRecord& r) {
    r.iteration = j.at("iteration").get<int>();
    r.ready_ids = j.value("ready_ids", std::set<int>{});
    r.directives = j.value("directives", std::vector<Directive>{});
    r.outcomes = j.value("outcomes", std::vector<ResolutionOutcome>{});
}

void to_json(json& j, const Metrics& m) {
    j = json{{"em", m.em}, {"f1", m.f1}, {"precision", m.precision}, {"recall", m.recall}};
}

void from_json(const json& j, Metrics& m) {
    m.em = j.value("em", 0.0);
    m.f1 = j.value("f1", 0.0);
    m.precision = j.value("precision", 0.0);
    m.recall = j.value("recall", 0.0);
}

void to_json(json& j, const TokenUsage& u) {
    j = json{{"prompt", u.prompt}, {"completion", u.completion}};
}

void from_json(const json& j, TokenUsage& u) {
    u.prompt = j.value("prompt", 0LL);
    u.completion = j.value("completion", 0LL);
}

void to_json(json& j, const Trajectory& t) {
    j = json{{"schema", kTrajectorySchema},
             {"question", t.question},
             {"blueprint", t.blueprint},
             {"iterations", t.iterations},
             {"final_answer", t.final_answer},
             {"used_fallback", t.used_fallback},
             {"aborted", t.aborted},
             {"usage", t.usage}};
    if (t.metrics) j["metrics"] = *t.metrics;
}

void from_json(const json& j, Trajectory& t) {
    t = Trajectory{};
    t.question = j.at("question").get<Question>();
    t.blueprint = j.at("blueprint").get<Blueprint>();
    t.iterations = j.value("iterations", std::vector<IterationRecord>{});
    t.final_answer = j.value("final_answer", "");
    t.used_fallback = j.value("used_fallback", false);
    t.aborted = j.value("aborted", false);
    t.usage = j.value("usage", TokenUsage{});
    if (j.contains("metrics") && !j["metrics"].is_null()) t.metrics = j["metrics"].get<Metrics>();
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<json> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw Error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

void append_jsonl(const std::filesystem::path& path, const json& record) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw Error("cannot open " + path.string() + " for append");
    out << record.dump() << "\n";
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::vector<Document> docs;
    for (const auto& j : read_jsonl(path)) docs.push_back(j.get<Document>());
    return docs;
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
    std::vector<Question> questions;
    for (const auto& j : read_jsonl(path)) questions.push_back(j.get<Question>());
    return questions;
}

}  // namespace stride
