#include "stride/synth.hpp"

#include <algorithm>
#include <random>

#include "stride/json_io.hpp"
#include "stride/planner.hpp"
#include "stride/prompts.hpp"
#include "stride/supervisor.hpp"

namespace stride::synth {

std::string to_string(Pattern p) {
    switch (p) {
        case Pattern::sequential: return "sequential";
        case Pattern::parallel_compare: return "parallel_compare";
        case Pattern::fork_join: return "fork_join";
    }
    return "sequential";
}

int dag_depth(const Blueprint& blueprint) {
    std::map<int, int> depth;
    int best = 0;
    for (const auto& sq : blueprint.plan) {  // ids ascend, deps precede
        int d = 1;
        for (int dep : sq.depends_on) d = std::max(d, depth[dep] + 1);
        depth[sq.id] = d;
        best = std::max(best, d);
    }
    return best;
}

namespace {

const char* kFirstNames[] = {"Mira", "Tor",   "Ansel", "Vera",  "Dario", "Lena",  "Oskar",
                             "Petra", "Ruven", "Sable", "Ida",   "Corin", "Neva",  "Bram",
                             "Talia", "Edran", "Sunni", "Marek", "Odile", "Ferrin"};
const char* kSurA[] = {"Kor", "Var", "Bel", "Dor", "Fal", "Gren", "Hol", "Jas", "Lum", "Mar",
                       "Nor", "Oss", "Pel", "Quin", "Rav", "Sel", "Tam", "Ulv", "Wen", "Yor"};
const char* kSurB[] = {"vath", "mere", "dane", "holt", "wick", "stad", "bury", "fell", "grove", "march",
                       "ness", "worth", "field", "brook", "shaw", "thorpe", "combe", "garth", "lund", "moor"};
const char* kCityPre[] = {"Port", "New", "East", "West", "Fort", "Glen", "North", "South"};
const char* kBookAdj[] = {"Silent", "Amber", "Hollow", "Iron",   "Velvet",
                          "Crimson", "Pale",  "Gilded", "Quiet", "Distant"};
const char* kBookNoun[] = {"Harbor", "Orchard", "Meridian", "Lantern",  "Archive",
                           "Causeway", "Paradox", "Monsoon", "Labyrinth", "Horizon"};

struct NameForge {
    std::mt19937_64& rng;
    std::set<std::string> used;
    int serial = 0;

    std::string unique(std::string base) {
        std::string name = base;
        while (!used.insert(name).second) name = base + " " + std::to_string(++serial);
        return name;
    }

    template <size_t N>
    const char* pick(const char* (&arr)[N]) {
        return arr[rng() % N];
    }

    std::string person() { return unique(std::string(pick(kFirstNames)) + " " + pick(kSurA) + pick(kSurB)); }
    std::string city() { return unique(std::string(pick(kCityPre)) + " " + pick(kSurA) + pick(kSurB)); }
    std::string book() { return unique(std::string("The ") + pick(kBookAdj) + " " + pick(kBookNoun)); }
    std::string film() { return unique(std::string(pick(kBookAdj)) + " " + pick(kBookNoun)); }
};

struct Builder {
    std::mt19937_64 rng;
    NameForge forge{rng};
    SynthOutput out;
    std::vector<int> year_pool;
    int doc_serial = 0;
    int entity_serial = 0;

    explicit Builder(uint64_t mix) : rng(mix) {
        for (int y = 1800; y <= 1999; ++y) year_pool.push_back(y);
        std::shuffle(year_pool.begin(), year_pool.end(), rng);
    }

    std::string add_entity(const std::string& name, const std::string& type) {
        char id[16];
        std::snprintf(id, sizeof id, "e%04d", entity_serial++);
        out.kg.entities.push_back({id, name, type});
        return name;
    }

    std::string fresh_year() {
        if (year_pool.empty()) return std::to_string(1700 + static_cast<int>(rng() % 100));
        std::string y = std::to_string(year_pool.back());
        year_pool.pop_back();
        add_entity(y, "year");
        return y;
    }

    // One document per relation; returns the doc id.
    std::string relate(const std::string& subject, const std::string& predicate,
                       const std::string& object, const std::string& sentence) {
        out.kg.relations.push_back({subject, predicate, object});
        char id[16];
        std::snprintf(id, sizeof id, "d%04d", doc_serial++);
        out.corpus.push_back({id, subject, sentence});
        return id;
    }
};

Blueprint make_blueprint(const std::vector<std::string>& strategy,
                         const std::vector<std::pair<std::string, std::set<int>>>& plan) {
    Blueprint bp;
    int i = 0;
    for (const auto& s : strategy) bp.strategy.push_back({++i, s});
    i = 0;
    for (const auto& [text, deps] : plan) bp.plan.push_back({++i, text, deps});
    return bp;
}

void build_sequential(Builder& b, int index, bool three_hop) {
    const std::string person = b.add_entity(b.forge.person(), "person");
    const std::string book = b.add_entity(b.forge.book(), "book");
    const std::string year = b.fresh_year();

    const std::string wrote_doc =
        b.relate(person, "wrote", book, "The book " + book + " was written by " + person + ".");
    const std::string born_doc = b.relate(person, "born_in_year", year,
                                          person + " was born in the year " + year + ".");

    SynthQuestion sq;
    sq.pattern = Pattern::sequential;
    char qid[24];
    std::snprintf(qid, sizeof qid, "seq-%03d", index);
    sq.question.id = qid;

    if (!three_hop) {
        sq.question.text = "In which year was the author of the book " + book + " born?";
        sq.question.hop_count = 2;
        sq.gold_blueprint = make_blueprint(
            {"identify the author of the book", "find the birth year of that person"},
            {{"Which person wrote the book " + book + "?", {}},
             {"In which year was #1 born?", {1}}});
        sq.gold_steps = {
            {1, person, "The book " + book + " was written by " + person + ".", wrote_doc, false},
            {2, year, person + " was born in the year " + year + ".", born_doc, false},
        };
    } else {
        const std::string film = b.add_entity(b.forge.film(), "film");
        const std::string based_doc = b.relate(
            film, "based_on", book, "The film " + film + " was based on the book " + book + ".");
        sq.question.text =
            "In which year was the author of the book that the film " + film + " was based on born?";
        sq.question.hop_count = 3;
        sq.gold_blueprint = make_blueprint(
            {"identify the source book of the film", "identify the author of the book",
             "find the birth year of that person"},
            {{"Which book was the film " + film + " based on?", {}},
             {"Which person wrote the book #1?", {1}},
             {"In which year was #2 born?", {2}}});
        sq.gold_steps = {
            {1, book, "The film " + film + " was based on the book " + book + ".", based_doc, false},
            {2, person, "The book " + book + " was written by " + person + ".", wrote_doc, false},
            {3, year, person + " was born in the year " + year + ".", born_doc, false},
        };
    }
    sq.question.gold_answers = {sq.gold_steps.back().gold_answer};
    sq.expected_iterations = dag_depth(sq.gold_blueprint);
    b.out.questions.push_back(std::move(sq));
}

void build_parallel_compare(Builder& b, int index) {
    const std::string p1 = b.add_entity(b.forge.person(), "person");
    const std::string p2 = b.add_entity(b.forge.person(), "person");
    const std::string y1 = b.fresh_year();
    const std::string y2 = b.fresh_year();  // pool draw: distinct from y1

    const std::string d1 = b.relate(p1, "born_in_year", y1, p1 + " was born in the year " + y1 + ".");
    const std::string d2 = b.relate(p2, "born_in_year", y2, p2 + " was born in the year " + y2 + ".");

    const bool first_older = y1 < y2;
    const std::string older = first_older ? p1 : p2;
    const std::string younger = first_older ? p2 : p1;

    SynthQuestion sq;
    sq.pattern = Pattern::parallel_compare;
    char qid[24];
    std::snprintf(qid, sizeof qid, "par-%03d", index);
    sq.question.id = qid;
    sq.question.text = "Who is older, " + p1 + " or " + p2 + "?";
    sq.question.hop_count = 2;
    sq.question.gold_answers = {older};
    sq.gold_blueprint = make_blueprint(
        {"find the birth year of the first person", "find the birth year of the second person",
         "compare the two birth years"},
        {{"In which year was " + p1 + " born?", {}},
         {"In which year was " + p2 + " born?", {}},
         {"Who is older: " + p1 + " (born #1) or " + p2 + " (born #2)?", {1, 2}}});
    sq.gold_steps = {
        {1, y1, p1 + " was born in the year " + y1 + ".", d1, false},
        {2, y2, p2 + " was born in the year " + y2 + ".", d2, false},
        {3, older, older + " was born earlier than " + younger + ".", kInferredSource, true},
    };
    sq.expected_iterations = dag_depth(sq.gold_blueprint);
    b.out.questions.push_back(std::move(sq));
}

void build_fork_join(Builder& b, int index, bool same_city) {
    const std::string p1 = b.add_entity(b.forge.person(), "person");
    const std::string p2 = b.add_entity(b.forge.person(), "person");
    const std::string c1 = b.add_entity(b.forge.city(), "city");
    const std::string c2 = same_city ? c1 : b.add_entity(b.forge.city(), "city");

    const std::string d1 = b.relate(p1, "lives_in", c1, p1 + " lives in the city " + c1 + ".");
    const std::string d2 = b.relate(p2, "lives_in", c2, p2 + " lives in the city " + c2 + ".");

    SynthQuestion sq;
    sq.pattern = Pattern::fork_join;
    char qid[24];
    std::snprintf(qid, sizeof qid, "fj-%03d", index);
    sq.question.id = qid;
    sq.question.text = "Do " + p1 + " and " + p2 + " live in the same city?";
    sq.question.hop_count = 2;
    sq.question.gold_answers = {same_city ? "yes" : "no"};
    sq.gold_blueprint = make_blueprint(
        {"find the city of the first person", "find the city of the second person",
         "check whether the two cities are identical"},
        {{"In which city does " + p1 + " live?", {}},
         {"In which city does " + p2 + " live?", {}},
         {"Are #1 and #2 the same city, for " + p1 + " and " + p2 + "?", {1, 2}}});
    sq.gold_steps = {
        {1, c1, p1 + " lives in the city " + c1 + ".", d1, false},
        {2, c2, p2 + " lives in the city " + c2 + ".", d2, false},
        {3, same_city ? "yes" : "no",
         same_city ? p1 + " and " + p2 + " live in the same city."
                   : p1 + " and " + p2 + " live in different cities.",
         kInferredSource, true},
    };
    sq.expected_iterations = dag_depth(sq.gold_blueprint);
    b.out.questions.push_back(std::move(sq));
}

void add_distractors(Builder& b, int leftover_persons, int leftover_cities, int leftover_books,
                     int leftover_films) {
    std::vector<std::string> persons, cities, books, films;
    for (int i = 0; i < leftover_persons; ++i) persons.push_back(b.add_entity(b.forge.person(), "person"));
    for (int i = 0; i < leftover_cities; ++i) cities.push_back(b.add_entity(b.forge.city(), "city"));
    for (int i = 0; i < leftover_books; ++i) books.push_back(b.add_entity(b.forge.book(), "book"));
    for (int i = 0; i < leftover_films; ++i) films.push_back(b.add_entity(b.forge.film(), "film"));

    // 3x distractor documents per relation document
    const size_t relation_docs = b.out.corpus.size();
    size_t i = 0;
    while (b.out.corpus.size() < relation_docs * 4) {
        switch (i % 4) {
            case 0: {
                const auto& p = persons[i % persons.size()];
                const std::string y = b.fresh_year();
                b.relate(p, "born_in_year", y, p + " was born in the year " + y + ".");
                break;
            }
            case 1: {
                const auto& p = persons[(i / 2) % persons.size()];
                const auto& c = cities[i % cities.size()];
                b.relate(p, "lives_in", c, p + " lives in the city " + c + ".");
                break;
            }
            case 2: {
                const auto& bk = books[i % books.size()];
                const auto& p = persons[(i / 3) % persons.size()];
                b.relate(p, "wrote", bk, "The book " + bk + " was written by " + p + ".");
                break;
            }
            default: {
                const auto& f = films[i % films.size()];
                const auto& bk = books[(i / 2) % books.size()];
                b.relate(f, "based_on", bk, "The film " + f + " was based on the book " + bk + ".");
                break;
            }
        }
        ++i;
    }
}

// Instantiated query of every non-reasoning gold step, given gold answers.
std::vector<std::pair<std::string, std::string>> gold_queries(const SynthQuestion& sq) {
    ExecutionState state;
    for (const auto& s : sq.gold_blueprint.plan) state.pending.insert(s.id);
    std::vector<std::pair<std::string, std::string>> out;  // (query, needed doc id)
    for (size_t i = 0; i < sq.gold_blueprint.plan.size(); ++i) {
        const auto& sub = sq.gold_blueprint.plan[i];
        const auto& gold = sq.gold_steps[i];
        const std::string q = instantiate(sub, state);
        if (!gold.reasoning) out.emplace_back(q, gold.fact_doc_id);
        state.solved[sub.id] = {sub.id, gold.gold_answer, {}, q, Action::retrieve};
        state.pending.erase(sub.id);
    }
    return out;
}

bool corpus_sufficient(const SynthOutput& out) {
    Index index = Index::ingest(out.corpus,
                                [](const std::string& t) { return hash_embed(t, kHarnessDim); });
    for (const auto& sq : out.questions) {
        for (const auto& [query, doc_id] : gold_queries(sq)) {
            auto hits = index.top_k(query, 3);
            const bool found = std::any_of(hits.begin(), hits.end(),
                                           [&](const RankedHit& h) { return h.doc_id == doc_id; });
            if (!found) return false;
        }
    }
    return true;
}

SynthOutput generate_once(uint64_t seed, const SynthCounts& counts, uint64_t salt) {
    Builder b(seed * 0x9E3779B97F4A7C15ULL + salt + 1);
    b.out.kg.seed = seed;

    const int seq3 = counts.sequential_q / 2;
    const int seq2 = counts.sequential_q - seq3;
    const int fj_same = counts.forkjoin_q / 2;
    const int fj_diff = counts.forkjoin_q - fj_same;

    const int required = seq2 * 2 + seq3 * 3 + counts.parallel_q * 2 + fj_same * 3 + fj_diff * 4;
    const int leftover = counts.entities - required;
    if (leftover < 4)
        throw InsufficientKG("entity budget " + std::to_string(counts.entities) +
                             " cannot cover " + std::to_string(required) +
                             " question entities plus 4 distractor entities");

    int seq_i = 0, par_i = 0, fj_i = 0;
    for (int i = 0; i < counts.sequential_q; ++i) build_sequential(b, seq_i++, i % 2 == 1);
    for (int i = 0; i < counts.parallel_q; ++i) build_parallel_compare(b, par_i++);
    for (int i = 0; i < counts.forkjoin_q; ++i) build_fork_join(b, fj_i++, i % 2 == 0);

    const int lp = std::max(1, leftover * 2 / 5);
    const int lc = std::max(1, leftover / 5);
    const int lb = std::max(1, leftover / 5);
    const int lf = std::max(1, leftover - lp - lc - lb);
    add_distractors(b, lp, lc, lb, lf);

    return std::move(b.out);
}

}  // namespace

SynthOutput generate(uint64_t seed, const SynthCounts& counts) {
    if (counts.entities <= 0 || counts.sequential_q < 0 || counts.parallel_q < 0 ||
        counts.forkjoin_q < 0)
        throw InsufficientKG("counts must be positive");
    for (uint64_t salt = 0; salt < 32; ++salt) {
        SynthOutput out = generate_once(seed, counts, salt);
        if (corpus_sufficient(out)) return out;
    }
    throw Error("synth: corpus sufficiency not reached after 32 reseeds");
}

Index build_index(const SynthOutput& out) {
    return Index::ingest(out.corpus, [](const std::string& t) { return hash_embed(t, kHarnessDim); });
}

AdversarialSpec default_adversarial_spec(const SynthOutput& out) {
    AdversarialSpec spec;
    for (const auto& sq : out.questions)
        spec.fail_first.insert(sq.gold_blueprint.plan.front().template_text);
    return spec;
}

// ----------------------------------------------------------------------------
// Scripted rule construction via an execution walk
// ----------------------------------------------------------------------------

namespace {

using Rule = ScriptedProvider::Rule;

std::string question_line(const SynthQuestion& sq) { return "Question: " + sq.question.text + "\n"; }

std::string fact_response(const GoldStep& step) {
    std::string line = "1. " + step.fact_sentence;
    if (step.fact_doc_id != kInferredSource) line += " (doc " + step.fact_doc_id + ")";
    return line;
}

json blueprint_response(const Blueprint& bp) {
    json strategy = json::array();
    for (const auto& s : bp.strategy) strategy.push_back(s.description);
    json plan = json::array();
    for (const auto& sq : bp.plan)
        plan.push_back({{"id", sq.id}, {"question", sq.template_text}, {"depends_on", sq.depends_on}});
    return json{{"general_strategy", strategy}, {"concrete_plan", plan}};
}

json directives_response(const std::vector<Directive>& dirs) {
    json arr = json::array();
    for (const auto& d : dirs)
        arr.push_back({{"id", d.sub_question_id}, {"action", to_string(d.action)}, {"query", d.query}});
    return json{{"directives", arr}};
}

struct RuleSink {
    std::vector<Rule> rules;
    std::set<std::string> seen;

    void add(Role role, std::vector<std::string> match, std::string response) {
        std::string key = stride::to_string(role);
        for (const auto& m : match) key += "\x1f" + m;
        key += "\x1e" + response;
        if (!seen.insert(key).second) return;
        rules.push_back({role, std::move(match), std::move(response)});
    }
};

void walk_question(const SynthQuestion& sq, const AdversarialSpec& spec, RuleSink& sink) {
    const std::string qline = question_line(sq);
    sink.add(Role::planner, {qline}, blueprint_response(sq.gold_blueprint).dump());
    sink.add(Role::fallback, {qline}, "Answer: " + sq.question.gold_answers.front());

    std::map<int, const GoldStep*> steps;
    for (const auto& s : sq.gold_steps) steps[s.id] = &s;

    const auto& plan = sq.gold_blueprint.plan;
    ExecutionState state = initial_state(sq.gold_blueprint);
    std::vector<Rule> supervisor_rules;
    std::set<std::string> always_failed_rules;

    for (int t = 1; t <= 8 && !state.pending.empty(); ++t) {
        const auto ready = ready_set(plan, state);
        if (ready.empty()) break;
        const auto directives = deterministic_policy(plan, state);
        if (directives.empty()) break;

        Rule sup;
        sup.role_tag = Role::supervisor;
        sup.match = {qline, "Ready: " + format_id_set(ready) + "\n"};
        const std::string failed_section = format_failed_section(state);
        if (!failed_section.empty()) sup.match.push_back(failed_section);
        sup.response = directives_response(directives).dump();
        supervisor_rules.push_back(std::move(sup));

        std::vector<ResolutionOutcome> outcomes;
        for (const auto& d : directives) {
            const GoldStep& gold = *steps.at(d.sub_question_id);
            const std::string subq_key =
                sq.question.id + "#" + std::to_string(d.sub_question_id);

            if (d.action != Action::answer && spec.fail_always.count(subq_key)) {
                // Broad matcher on the first-attempt phrasing: every
                // mechanical reformulation still contains it, so this
                // sub-question never extracts.
                if (always_failed_rules.insert(subq_key).second)
                    sink.add(Role::extractor, {d.query}, "NONE");
                outcomes.push_back({d.sub_question_id, ResolutionOutcome::Kind::retrieval_failed,
                                    SolvedEntry{}, d.query});
                continue;
            }
            if (d.action == Action::retrieve && spec.fail_first.count(d.query) &&
                state.failed_queries(d.sub_question_id).empty()) {
                sink.add(Role::extractor, {"Query: " + d.query + "\n"}, "NONE");
                outcomes.push_back({d.sub_question_id, ResolutionOutcome::Kind::retrieval_failed,
                                    SolvedEntry{}, d.query});
                continue;
            }

            if (d.action != Action::answer)
                sink.add(Role::extractor, {"Query: " + d.query + "\n"}, fact_response(gold));
            sink.add(Role::reasoner, {"Question: " + d.query + "\n"}, "Answer: " + gold.gold_answer);

            ResolutionOutcome o;
            o.sub_question_id = d.sub_question_id;
            o.kind = ResolutionOutcome::Kind::solved;
            o.entry = {d.sub_question_id, gold.gold_answer,
                       d.action == Action::answer ? std::vector<Fact>{}
                                                  : std::vector<Fact>{{gold.fact_sentence, gold.fact_doc_id}},
                       d.query, d.action};
            outcomes.push_back(std::move(o));
        }

        for (const auto& o : outcomes) {
            if (o.kind == ResolutionOutcome::Kind::solved) {
                state.solved[o.sub_question_id] = o.entry;
                state.pending.erase(o.sub_question_id);
            } else {
                state.failed[o.sub_question_id].push_back(o.failed_query);
            }
        }
    }

    // Most-specific supervisor rule first: a later failure state carries an
    // extra matcher and must shadow the clean rule for the same ready set.
    std::stable_sort(supervisor_rules.begin(), supervisor_rules.end(),
                     [](const Rule& a, const Rule& b) { return a.match.size() > b.match.size(); });
    for (auto& r : supervisor_rules)
        sink.add(r.role_tag, std::move(r.match), std::move(r.response));

    // Rules for paths outside the dependency-aware walk: the sequential
    // ablation retrieves even reasoning steps, and single-step RAG queries
    // the original question text directly.
    ExecutionState gold_state = initial_state(sq.gold_blueprint);
    for (size_t i = 0; i < plan.size(); ++i) {
        const GoldStep& gold = sq.gold_steps[i];
        const std::string query = instantiate(plan[i], gold_state);
        if (gold.reasoning) {
            sink.add(Role::extractor, {"Query: " + query + "\n"}, fact_response(gold));
            sink.add(Role::reasoner, {"Question: " + query + "\n"}, "Answer: " + gold.gold_answer);
        }
        gold_state.solved[plan[i].id] = {plan[i].id, gold.gold_answer, {}, query, Action::retrieve};
        gold_state.pending.erase(plan[i].id);
    }
    sink.add(Role::extractor, {"Query: " + sq.question.text + "\n"}, "NONE");
    sink.add(Role::reasoner, {qline}, "Answer: unknown");
}

}  // namespace

std::vector<Rule> cooperative_rules(const SynthOutput& out) {
    return adversarial_rules(out, AdversarialSpec{});
}

std::vector<Rule> adversarial_rules(const SynthOutput& out, const AdversarialSpec& spec) {
    RuleSink sink;
    for (const auto& sq : out.questions) walk_question(sq, spec, sink);
    return std::move(sink.rules);
}

std::shared_ptr<ScriptedProvider> cooperative_provider(const SynthOutput& out) {
    return std::make_shared<ScriptedProvider>(cooperative_rules(out));
}

std::shared_ptr<ScriptedProvider> adversarial_provider(const SynthOutput& out,
                                                       const AdversarialSpec& spec) {
    return std::make_shared<ScriptedProvider>(adversarial_rules(out, spec));
}

}  // namespace stride::synth
