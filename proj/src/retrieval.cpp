#include "stride/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace stride {

namespace {

uint64_t fnv1a(const std::string& token) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

void l2_normalize(EmbeddingVector& v) {
    double sum = 0.0;
    for (double x : v.values) sum += x * x;
    if (sum <= 0.0) return;
    const double inv = 1.0 / std::sqrt(sum);
    for (double& x : v.values) x *= inv;
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    const size_t n = std::min(a.values.size(), b.values.size());
    for (size_t i = 0; i < n; ++i) s += a.values[i] * b.values[i];
    return s;
}

EmbeddingVector hash_embed(const std::string& text, int dim) {
    if (dim <= 0) throw Error("hash_embed: dim must be positive");
    std::istringstream in(text);
    std::string token;
    EmbeddingVector v;
    v.dim = dim;
    v.values.assign(static_cast<size_t>(dim), 0.0);
    bool any = false;
    while (in >> token) {
        any = true;
        v.values[fnv1a(token) % static_cast<uint64_t>(dim)] += 1.0;
    }
    if (!any) throw EmptyText("hash_embed: text has no tokens");
    l2_normalize(v);
    return v;
}

std::string embedding_input(const Document& doc, bool embed_title) {
    if (embed_title && !doc.title.empty()) return doc.title + ". " + doc.text;
    return doc.text;
}

Index Index::ingest(const std::vector<Document>& corpus, const Embedder& embedder, bool embed_title) {
    if (corpus.empty()) throw EmptyCorpus("ingest: empty corpus");
    Index index;
    index.embedder_ = embedder;
    index.embed_title_ = embed_title;
    for (const auto& doc : corpus) {
        if (doc.text.empty()) throw Error("ingest: document " + doc.id + " has empty text");
        EmbeddingVector v = embedder(embedding_input(doc, embed_title));
        if (index.dim_ == 0)
            index.dim_ = v.dim;
        else if (v.dim != index.dim_)
            throw Error("ingest: embedder changed dimension mid-stream");
        index.docs_.push_back(doc);
        index.vectors_.push_back(std::move(v));
    }
    index.build_lookup();
    return index;
}

void Index::build_lookup() {
    id_lookup_.resize(docs_.size());
    for (size_t i = 0; i < docs_.size(); ++i) id_lookup_[i] = i;
    std::sort(id_lookup_.begin(), id_lookup_.end(),
              [&](size_t a, size_t b) { return docs_[a].id < docs_[b].id; });
    for (size_t i = 1; i < id_lookup_.size(); ++i)
        if (docs_[id_lookup_[i - 1]].id == docs_[id_lookup_[i]].id)
            throw DuplicateDocId("duplicate document id: " + docs_[id_lookup_[i]].id);
}

std::vector<RankedHit> Index::top_k(const std::string& query, int k) const {
    if (k <= 0) return {};
    EmbeddingVector q = embedder_(query);
    std::vector<RankedHit> hits;
    hits.reserve(docs_.size());
    for (size_t i = 0; i < docs_.size(); ++i)
        hits.push_back({docs_[i].id, dot(q, vectors_[i])});
    const size_t keep = std::min(static_cast<size_t>(k), hits.size());
    auto better = [](const RankedHit& a, const RankedHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    };
    std::partial_sort(hits.begin(), hits.begin() + keep, hits.end(), better);
    hits.resize(keep);
    return hits;
}

const Document& Index::document(const std::string& doc_id) const {
    auto it = std::lower_bound(id_lookup_.begin(), id_lookup_.end(), doc_id,
                               [&](size_t i, const std::string& id) { return docs_[i].id < id; });
    if (it == id_lookup_.end() || docs_[*it].id != doc_id)
        throw Error("unknown document id: " + doc_id);
    return docs_[*it];
}

std::vector<Document> Index::documents(const std::vector<RankedHit>& hits) const {
    std::vector<Document> out;
    out.reserve(hits.size());
    for (const auto& h : hits) out.push_back(document(h.doc_id));
    return out;
}

namespace {

constexpr char kMagic[] = "STRIDX1";  // 7 bytes, no terminator on disk

template <typename T>
void write_pod(std::ostream& out, T value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
    uint32_t len = read_pod<uint32_t>(in);
    std::string s(len, '\0');
    in.read(s.data(), len);
    return s;
}

}  // namespace

void Index::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string());
    out.write(kMagic, 7);
    write_pod<uint32_t>(out, static_cast<uint32_t>(dim_));
    write_pod<uint64_t>(out, static_cast<uint64_t>(docs_.size()));
    for (const auto& doc : docs_) {
        write_string(out, doc.id);
        write_string(out, doc.title);
        write_string(out, doc.text);
    }
    for (const auto& v : vectors_)
        for (double x : v.values) write_pod<float>(out, static_cast<float>(x));
    if (!out) throw Error("write failed: " + path.string());
}

Index Index::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    char magic[7];
    in.read(magic, 7);
    if (!in || std::memcmp(magic, kMagic, 7) != 0)
        throw Error(path.string() + ": not an index file (bad magic)");
    Index index;
    index.dim_ = static_cast<int>(read_pod<uint32_t>(in));
    uint64_t count = read_pod<uint64_t>(in);
    index.docs_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        Document d;
        d.id = read_string(in);
        d.title = read_string(in);
        d.text = read_string(in);
        index.docs_.push_back(std::move(d));
    }
    index.vectors_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        EmbeddingVector v;
        v.dim = index.dim_;
        v.values.resize(static_cast<size_t>(index.dim_));
        for (auto& x : v.values) x = static_cast<double>(read_pod<float>(in));
        index.vectors_.push_back(std::move(v));
    }
    if (!in) throw Error(path.string() + ": truncated index file");
    const int dim = index.dim_;
    index.embedder_ = [dim](const std::string& text) { return hash_embed(text, dim); };
    index.build_lookup();
    return index;
}

}  // namespace stride
