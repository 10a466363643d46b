#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "stride/domain.hpp"

namespace stride {

struct DuplicateDocId : Error {
    using Error::Error;
};
struct EmptyCorpus : Error {
    using Error::Error;
};
struct EmptyText : Error {
    using Error::Error;
};

struct EmbeddingVector {
    std::vector<double> values;
    int dim = 0;
};

using Embedder = std::function<EmbeddingVector(const std::string&)>;

struct RankedHit {
    std::string doc_id;
    double score = 0.0;
};

// Deterministic bag-of-words embedder: each whitespace token is hashed
// (FNV-1a 64) into one of `dim` buckets, counts accumulated, then the vector
// is L2-normalized. Identical text always yields identical bits.
EmbeddingVector hash_embed(const std::string& text, int dim);

void l2_normalize(EmbeddingVector& v);
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

// Exact dense retrieval over an immutable corpus snapshot. Scores are inner
// products of L2-normalized vectors (cosine); search scans every document.
class Index {
public:
    // Builds an index embedding "title. text" per document (title prepended
    // only when non-empty and embed_title is set). The embedder must return
    // L2-normalized vectors of a fixed dimension.
    static Index ingest(const std::vector<Document>& corpus, const Embedder& embedder,
                        bool embed_title = true);

    std::vector<RankedHit> top_k(const std::string& query, int k) const;

    const Document& document(const std::string& doc_id) const;
    std::vector<Document> documents(const std::vector<RankedHit>& hits) const;

    size_t size() const { return docs_.size(); }
    int dim() const { return dim_; }

    // Binary persistence: magic "STRIDX1", u32 dim, u64 count, id table,
    // titles/texts, then packed little-endian float32 vectors.
    void save(const std::filesystem::path& path) const;
    // Loaded indexes default to the hash embedder at the stored dimension;
    // callers using a model embedder re-attach it here.
    static Index load(const std::filesystem::path& path);
    void set_embedder(Embedder embedder) { embedder_ = std::move(embedder); }

private:
    Index() = default;

    std::vector<Document> docs_;
    std::vector<EmbeddingVector> vectors_;
    std::vector<size_t> id_lookup_;  // indices of docs_ sorted by doc id
    Embedder embedder_;
    bool embed_title_ = true;
    int dim_ = 0;

    void build_lookup();
};

// Composes the embedding input for a document ("title. text").
std::string embedding_input(const Document& doc, bool embed_title);

}  // namespace stride
