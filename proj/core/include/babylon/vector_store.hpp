#pragma once

#include <cstddef>
#include <shared_mutex>
#include <string>
#include <vector>

#include "babylon/errors.hpp"
#include "babylon/llm_client.hpp"

namespace babylon {

/// Dense vector with cached Euclidean norm. Stored vectors are always
/// L2-normalized so the inner product doubles as cosine similarity.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    /// Normalizes to unit length. Throws EmbedError for empty or zero input.
    static EmbeddingVector normalized(std::vector<double> values);

    const std::vector<double>& values() const { return values_; }
    double norm() const { return norm_; }
    std::size_t dimension() const { return values_.size(); }

    double dot(const EmbeddingVector& other) const;

private:
    std::vector<double> values_;
    double norm_ = 0.0;
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;

    /// Raw (unnormalized) vector for non-blank text.
    virtual std::vector<double> embed_raw(const std::string& text) = 0;
    virtual std::size_t dimension() const = 0;
};

/// Embeds and L2-normalizes. Throws EmbedError on blank text or provider
/// failure.
EmbeddingVector embed(const std::string& text, EmbeddingProvider& provider);

/// Deterministic test provider: every token adds 1.0 to the bucket
/// fnv1a64(token) % dimension, then the vector is normalized.
class HashedEmbeddingProvider : public EmbeddingProvider {
public:
    explicit HashedEmbeddingProvider(std::size_t dimension) : dimension_(dimension) {}

    std::vector<double> embed_raw(const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
};

/// OpenAI-compatible embeddings endpoint: POST {model, input:[text]} and
/// read data[0].embedding.
class RemoteEmbeddingProvider : public EmbeddingProvider {
public:
    RemoteEmbeddingProvider(ChatOptions options, std::size_t dimension)
        : options_(std::move(options)), dimension_(dimension) {}

    std::vector<double> embed_raw(const std::string& text) override;
    std::size_t dimension() const override { return dimension_; }

private:
    ChatOptions options_;
    std::size_t dimension_;
};

struct VectorStoreEntry {
    int entry_id = 0;
    std::string text;  // original log text, retrievable verbatim
    EmbeddingVector vector;
};

struct RetrievalHit {
    VectorStoreEntry entry;
    double score = 0.0;  // inner product with the query
};

struct RetrievalResult {
    std::vector<RetrievalHit> hits;  // scores nonincreasing

    bool empty() const { return hits.empty(); }
    double top_score() const { return hits.empty() ? 0.0 : hits.front().score; }
};

/// Flat store with exhaustive inner-product retrieval. Retrievals may run
/// concurrently; insertion is exclusive with retrievals.
class VectorStore {
public:
    explicit VectorStore(std::size_t dimension);

    VectorStore(VectorStore&& other) noexcept
        : dimension_(other.dimension_), entries_(std::move(other.entries_)) {}
    VectorStore(const VectorStore&) = delete;
    VectorStore& operator=(const VectorStore&) = delete;

    /// Stores a normalized vector with the original text; returns entry id.
    int add(const std::string& text, EmbeddingVector vector);

    /// Exhaustive scan returning the top_k entries by descending inner
    /// product (ties toward lower entry id). Throws EmptyStoreError when
    /// the store is empty.
    RetrievalResult retrieve(const EmbeddingVector& query, std::size_t top_k) const;

    std::size_t size() const;
    std::size_t dimension() const { return dimension_; }

    /// JSON persistence: {dim, entries:[{id, text, vector}]}.
    void save(const std::string& path) const;
    static VectorStore load(const std::string& path);

private:
    std::size_t dimension_;
    std::vector<VectorStoreEntry> entries_;
    mutable std::shared_mutex mutex_;
};

} // namespace babylon
