#include "babylon/vector_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "babylon/ingest.hpp"
#include "babylon/pipeline.hpp"
#include "babylon/text.hpp"

namespace babylon {

EmbeddingVector EmbeddingVector::normalized(std::vector<double> values) {
    if (values.empty()) throw EmbedError("empty embedding");
    double sum = 0.0;
    for (double v : values) sum += v * v;
    double norm = std::sqrt(sum);
    if (norm == 0.0) throw EmbedError("zero embedding cannot be normalized");
    for (double& v : values) v /= norm;

    EmbeddingVector out;
    out.values_ = std::move(values);
    double check = 0.0;
    for (double v : out.values_) check += v * v;
    out.norm_ = std::sqrt(check);
    return out;
}

double EmbeddingVector::dot(const EmbeddingVector& other) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < values_.size() && i < other.values_.size(); ++i)
        sum += values_[i] * other.values_[i];
    return sum;
}

EmbeddingVector embed(const std::string& text, EmbeddingProvider& provider) {
    if (canonical_whitespace(text).empty()) throw EmbedError("blank text");
    return EmbeddingVector::normalized(provider.embed_raw(text));
}

std::vector<double> HashedEmbeddingProvider::embed_raw(const std::string& text) {
    std::vector<double> values(dimension_, 0.0);
    for (const auto& token : tokenize(text))
        values[fnv1a64(token) % dimension_] += 1.0;
    return values;
}

std::vector<double> RemoteEmbeddingProvider::embed_raw(const std::string& text) {
    std::size_t scheme = options_.endpoint.find("://");
    if (scheme == std::string::npos) throw EmbedError("bad embeddings endpoint");
    std::size_t path_start = options_.endpoint.find('/', scheme + 3);
    std::string host = path_start == std::string::npos ? options_.endpoint
                                                       : options_.endpoint.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/"
                                                       : options_.endpoint.substr(path_start);

    httplib::Client client(host);
    client.set_connection_timeout(options_.timeout_seconds);
    client.set_read_timeout(options_.timeout_seconds);

    httplib::Headers headers;
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body;
    body["model"] = options_.model;
    body["input"] = nlohmann::json::array({text});

    auto result = client.Post(path, headers, body.dump(), "application/json");
    if (!result) throw EmbedError("embeddings request failed: " + httplib::to_string(result.error()));
    if (result->status != 200)
        throw EmbedError("embeddings endpoint returned status " + std::to_string(result->status));
    try {
        nlohmann::json doc = nlohmann::json::parse(result->body);
        return doc.at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw EmbedError(std::string("malformed embeddings response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// VectorStore

VectorStore::VectorStore(std::size_t dimension) : dimension_(dimension) {
    if (dimension == 0) throw EmbedError("store dimension must be positive");
}

int VectorStore::add(const std::string& text, EmbeddingVector vector) {
    if (canonical_whitespace(text).empty()) throw EmbedError("blank entry text");
    if (vector.dimension() != dimension_)
        throw EmbedError("vector dimension " + std::to_string(vector.dimension()) +
                         " does not match store dimension " + std::to_string(dimension_));
    std::unique_lock lock(mutex_);
    int id = static_cast<int>(entries_.size());
    entries_.push_back({id, text, std::move(vector)});
    return id;
}

RetrievalResult VectorStore::retrieve(const EmbeddingVector& query, std::size_t top_k) const {
    std::shared_lock lock(mutex_);
    if (entries_.empty()) throw EmptyStoreError();
    if (top_k == 0) top_k = 1;

    std::vector<std::pair<double, int>> scored;  // (score, entry index)
    scored.reserve(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i)
        scored.emplace_back(query.dot(entries_[i].vector), static_cast<int>(i));

    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;  // descending score; stable keeps lower id first
    });

    RetrievalResult result;
    const std::size_t n = std::min(top_k, scored.size());
    result.hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        result.hits.push_back({entries_[static_cast<std::size_t>(scored[i].second)], scored[i].first});
    return result;
}

std::size_t VectorStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void VectorStore::save(const std::string& path) const {
    std::shared_lock lock(mutex_);
    nlohmann::json doc;
    doc["dim"] = dimension_;
    doc["entries"] = nlohmann::json::array();
    for (const auto& entry : entries_) {
        doc["entries"].push_back({{"id", entry.entry_id},
                                  {"text", entry.text},
                                  {"vector", entry.vector.values()}});
    }
    atomic_write_file(path, doc.dump() + "\n");
}

VectorStore VectorStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    nlohmann::json doc = nlohmann::json::parse(buffer.str());

    VectorStore store(doc.at("dim").get<std::size_t>());
    for (const auto& entry : doc.at("entries")) {
        store.add(entry.at("text").get<std::string>(),
                  EmbeddingVector::normalized(entry.at("vector").get<std::vector<double>>()));
    }
    return store;
}

} // namespace babylon
