#pragma once

#include <atomic>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "babylon/ingest.hpp"
#include "babylon/llm_client.hpp"
#include "babylon/parse_core.hpp"

namespace babylon {

/// One of the ten seed examples guiding variable classification.
struct SeedExample {
    std::string parameter_type;  // e.g. "timestamp"
    std::string example;         // e.g. "2017-06-09 20:10:40,123"
};

/// Default seeds covering timestamp, IPv4, IPv6, port, file path, URL,
/// hex id, UUID, integer counter, and duration.
std::vector<SeedExample> default_seed_examples();

enum class ExtractorBackend { Remote, Heuristic, Oracle };

struct ExtractorConfig {
    ExtractorBackend backend = ExtractorBackend::Heuristic;
    std::size_t k_demonstrations = 3;
    std::vector<SeedExample> seed_examples = default_seed_examples();
    double temperature = 0.0;
    std::size_t max_retries = 2;
    ChatOptions chat;  // endpoint/model for the Remote backend
};

/// A (log, template) pair embedded in the prompt to steer the model.
struct Demonstration {
    std::string content;
    LogTemplate log_template;
};

/// Structured extraction prompt. Rendering order is fixed: instructions,
/// seed examples, demonstrations, query.
struct ExtractionPrompt {
    std::string instructions;
    std::vector<SeedExample> seeds;
    std::vector<Demonstration> demonstrations;
    std::string query;

    std::string render() const;
};

/// Ranks clusters by token-set Jaccard similarity between the query and one
/// representative member, and returns the top k as demonstrations (fewer if
/// the pool is smaller). Deterministic: ties resolve to lower cluster id.
std::vector<Demonstration> select_demonstrations(const std::vector<std::string>& query_tokens,
                                                 const ParserState& state, std::size_t k);

ExtractionPrompt build_prompt(const std::string& query,
                              const std::vector<Demonstration>& demonstrations,
                              const ExtractorConfig& config);

/// Rule-based template: a token becomes a wildcard iff it contains a digit,
/// parses as an IPv4/IPv6 address, is a hex string of length >= 4, contains
/// '=', or contains '/'. Wildcard runs collapse to one <*>.
LogTemplate heuristic_template(const std::vector<std::string>& tokens);

/// Pluggable template extractor. extract() validates that the produced
/// template aligns to the log's tokens and maintains the call counter;
/// backends are safe for concurrent extract calls.
class TemplateExtractor {
public:
    virtual ~TemplateExtractor() = default;

    LogTemplate extract(const LogRecord& record, const ParserState& state);

    /// Monotone count of extract invocations since construction.
    std::size_t call_count() const { return calls_.load(); }

    /// Remote-path fallbacks and transport failures, in occurrence order.
    std::vector<std::string> degradation_events() const;

protected:
    virtual LogTemplate do_extract(const LogRecord& record, const ParserState& state) = 0;
    void note_degradation(const std::string& event);

private:
    std::atomic<std::size_t> calls_{0};
    mutable std::mutex events_mutex_;
    std::vector<std::string> events_;
};

class HeuristicExtractor : public TemplateExtractor {
protected:
    LogTemplate do_extract(const LogRecord& record, const ParserState& state) override;
};

/// Test-only backend returning the dataset's ground-truth template for the
/// record's (source, line_id). Throws MissingTruthError when absent.
class OracleExtractor : public TemplateExtractor {
public:
    explicit OracleExtractor(const Dataset& dataset_with_truth);

protected:
    LogTemplate do_extract(const LogRecord& record, const ParserState& state) override;

private:
    std::map<std::pair<std::string, int>, std::string> truth_;
};

/// Remote extractor with variable-aware k-shot prompting. The final
/// non-empty response line is taken as the template; on validation or
/// transport failure it retries up to max_retries and then falls back to
/// the heuristic, recording a degradation event.
class RemoteExtractor : public TemplateExtractor {
public:
    RemoteExtractor(ChatTransport& transport, ExtractorConfig config);

protected:
    LogTemplate do_extract(const LogRecord& record, const ParserState& state) override;

private:
    ChatTransport& transport_;
    ExtractorConfig config_;
};

/// Factory honoring config.backend. The oracle backend requires a dataset
/// with truth; the remote backend requires a transport.
std::unique_ptr<TemplateExtractor> make_extractor(const ExtractorConfig& config,
                                                  ChatTransport* transport = nullptr,
                                                  const Dataset* oracle_source = nullptr);

} // namespace babylon
