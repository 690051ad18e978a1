#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "babylon/extractor.hpp"
#include "babylon/ingest.hpp"
#include "babylon/parse_core.hpp"

namespace babylon {

enum class ParseAction { StrictMatched, PoolMatched, Merged, Created };

const char* to_string(ParseAction action);
ParseAction parse_action_from_string(const std::string& name);

/// Per-line audit trail entry.
struct ParseOutcome {
    LogRecord record;
    ClusterId cluster_id = -1;
    std::string template_text;  // cluster template at processing time
    ParseAction action = ParseAction::Created;
};

/// A record the pipeline could not place due to unrecoverable extractor
/// failure; state is unchanged for such records.
struct DeadLetter {
    LogRecord record;
    std::string reason;
};

/// Cache of loose-match candidate lists keyed by the canonical token
/// sequence. A key is dropped whenever any cluster in its value set is
/// mutated, so cached lists always equal find_loose_matches as recomputed
/// at caching time.
class PartialMatchCache {
public:
    static std::string key_for(const std::vector<std::string>& tokens);

    const std::vector<ClusterId>* get(const std::string& key) const;
    void put(const std::string& key, std::vector<ClusterId> value);
    void invalidate_cluster(ClusterId id);
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, std::vector<ClusterId>> entries_;
    std::map<ClusterId, std::set<std::string>> keys_by_cluster_;
};

struct StreamSummary {
    std::size_t records = 0;
    std::size_t clusters = 0;
    std::size_t extractor_calls = 0;
    std::size_t dead_letters = 0;
    std::size_t degradations = 0;
    double wall_seconds = 0.0;
    std::map<std::string, std::size_t> actions;  // action name -> count
};

struct PipelineOptions {
    bool audit_each_step = false;  // run audit_consistency after every record
};

/// Streaming orchestration: match against the tree, extract on miss, pool
/// lookup, loose-match merge through the cache, then cluster creation.
/// State mutation is strictly sequential (one logical writer).
class Pipeline {
public:
    explicit Pipeline(TemplateExtractor& extractor, PipelineOptions options = {});

    /// Processes one record. Returns nothing when the record was routed to
    /// the dead-letter list.
    std::optional<ParseOutcome> process_log(const LogRecord& record);

    struct RunResult {
        std::vector<ParseOutcome> outcomes;
        StreamSummary summary;
    };

    /// Applies process_log in record order. Per-record errors are collected,
    /// not thrown.
    RunResult run_stream(const Dataset& dataset);

    const ParserState& state() const { return state_; }
    ParserState& state() { return state_; }
    const std::vector<DeadLetter>& dead_letters() const { return dead_letters_; }
    const PartialMatchCache& cache() const { return cache_; }
    TemplateExtractor& extractor() { return extractor_; }

private:
    void invalidate_cache_for(ClusterId id) { cache_.invalidate_cluster(id); }

    TemplateExtractor& extractor_;
    PipelineOptions options_;
    ParserState state_;
    PartialMatchCache cache_;
    std::vector<DeadLetter> dead_letters_;
};

/// JSONL of {line_id, source, content, cluster_id, template, action}.
void write_outcomes_jsonl(const std::vector<ParseOutcome>& outcomes, const std::string& path);
std::vector<ParseOutcome> read_outcomes_jsonl(const std::string& path);

void write_summary_json(const StreamSummary& summary, const std::string& path);

/// Writes text to a temp file in the target directory, then renames.
void atomic_write_file(const std::string& path, const std::string& text);

} // namespace babylon
