#include "babylon/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>


namespace babylon {

const char* to_string(ParseAction action) {
    switch (action) {
        case ParseAction::StrictMatched: return "StrictMatched";
        case ParseAction::PoolMatched: return "PoolMatched";
        case ParseAction::Merged: return "Merged";
        case ParseAction::Created: return "Created";
    }
    return "Unknown";
}

ParseAction parse_action_from_string(const std::string& name) {
    if (name == "StrictMatched") return ParseAction::StrictMatched;
    if (name == "PoolMatched") return ParseAction::PoolMatched;
    if (name == "Merged") return ParseAction::Merged;
    if (name == "Created") return ParseAction::Created;
    throw ConfigError("unknown parse action: " + name);
}

// ---------------------------------------------------------------------------
// PartialMatchCache

std::string PartialMatchCache::key_for(const std::vector<std::string>& tokens) {
    // Unit separator cannot appear in tokens (they are whitespace-split),
    // so the join is collision-free.
    std::string key;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) key.push_back('\x1f');
        key += tokens[i];
    }
    return key;
}

const std::vector<ClusterId>* PartialMatchCache::get(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void PartialMatchCache::put(const std::string& key, std::vector<ClusterId> value) {
    for (ClusterId id : value) keys_by_cluster_[id].insert(key);
    entries_[key] = std::move(value);
}

void PartialMatchCache::invalidate_cluster(ClusterId id) {
    auto it = keys_by_cluster_.find(id);
    if (it == keys_by_cluster_.end()) return;
    for (const auto& key : it->second) entries_.erase(key);
    keys_by_cluster_.erase(it);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(TemplateExtractor& extractor, PipelineOptions options)
    : extractor_(extractor), options_(options) {}

std::optional<ParseOutcome> Pipeline::process_log(const LogRecord& record) {
    auto finish = [&](ClusterId id, ParseAction action) {
        ParseOutcome outcome;
        outcome.record = record;
        outcome.cluster_id = id;
        outcome.template_text = state_.find_cluster(id)->log_template.text();
        outcome.action = action;
        if (options_.audit_each_step) {
            auto violations = state_.audit_consistency();
            if (!violations.empty())
                throw std::logic_error("state inconsistent after line " +
                                       std::to_string(record.line_id) + ": " +
                                       violations.front().locator + ": " +
                                       violations.front().detail);
        }
        return outcome;
    };

    MatchResult match = state_.search(record.tokens);
    if (match.is_strict()) {
        if (state_.append_member(match.strict_id, record))
            cache_.invalidate_cluster(match.strict_id);
        return finish(match.strict_id, ParseAction::StrictMatched);
    }

    // Loose and no-match both go through the extractor (loose candidates
    // never short-circuit extraction).
    LogTemplate extracted;
    try {
        extracted = extractor_.extract(record, state_);
    } catch (const Error& e) {
        dead_letters_.push_back({record, e.what()});
        return std::nullopt;
    }

    if (auto pooled = state_.pool_lookup(extracted.text())) {
        ClusterId id = *pooled;
        state_.append_member(id, record);
        state_.add_syntax(id, derive_syntax_template(extracted, record.tokens));
        cache_.invalidate_cluster(id);
        return finish(id, ParseAction::PoolMatched);
    }

    // Loose-match merge, consulting the partial-match cache.
    const std::string key = PartialMatchCache::key_for(record.tokens);
    std::vector<ClusterId> candidates;
    if (const auto* cached = cache_.get(key)) {
        candidates = *cached;
    } else {
        candidates = state_.find_loose_matches(record.tokens);
        cache_.put(key, candidates);
    }
    for (ClusterId candidate : candidates) {
        const LogCluster* cluster = state_.find_cluster(candidate);
        if (!cluster) continue;
        auto merged = check_merge(record.tokens, *cluster);
        if (!merged) continue;
        // Rejected when the merged text is already pooled by another cluster.
        if (!state_.replace_template(candidate, *merged)) continue;
        state_.add_syntax(candidate, derive_syntax_template(*merged, record.tokens));
        state_.append_member(candidate, record);
        cache_.invalidate_cluster(candidate);
        return finish(candidate, ParseAction::Merged);
    }

    ClusterId id = state_.create_cluster(extracted, record,
                                         derive_syntax_template(extracted, record.tokens));
    return finish(id, ParseAction::Created);
}

Pipeline::RunResult Pipeline::run_stream(const Dataset& dataset) {
    RunResult result;
    const std::size_t calls_before = extractor_.call_count();
    const std::size_t degradations_before = extractor_.degradation_events().size();
    const std::size_t dead_before = dead_letters_.size();

    auto started = std::chrono::steady_clock::now();
    for (const auto& record : dataset.records) {
        if (auto outcome = process_log(record)) result.outcomes.push_back(std::move(*outcome));
    }
    auto elapsed = std::chrono::steady_clock::now() - started;

    result.summary.records = dataset.records.size();
    result.summary.clusters = state_.cluster_count();
    result.summary.extractor_calls = extractor_.call_count() - calls_before;
    result.summary.dead_letters = dead_letters_.size() - dead_before;
    result.summary.degradations = extractor_.degradation_events().size() - degradations_before;
    result.summary.wall_seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(elapsed).count();
    for (const auto& outcome : result.outcomes)
        ++result.summary.actions[to_string(outcome.action)];
    return result;
}

// ---------------------------------------------------------------------------
// Serialization

void atomic_write_file(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
        if (!out.flush()) throw IoError("short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("cannot rename " + tmp + " to " + path);
}

void write_outcomes_jsonl(const std::vector<ParseOutcome>& outcomes, const std::string& path) {
    std::ostringstream out;
    for (const auto& outcome : outcomes) {
        nlohmann::json line;
        line["line_id"] = outcome.record.line_id;
        line["cluster_id"] = outcome.cluster_id;
        line["template"] = outcome.template_text;
        line["action"] = to_string(outcome.action);
        out << line.dump() << '\n';
    }
    atomic_write_file(path, out.str());
}

std::vector<ParseOutcome> read_outcomes_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<ParseOutcome> outcomes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line);
        ParseOutcome outcome;
        outcome.record.line_id = doc.at("line_id").get<int>();
        outcome.cluster_id = doc.at("cluster_id").get<ClusterId>();
        outcome.template_text = doc.at("template").get<std::string>();
        outcome.action = parse_action_from_string(doc.at("action").get<std::string>());
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

void write_summary_json(const StreamSummary& summary, const std::string& path) {
    nlohmann::json doc;
    doc["records"] = summary.records;
    doc["clusters"] = summary.clusters;
    doc["extractor_calls"] = summary.extractor_calls;
    doc["dead_letters"] = summary.dead_letters;
    doc["degradations"] = summary.degradations;
    doc["wall_seconds"] = summary.wall_seconds;
    doc["actions"] = summary.actions;
    atomic_write_file(path, doc.dump(2) + "\n");
}

} // namespace babylon
