#include "babylon/extractor.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "babylon/text.hpp"

namespace babylon {

std::vector<SeedExample> default_seed_examples() {
    return {
        {"timestamp", "2017-06-09_20:10:40.123"},
        {"IPv4 address", "10.251.43.210"},
        {"IPv6 address", "fe80::21b:21ff:fe22:e484"},
        {"port", "50010"},
        {"file path", "/var/log/hadoop/datanode.log"},
        {"URL", "http://node-21.example.com:8042/status"},
        {"hex id", "0x7f3a9c04"},
        {"UUID", "3d5f8a2e-9c41-4b76-8f02-6a1de9b40c7d"},
        {"integer counter", "4096"},
        {"duration", "387ms"},
    };
}

// ---------------------------------------------------------------------------
// Prompt assembly

std::string ExtractionPrompt::render() const {
    std::ostringstream out;
    out << instructions << "\n";
    if (!seeds.empty()) {
        out << "\nKnown parameter types with examples:\n";
        for (const auto& seed : seeds)
            out << "- " << seed.parameter_type << ": " << seed.example << "\n";
    }
    if (!demonstrations.empty()) {
        out << "\nExamples:\n";
        for (const auto& demo : demonstrations) {
            out << "Log: " << demo.content << "\n";
            out << "Template: " << demo.log_template.text() << "\n";
        }
    }
    out << "\nLog: " << query << "\nTemplate:";
    return out.str();
}

ExtractionPrompt build_prompt(const std::string& query,
                              const std::vector<Demonstration>& demonstrations,
                              const ExtractorConfig& config) {
    ExtractionPrompt prompt;
    prompt.instructions =
        "You are a log parsing assistant. For the log message given at the end:\n"
        "1. Identify which parts of the message are variables rather than constant text.\n"
        "2. Classify each variable into a type such as timestamp, IP address, port, file\n"
        "   path, URL, hex id, UUID, number, or duration.\n"
        "3. Write the log template: the message with every variable replaced by <*>.\n"
        "You may reason step by step, but output only the template on the final line.";
    prompt.seeds = config.seed_examples;
    prompt.demonstrations = demonstrations;
    if (prompt.demonstrations.size() > config.k_demonstrations)
        prompt.demonstrations.resize(config.k_demonstrations);
    prompt.query = query;
    return prompt;
}

std::vector<Demonstration> select_demonstrations(const std::vector<std::string>& query_tokens,
                                                 const ParserState& state, std::size_t k) {
    if (k == 0) return {};
    const std::set<std::string> query_set(query_tokens.begin(), query_tokens.end());

    struct Ranked {
        std::size_t intersection = 0;
        std::size_t union_size = 1;
        ClusterId id = -1;
        const LogCluster* cluster = nullptr;
    };
    std::vector<Ranked> ranked;
    for (const auto& [id, cluster] : state.clusters()) {
        if (cluster.representative_content.empty()) continue;
        // Demonstrations must align; skip clusters whose current template no
        // longer fits their representative (possible after merges).
        try {
            derive_syntax_template(cluster.log_template, cluster.representative_tokens);
        } catch (const AlignmentError&) {
            continue;
        }
        std::set<std::string> rep_set(cluster.representative_tokens.begin(),
                                      cluster.representative_tokens.end());
        std::size_t inter = 0;
        for (const auto& token : rep_set)
            if (query_set.count(token)) ++inter;
        std::size_t uni = query_set.size() + rep_set.size() - inter;
        ranked.push_back({inter, uni == 0 ? 1 : uni, id, &cluster});
    }

    // Jaccard compared as exact fractions; ties keep ascending cluster id.
    std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return a.intersection * b.union_size > b.intersection * a.union_size;
    });

    std::vector<Demonstration> demos;
    for (const auto& entry : ranked) {
        if (demos.size() >= k) break;
        demos.push_back({entry.cluster->representative_content, entry.cluster->log_template});
    }
    return demos;
}

// ---------------------------------------------------------------------------
// Heuristic variable detection

namespace {

bool contains_digit(const std::string& token) {
    return std::any_of(token.begin(), token.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_hex_string(const std::string& token) {
    if (token.size() < 4) return false;
    return std::all_of(token.begin(), token.end(),
                       [](unsigned char c) { return std::isxdigit(c) != 0; });
}

bool is_ip_address(const std::string& token) {
    unsigned char buf[sizeof(in6_addr)];
    if (inet_pton(AF_INET, token.c_str(), buf) == 1) return true;
    return inet_pton(AF_INET6, token.c_str(), buf) == 1;
}

bool looks_variable(const std::string& token) {
    return contains_digit(token) || is_ip_address(token) || is_hex_string(token) ||
           token.find('=') != std::string::npos || token.find('/') != std::string::npos;
}

} // namespace

LogTemplate heuristic_template(const std::vector<std::string>& tokens) {
    std::vector<SyntaxToken> marks;
    marks.reserve(tokens.size());
    for (const auto& token : tokens)
        marks.push_back(looks_variable(token) ? SyntaxToken::any() : SyntaxToken::lit(token));
    return template_from_mask(SyntaxTemplate(std::move(marks)));
}

// ---------------------------------------------------------------------------
// Extractor backends

LogTemplate TemplateExtractor::extract(const LogRecord& record, const ParserState& state) {
    calls_.fetch_add(1, std::memory_order_relaxed);
    LogTemplate result = do_extract(record, state);
    // Post-hoc validity: the template must align to the log regardless of
    // which backend produced it.
    derive_syntax_template(result, record.tokens);
    return result;
}

std::vector<std::string> TemplateExtractor::degradation_events() const {
    std::lock_guard<std::mutex> lock(events_mutex_);
    return events_;
}

void TemplateExtractor::note_degradation(const std::string& event) {
    std::lock_guard<std::mutex> lock(events_mutex_);
    events_.push_back(event);
}

LogTemplate HeuristicExtractor::do_extract(const LogRecord& record, const ParserState&) {
    return heuristic_template(record.tokens);
}

OracleExtractor::OracleExtractor(const Dataset& dataset_with_truth) {
    if (!dataset_with_truth.has_truth()) throw MissingTruthError();
    for (const auto& entry : *dataset_with_truth.truth)
        truth_[{dataset_with_truth.name, entry.line_id}] = entry.event_template;
}

LogTemplate OracleExtractor::do_extract(const LogRecord& record, const ParserState&) {
    auto it = truth_.find({record.source, record.line_id});
    if (it == truth_.end()) throw MissingTruthError();
    return LogTemplate(it->second);
}

RemoteExtractor::RemoteExtractor(ChatTransport& transport, ExtractorConfig config)
    : transport_(transport), config_(std::move(config)) {}

namespace {

std::string final_non_empty_line(const std::string& text) {
    std::size_t end = text.size();
    while (end > 0) {
        std::size_t start = text.find_last_of('\n', end - 1);
        std::size_t begin = start == std::string::npos ? 0 : start + 1;
        std::string line = canonical_whitespace(std::string_view(text).substr(begin, end - begin));
        if (!line.empty()) return line;
        if (start == std::string::npos) break;
        end = start;
    }
    return {};
}

} // namespace

LogTemplate RemoteExtractor::do_extract(const LogRecord& record, const ParserState& state) {
    auto demos = select_demonstrations(record.tokens, state, config_.k_demonstrations);
    ExtractionPrompt prompt = build_prompt(record.content, demos, config_);

    ChatRequest request;
    request.prompt = prompt.render();
    request.query = record.content;
    request.temperature = config_.temperature;

    std::string failure;
    for (std::size_t attempt = 0; attempt <= config_.max_retries; ++attempt) {
        std::string response;
        try {
            response = transport_.complete(request);
        } catch (const TransportError& e) {
            failure = e.what();
            continue;
        }
        std::string line = final_non_empty_line(response);
        if (line.empty()) {
            failure = "empty response";
            continue;
        }
        try {
            LogTemplate candidate{line};
            derive_syntax_template(candidate, record.tokens);
            return candidate;
        } catch (const Error& e) {
            failure = e.what();  // misaligned template; retry
        }
    }

    note_degradation("remote extraction failed for line " + std::to_string(record.line_id) +
                     " (" + failure + "); heuristic fallback");
    return heuristic_template(record.tokens);
}

std::unique_ptr<TemplateExtractor> make_extractor(const ExtractorConfig& config,
                                                  ChatTransport* transport,
                                                  const Dataset* oracle_source) {
    switch (config.backend) {
        case ExtractorBackend::Heuristic:
            return std::make_unique<HeuristicExtractor>();
        case ExtractorBackend::Oracle:
            if (!oracle_source) throw ConfigError("oracle backend requires a truth dataset");
            return std::make_unique<OracleExtractor>(*oracle_source);
        case ExtractorBackend::Remote:
            if (!transport) throw ConfigError("remote backend requires a transport");
            return std::make_unique<RemoteExtractor>(*transport, config);
    }
    throw ConfigError("unknown extractor backend");
}

} // namespace babylon
