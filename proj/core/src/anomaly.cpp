#include "babylon/anomaly.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace babylon {

const char* to_string(AnomalyLabel label) {
    switch (label) {
        case AnomalyLabel::Normal: return "Normal";
        case AnomalyLabel::Abnormal: return "Abnormal";
        case AnomalyLabel::Undetermined: return "Undetermined";
    }
    return "Undetermined";
}

std::string build_anomaly_prompt(const std::string& query_log, const RetrievalResult& retrieved) {
    std::ostringstream out;
    out << "Examples of normal log entries:\n";
    for (const auto& hit : retrieved.hits) out << "- " << hit.entry.text << "\n";
    out << "\nNew log entry:\n" << query_log << "\n\n" << kAnomalyQuestion << "\n";
    return out.str();
}

AnomalyLabel parse_verdict_label(const std::string& backend_text) {
    std::string lowered(backend_text.size(), '\0');
    std::transform(backend_text.begin(), backend_text.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    // "abnormal" contains "normal" as a substring, so it is checked first.
    if (lowered.find("abnormal") != std::string::npos) return AnomalyLabel::Abnormal;
    if (lowered.find("normal") != std::string::npos) return AnomalyLabel::Normal;
    return AnomalyLabel::Undetermined;
}

std::string KeywordStubBackend::answer(const std::string&, const RetrievalResult& retrieved) {
    return retrieved.top_score() < threshold_ ? "abnormal" : "normal";
}

std::string RemoteChatBackend::answer(const std::string& prompt, const RetrievalResult&) {
    ChatRequest request;
    request.prompt = prompt;
    request.query = prompt;
    request.temperature = temperature_;
    return transport_.complete(request);
}

AnomalyDetector::AnomalyDetector(const VectorStore& store, EmbeddingProvider& provider,
                                 AnomalyBackend& backend, std::size_t top_k)
    : store_(store), provider_(provider), backend_(backend), top_k_(top_k == 0 ? 1 : top_k) {}

AnomalyVerdict AnomalyDetector::classify(const std::string& query_log) const {
    EmbeddingVector query = embed(query_log, provider_);
    RetrievalResult retrieved = store_.retrieve(query, top_k_);

    AnomalyVerdict verdict;
    verdict.top_score = retrieved.top_score();

    std::string prompt = build_anomaly_prompt(query_log, retrieved);
    try {
        std::string text = backend_.answer(prompt, retrieved);
        verdict.label = parse_verdict_label(text);
        verdict.explanation = text;
    } catch (const Error& e) {
        verdict.label = AnomalyLabel::Undetermined;
        verdict.explanation = std::string("backend failure: ") + e.what();
    }
    return verdict;
}

// ---------------------------------------------------------------------------
// Interpretation report

InterpretationReport interpret(const std::vector<ParseOutcome>& outcomes,
                               const std::vector<LineVerdict>& verdicts,
                               AnomalyBackend* narrative_backend) {
    InterpretationReport report;
    report.record_count = outcomes.size();

    // Census: final template per cluster is the text of the last outcome
    // that touched it.
    std::map<ClusterId, InterpretationReport::CensusRow> by_cluster;
    for (const auto& outcome : outcomes) {
        auto& row = by_cluster[outcome.cluster_id];
        row.cluster_id = outcome.cluster_id;
        row.template_text = outcome.template_text;
        ++row.members;
    }
    report.cluster_count = by_cluster.size();
    for (const auto& [id, row] : by_cluster) report.census.push_back(row);
    std::stable_sort(report.census.begin(), report.census.end(),
                     [](const auto& a, const auto& b) { return a.members > b.members; });

    for (const auto& entry : verdicts) {
        if (entry.verdict.label == AnomalyLabel::Abnormal)
            report.anomalies.push_back({entry.line_id, entry.verdict.explanation});
    }
    report.anomaly_count = report.anomalies.size();

    if (narrative_backend) {
        std::ostringstream seed;
        seed << "Summarize this parsed log stream: " << report.record_count << " records, "
             << report.cluster_count << " templates, " << report.anomaly_count << " anomalies.";
        try {
            report.narrative = narrative_backend->answer(seed.str(), RetrievalResult{});
        } catch (const Error& e) {
            report.narrative_note = std::string("narrative unavailable: ") + e.what();
        }
    }
    return report;
}

void write_verdicts_jsonl(const std::vector<LineVerdict>& verdicts, const std::string& path) {
    std::ostringstream out;
    for (const auto& entry : verdicts) {
        nlohmann::json line;
        line["line_id"] = entry.line_id;
        line["label"] = to_string(entry.verdict.label);
        line["explanation"] = entry.verdict.explanation;
        line["top_score"] = entry.verdict.top_score;
        out << line.dump() << '\n';
    }
    atomic_write_file(path, out.str());
}

std::vector<LineVerdict> read_verdicts_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<LineVerdict> verdicts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json doc = nlohmann::json::parse(line);
        LineVerdict entry;
        entry.line_id = doc.at("line_id").get<int>();
        const std::string label = doc.at("label").get<std::string>();
        if (label == "Normal") entry.verdict.label = AnomalyLabel::Normal;
        else if (label == "Abnormal") entry.verdict.label = AnomalyLabel::Abnormal;
        else entry.verdict.label = AnomalyLabel::Undetermined;
        entry.verdict.explanation = doc.at("explanation").get<std::string>();
        entry.verdict.top_score = doc.at("top_score").get<double>();
        verdicts.push_back(std::move(entry));
    }
    return verdicts;
}

std::string InterpretationReport::render_text() const {
    std::ostringstream out;
    out << "log stream report\n";
    out << "=================\n";
    out << "records:   " << record_count << "\n";
    out << "templates: " << cluster_count << "\n";
    out << "anomalies: " << anomaly_count << "\n";

    out << "\ntemplate census (by member count)\n";
    for (const auto& row : census)
        out << "  [" << row.cluster_id << "] x" << row.members << "  " << row.template_text
            << "\n";

    if (!anomalies.empty()) {
        out << "\nanomalies\n";
        for (const auto& row : anomalies)
            out << "  line " << row.line_id << ": " << row.explanation << "\n";
    }

    if (narrative) {
        out << "\nnarrative\n";
        out << *narrative << "\n";
    } else if (!narrative_note.empty()) {
        out << "\nnarrative\n";
        out << "(" << narrative_note << ")\n";
    }
    return out.str();
}

std::string InterpretationReport::render_json() const {
    nlohmann::json doc;
    doc["records"] = record_count;
    doc["templates"] = cluster_count;
    doc["anomalies"] = anomaly_count;
    doc["census"] = nlohmann::json::array();
    for (const auto& row : census)
        doc["census"].push_back({{"cluster_id", row.cluster_id},
                                 {"template", row.template_text},
                                 {"members", row.members}});
    doc["anomaly_lines"] = nlohmann::json::array();
    for (const auto& row : anomalies)
        doc["anomaly_lines"].push_back({{"line_id", row.line_id}, {"explanation", row.explanation}});
    if (narrative) doc["narrative"] = *narrative;
    if (!narrative_note.empty()) doc["narrative_note"] = narrative_note;
    return doc.dump(2) + "\n";
}

} // namespace babylon
