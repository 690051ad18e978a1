#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "babylon/llm_client.hpp"
#include "babylon/pipeline.hpp"
#include "babylon/vector_store.hpp"

namespace babylon {

enum class AnomalyLabel { Normal, Abnormal, Undetermined };

const char* to_string(AnomalyLabel label);

struct AnomalyVerdict {
    AnomalyLabel label = AnomalyLabel::Undetermined;
    std::string explanation;  // full backend text (or error note)
    double top_score = 0.0;   // best retrieval score for the query
};

/// The exact question posed to the classifier.
inline constexpr std::string_view kAnomalyQuestion =
    "Is the new log entry normal or abnormal, given the provided examples of normal logs?";

/// Question-answering prompt: the retrieved normal logs (verbatim, in score
/// order), the new log entry, then the question.
std::string build_anomaly_prompt(const std::string& query_log, const RetrievalResult& retrieved);

/// First case-insensitive "abnormal" wins, then "normal", else Undetermined.
/// ("abnormal" contains "normal", so it must be checked first.)
AnomalyLabel parse_verdict_label(const std::string& backend_text);

/// Classifier backend. Real backends answer from the prompt alone; the
/// keyword stub consults the retrieval scores.
class AnomalyBackend {
public:
    virtual ~AnomalyBackend() = default;
    virtual std::string answer(const std::string& prompt, const RetrievalResult& retrieved) = 0;
};

/// Hermetic stub: answers "abnormal" iff the best retrieval score is below
/// the threshold. The default 0.80 is a test fixture constant.
class KeywordStubBackend : public AnomalyBackend {
public:
    explicit KeywordStubBackend(double threshold = 0.80) : threshold_(threshold) {}
    std::string answer(const std::string& prompt, const RetrievalResult& retrieved) override;

private:
    double threshold_;
};

/// Echoes fixed text; used for narrative sections in hermetic runs.
class EchoBackend : public AnomalyBackend {
public:
    explicit EchoBackend(std::string text) : text_(std::move(text)) {}
    std::string answer(const std::string&, const RetrievalResult&) override { return text_; }

private:
    std::string text_;
};

/// Chat-completions backend for real classification and narratives.
class RemoteChatBackend : public AnomalyBackend {
public:
    RemoteChatBackend(ChatTransport& transport, double temperature = 0.0)
        : transport_(transport), temperature_(temperature) {}
    std::string answer(const std::string& prompt, const RetrievalResult& retrieved) override;

private:
    ChatTransport& transport_;
    double temperature_;
};

/// Retrieval-augmented classification over a store of normal logs:
/// embed the query, retrieve top_k, build the QA prompt, ask the backend.
class AnomalyDetector {
public:
    AnomalyDetector(const VectorStore& store, EmbeddingProvider& provider,
                    AnomalyBackend& backend, std::size_t top_k = 5);

    /// Backend failures yield Undetermined with the error as explanation.
    AnomalyVerdict classify(const std::string& query_log) const;

private:
    const VectorStore& store_;
    EmbeddingProvider& provider_;
    AnomalyBackend& backend_;
    std::size_t top_k_;
};

struct LineVerdict {
    int line_id = 0;
    AnomalyVerdict verdict;
};

/// Structured interpretation of a parsed stream: cluster census, anomaly
/// list, and an optional narrative appended verbatim from an LLM backend.
struct InterpretationReport {
    std::size_t record_count = 0;
    std::size_t cluster_count = 0;
    std::size_t anomaly_count = 0;

    struct CensusRow {
        ClusterId cluster_id = -1;
        std::string template_text;
        std::size_t members = 0;
    };
    std::vector<CensusRow> census;  // by member count desc, then cluster id

    struct AnomalyRow {
        int line_id = 0;
        std::string explanation;
    };
    std::vector<AnomalyRow> anomalies;

    std::optional<std::string> narrative;
    std::string narrative_note;  // set when the backend failed

    std::string render_text() const;
    std::string render_json() const;
};

/// Builds the report; when `narrative_backend` is non-null its summary is
/// appended verbatim (backend failure omits the narrative with a note).
InterpretationReport interpret(const std::vector<ParseOutcome>& outcomes,
                               const std::vector<LineVerdict>& verdicts,
                               AnomalyBackend* narrative_backend = nullptr);

/// JSONL of {line_id, label, explanation, top_score}.
void write_verdicts_jsonl(const std::vector<LineVerdict>& verdicts, const std::string& path);
std::vector<LineVerdict> read_verdicts_jsonl(const std::string& path);

} // namespace babylon
