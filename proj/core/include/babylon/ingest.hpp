#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "babylon/errors.hpp"

namespace babylon {

/// One raw log line. `content` is the loghub Content field: header fields
/// such as timestamp and level are already stripped by the dataset format.
struct LogRecord {
    int line_id = 0;                  // 1-based within a stream
    std::string source;               // dataset / system name
    std::string content;              // raw message text, kept verbatim
    std::vector<std::string> tokens;  // whitespace-split content
};

struct GroundTruthEntry {
    int line_id = 0;
    std::string content;
    std::string event_id;
    std::string event_template;  // ground-truth template with <*> placeholders
};

struct Dataset {
    std::string name;
    std::vector<LogRecord> records;
    std::optional<std::vector<GroundTruthEntry>> truth;  // aligned by line_id when present

    bool has_truth() const { return truth.has_value(); }
};

struct LoadReport {
    std::size_t total_lines = 0;
    std::size_t blank_lines_skipped = 0;
};

/// Splits content on runs of ASCII whitespace. No lowercasing, no variable
/// substitution; the raw message is preserved for the extractor.
/// Throws EmptyContentError for blank input.
std::vector<std::string> tokenize(const std::string& content);

/// Loads a loghub-2k style `<name>_2k.log_structured.csv`. Requires columns
/// LineId, Content, EventId, EventTemplate; extra columns are ignored.
Dataset load_structured_csv(const std::string& path);

/// Re-serializes a dataset with truth back to structured CSV form.
void write_structured_csv(const Dataset& dataset, const std::string& path);

/// Loads a plain text log, one message per line. Invalid UTF-8 bytes are
/// replaced with U+FFFD; blank lines are skipped and counted.
Dataset load_raw_log(const std::string& path, const std::string& source,
                     LoadReport* report = nullptr);

/// Deterministic in-context-learning sampler: restrict to the first
/// floor(fraction * size) records, deduplicate by event template, sort by
/// content token length, then pick n pairs at uniform rank strides.
std::vector<std::pair<std::string, std::string>>
sample_icl_pairs(const Dataset& dataset, std::size_t n, double fraction);

/// Dataset name from a file path, loghub style: basename up to the first
/// dot, with a trailing "_2k" stripped ("Apache_2k.log_structured.csv" and
/// "Apache_2k.log" both name "Apache").
std::string dataset_name_for_path(const std::string& path);

} // namespace babylon
