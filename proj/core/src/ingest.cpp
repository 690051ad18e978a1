#include "babylon/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "babylon/text.hpp"

namespace babylon {

std::vector<std::string> tokenize(const std::string& content) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : content) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    if (tokens.empty()) throw EmptyContentError();
    return tokens;
}

namespace {

// RFC 4180 style: quoted fields may contain commas, newlines, and doubled
// quotes. Returns one row; advances `pos` past the row's final newline.
bool read_csv_row(const std::string& data, std::size_t& pos, std::vector<std::string>& row) {
    row.clear();
    if (pos >= data.size()) return false;
    std::string field;
    bool quoted = false;
    bool any = false;
    while (pos < data.size()) {
        char c = data[pos];
        if (quoted) {
            if (c == '"') {
                if (pos + 1 < data.size() && data[pos + 1] == '"') {
                    field.push_back('"');
                    pos += 2;
                } else {
                    quoted = false;
                    ++pos;
                }
            } else {
                field.push_back(c);
                ++pos;
            }
            any = true;
            continue;
        }
        if (c == '"' && field.empty()) {
            quoted = true;
            any = true;
            ++pos;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            any = true;
            ++pos;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < data.size() && data[pos + 1] == '\n') ++pos;
            ++pos;
            row.push_back(std::move(field));
            return true;
        } else {
            field.push_back(c);
            any = true;
            ++pos;
        }
    }
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        return true;
    }
    return false;
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

} // namespace

Dataset load_structured_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string data = buffer.str();

    std::size_t pos = 0;
    std::vector<std::string> header;
    if (!read_csv_row(data, pos, header)) throw SchemaError("LineId");

    std::map<std::string, std::size_t> columns;
    for (std::size_t i = 0; i < header.size(); ++i) columns[header[i]] = i;
    for (const char* required : {"LineId", "Content", "EventId", "EventTemplate"}) {
        if (!columns.count(required)) throw SchemaError(required);
    }
    const std::size_t col_line = columns["LineId"];
    const std::size_t col_content = columns["Content"];
    const std::size_t col_event = columns["EventId"];
    const std::size_t col_template = columns["EventTemplate"];

    Dataset dataset;
    dataset.name = dataset_name_for_path(path);
    dataset.truth.emplace();

    std::vector<std::string> row;
    std::size_t row_number = 1;  // header was row 1
    int expected_line_id = 1;
    while (read_csv_row(data, pos, row)) {
        ++row_number;
        if (row.size() == 1 && row[0].empty()) continue;  // trailing newline
        if (row.size() < header.size()) throw RowError(row_number, "expected " +
            std::to_string(header.size()) + " fields, got " + std::to_string(row.size()));

        int line_id = 0;
        try {
            line_id = std::stoi(row[col_line]);
        } catch (const std::exception&) {
            throw RowError(row_number, "LineId is not an integer: " + row[col_line]);
        }
        if (line_id != expected_line_id)
            throw RowError(row_number, "LineId not contiguous: expected " +
                           std::to_string(expected_line_id) + ", got " + std::to_string(line_id));
        ++expected_line_id;

        const std::string& content = row[col_content];
        if (is_blank(content)) throw RowError(row_number, "blank Content");

        LogRecord record;
        record.line_id = line_id;
        record.source = dataset.name;
        record.content = content;
        record.tokens = tokenize(content);
        dataset.records.push_back(std::move(record));

        GroundTruthEntry entry;
        entry.line_id = line_id;
        entry.content = content;
        entry.event_id = row[col_event];
        entry.event_template = row[col_template];
        dataset.truth->push_back(std::move(entry));
    }
    return dataset;
}

void write_structured_csv(const Dataset& dataset, const std::string& path) {
    if (!dataset.has_truth()) throw MissingTruthError();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << "LineId,Content,EventId,EventTemplate\n";
    for (const auto& entry : *dataset.truth) {
        out << entry.line_id << ',' << csv_quote(entry.content) << ','
            << csv_quote(entry.event_id) << ',' << csv_quote(entry.event_template) << '\n';
    }
}

namespace {

// Replaces bytes that do not form valid UTF-8 with U+FFFD.
std::string sanitize_utf8(const std::string& line) {
    static const char* replacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(line.size());
    std::size_t i = 0;
    while (i < line.size()) {
        unsigned char c = static_cast<unsigned char>(line[i]);
        std::size_t len = 0;
        if (c < 0x80) len = 1;
        else if ((c & 0xE0) == 0xC0) len = 2;
        else if ((c & 0xF0) == 0xE0) len = 3;
        else if ((c & 0xF8) == 0xF0) len = 4;
        if (len == 0 || i + len > line.size()) {
            out += replacement;
            ++i;
            continue;
        }
        bool ok = true;
        for (std::size_t j = 1; j < len; ++j) {
            if ((static_cast<unsigned char>(line[i + j]) & 0xC0) != 0x80) { ok = false; break; }
        }
        if (!ok) {
            out += replacement;
            ++i;
        } else {
            out.append(line, i, len);
            i += len;
        }
    }
    return out;
}

} // namespace

Dataset load_raw_log(const std::string& path, const std::string& source, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    Dataset dataset;
    dataset.name = source;

    LoadReport local;
    std::string line;
    int next_id = 1;
    while (std::getline(in, line)) {
        ++local.total_lines;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line)) {
            ++local.blank_lines_skipped;
            continue;
        }
        LogRecord record;
        record.line_id = next_id++;
        record.source = source;
        record.content = sanitize_utf8(line);
        record.tokens = tokenize(record.content);
        dataset.records.push_back(std::move(record));
    }
    if (report) *report = local;
    return dataset;
}

std::string dataset_name_for_path(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    std::size_t dot = base.find('.');
    if (dot != std::string::npos) base = base.substr(0, dot);
    std::size_t suffix = base.rfind("_2k");
    if (suffix != std::string::npos && suffix + 3 == base.size()) base = base.substr(0, suffix);
    return base;
}

std::vector<std::pair<std::string, std::string>>
sample_icl_pairs(const Dataset& dataset, std::size_t n, double fraction) {
    if (!dataset.has_truth()) throw MissingTruthError();

    const auto& truth = *dataset.truth;
    std::size_t prefix = static_cast<std::size_t>(fraction * static_cast<double>(truth.size()));
    prefix = std::min(prefix, truth.size());

    // First occurrence per template within the prefix.
    std::set<std::string> seen;
    std::vector<std::pair<std::string, std::string>> candidates;
    for (std::size_t i = 0; i < prefix; ++i) {
        const auto& entry = truth[i];
        if (seen.insert(entry.event_template).second)
            candidates.emplace_back(entry.content, entry.event_template);
    }

    // Stable sort by content token length keeps file order among equals.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const auto& a, const auto& b) {
                         return tokenize(a.first).size() < tokenize(b.first).size();
                     });

    if (candidates.size() <= n) return candidates;

    std::vector<std::pair<std::string, std::string>> picked;
    picked.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        picked.push_back(candidates[i * candidates.size() / n]);
    return picked;
}

} // namespace babylon
