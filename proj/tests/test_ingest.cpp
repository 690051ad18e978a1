#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "babylon/ingest.hpp"
#include "babylon/text.hpp"

using namespace babylon;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& text)
        : path("ingest_tmp_" + name) {
        std::ofstream out(path, std::ios::binary);
        out << text;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("tokenize splits on whitespace runs") {
    CHECK(tokenize("Failed to connect to 10.0.0.1") ==
          std::vector<std::string>{"Failed", "to", "connect", "to", "10.0.0.1"});
    CHECK(tokenize("a") == std::vector<std::string>{"a"});
    CHECK(tokenize("  x \t y  ") == std::vector<std::string>{"x", "y"});
}

TEST_CASE("tokenize rejects blank content") {
    CHECK_THROWS_AS(tokenize(""), EmptyContentError);
    CHECK_THROWS_AS(tokenize("   \t "), EmptyContentError);
}

TEST_CASE("tokenize/join round trip") {
    std::mt19937 rng(11);
    const std::string alphabet = "ab 1.:\t/=<>*";
    for (int i = 0; i < 500; ++i) {
        std::string s;
        std::size_t len = rng() % 24;
        for (std::size_t j = 0; j < len; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
        std::vector<std::string> tokens;
        try {
            tokens = tokenize(s);
        } catch (const EmptyContentError&) {
            continue;
        }
        CHECK(tokenize(join_tokens(tokens)) == tokens);
    }
}

TEST_CASE("structured csv loads records and truth") {
    TempFile file("basic.csv",
                  "LineId,Content,EventId,EventTemplate\n"
                  "1,Open port 80,E1,Open port <*>\n"
                  "2,Open port 443,E1,Open port <*>\n"
                  "3,Shutdown now,E2,Shutdown now\n");
    Dataset ds = load_structured_csv(file.path);
    REQUIRE(ds.records.size() == 3);
    REQUIRE(ds.has_truth());
    CHECK(ds.truth->size() == 3);
    CHECK(ds.records[0].tokens == std::vector<std::string>{"Open", "port", "80"});
    CHECK(ds.records[2].line_id == 3);
    CHECK((*ds.truth)[2].event_template == "Shutdown now");
}

TEST_CASE("structured csv missing column is a schema error") {
    TempFile file("noschema.csv", "LineId,Content,EventId\n1,x y,E1\n");
    try {
        load_structured_csv(file.path);
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.column() == "EventTemplate");
    }
}

TEST_CASE("structured csv quoted comma in content survives a round trip") {
    TempFile file("quoted.csv",
                  "LineId,Content,EventId,EventTemplate\n"
                  "1,\"error: a, b, c\",E1,\"error: a, b, c\"\n");
    Dataset ds = load_structured_csv(file.path);
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].content == "error: a, b, c");

    const std::string copy = file.path + ".copy";
    write_structured_csv(ds, copy);
    Dataset again = load_structured_csv(copy);
    REQUIRE(again.records.size() == 1);
    CHECK(again.records[0].content == ds.records[0].content);
    CHECK((*again.truth)[0].event_template == (*ds.truth)[0].event_template);
    std::remove(copy.c_str());
}

TEST_CASE("re-serializing the 2k fixture preserves every triple") {
    Dataset ds = load_structured_csv(std::string(BABYLON_TEST_DATA_DIR) +
                                     "/CloudSys_2k.log_structured.csv");
    const std::string copy = "ingest_tmp_roundtrip.csv";
    write_structured_csv(ds, copy);
    Dataset again = load_structured_csv(copy);
    REQUIRE(again.truth->size() == ds.truth->size());
    for (std::size_t i = 0; i < ds.truth->size(); ++i) {
        const auto& a = (*ds.truth)[i];
        const auto& b = (*again.truth)[i];
        REQUIRE(a.line_id == b.line_id);
        REQUIRE(a.content == b.content);
        REQUIRE(a.event_template == b.event_template);
    }
    std::remove(copy.c_str());
}

TEST_CASE("structured csv enforces contiguous line ids") {
    TempFile file("gap.csv",
                  "LineId,Content,EventId,EventTemplate\n"
                  "1,a b,E1,a b\n"
                  "3,c d,E2,c d\n");
    CHECK_THROWS_AS(load_structured_csv(file.path), RowError);
}

TEST_CASE("raw log load skips and counts blank lines") {
    TempFile file("raw.log", "one two\n\nthree\nfour five six\n   \n");
    LoadReport report;
    Dataset ds = load_raw_log(file.path, "raw", &report);
    CHECK(ds.records.size() == 3);
    CHECK(report.blank_lines_skipped == 2);
    CHECK(ds.records[0].line_id == 1);
    CHECK(ds.records[2].line_id == 3);
    CHECK_FALSE(ds.has_truth());
}

TEST_CASE("raw log load handles empty file and CRLF") {
    TempFile empty("empty.log", "");
    CHECK(load_raw_log(empty.path, "e").records.empty());

    TempFile crlf("crlf.log", "alpha beta\r\ngamma\r\n");
    Dataset ds = load_raw_log(crlf.path, "crlf");
    REQUIRE(ds.records.size() == 2);
    CHECK(ds.records[0].content == "alpha beta");  // no trailing CR
    CHECK(ds.records[1].content == "gamma");
}

TEST_CASE("raw log load replaces invalid utf-8") {
    TempFile file("bad.log", std::string("ok \xFF\xFE bad\n"));
    Dataset ds = load_raw_log(file.path, "bad");
    REQUIRE(ds.records.size() == 1);
    CHECK(ds.records[0].content.find("\xEF\xBF\xBD") != std::string::npos);
}

namespace {

Dataset toy_truth_dataset(const std::vector<std::pair<std::string, std::string>>& rows) {
    Dataset ds;
    ds.name = "toy";
    ds.truth.emplace();
    int id = 1;
    for (const auto& [content, tmpl] : rows) {
        LogRecord record;
        record.line_id = id;
        record.source = ds.name;
        record.content = content;
        record.tokens = tokenize(content);
        ds.records.push_back(record);
        ds.truth->push_back({id, content, "E" + std::to_string(id), tmpl});
        ++id;
    }
    return ds;
}

} // namespace

TEST_CASE("icl sampling bounded by the prefix and deduplicated") {
    std::vector<std::pair<std::string, std::string>> rows;
    for (int i = 0; i < 100; ++i)
        rows.emplace_back("msg number " + std::to_string(i), "tmpl " + std::to_string(i));
    Dataset ds = toy_truth_dataset(rows);

    auto pairs = sample_icl_pairs(ds, 40, 0.10);  // prefix of 10 records
    CHECK(pairs.size() <= 10);
}

TEST_CASE("icl sampling returns every pair when candidates are scarce") {
    Dataset ds = toy_truth_dataset({
        {"a", "t1"}, {"b c", "t2"}, {"d e f", "t3"}, {"g h i j", "t4"},
        {"a again", "t1"},
    });
    auto pairs = sample_icl_pairs(ds, 4, 1.0);
    REQUIRE(pairs.size() == 4);
    std::set<std::string> templates;
    for (const auto& [content, tmpl] : pairs) templates.insert(tmpl);
    CHECK(templates == std::set<std::string>{"t1", "t2", "t3", "t4"});
}

TEST_CASE("icl sampling is deterministic and length-ordered") {
    std::vector<std::pair<std::string, std::string>> rows;
    std::mt19937 rng(3);
    for (int i = 0; i < 400; ++i) {
        std::string content = "w";
        for (unsigned j = 0; j < rng() % 9; ++j) content += " w" + std::to_string(j);
        rows.emplace_back(content + " #" + std::to_string(i), "tmpl " + std::to_string(i));
    }
    Dataset ds = toy_truth_dataset(rows);

    auto first = sample_icl_pairs(ds, 32, 0.5);
    auto second = sample_icl_pairs(ds, 32, 0.5);
    CHECK(first == second);
    REQUIRE(first.size() == 32);
    for (std::size_t i = 1; i < first.size(); ++i)
        CHECK(tokenize(first[i - 1].first).size() <= tokenize(first[i].first).size());
}

TEST_CASE("icl sampling without truth is an error") {
    Dataset ds;
    ds.records.push_back({1, "x", "a b", {"a", "b"}});
    CHECK_THROWS_AS(sample_icl_pairs(ds, 4, 0.5), MissingTruthError);
}

TEST_CASE("icl sampling draws 32 length-ordered pairs from the 2k fixture") {
    Dataset ds = load_structured_csv(std::string(BABYLON_TEST_DATA_DIR) +
                                     "/CloudSys_2k.log_structured.csv");
    REQUIRE(ds.records.size() == 2000);

    auto pairs = sample_icl_pairs(ds, 32, 0.10);  // first 200 rows
    REQUIRE(pairs.size() == 32);
    std::set<std::string> templates;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        templates.insert(pairs[i].second);
        if (i > 0)
            CHECK(tokenize(pairs[i - 1].first).size() <= tokenize(pairs[i].first).size());
    }
    CHECK(templates.size() == 32);  // deduplicated by template
    CHECK(sample_icl_pairs(ds, 32, 0.10) == pairs);
}

TEST_CASE("dataset names derive from loghub-style paths") {
    CHECK(dataset_name_for_path("/data/Apache_2k.log_structured.csv") == "Apache");
    CHECK(dataset_name_for_path("Apache_2k.log") == "Apache");
    CHECK(dataset_name_for_path("plain.log") == "plain");
}
