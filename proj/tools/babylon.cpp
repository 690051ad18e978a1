// babylon: streaming log parsing, evaluation, anomaly detection, reporting.
//
// Subcommands: parse, evaluate, detect, report. Configuration precedence is
// CLI flags > config file (key = value lines) > environment > defaults; the
// API key for remote endpoints is read from BABYLON_API_KEY.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "babylon/anomaly.hpp"
#include "babylon/extractor.hpp"
#include "babylon/ingest.hpp"
#include "babylon/metrics.hpp"
#include "babylon/pipeline.hpp"
#include "babylon/text.hpp"
#include "babylon/vector_store.hpp"

namespace fs = std::filesystem;
using namespace babylon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMissingInput = 2;
constexpr int kExitCoverage = 3;
constexpr int kExitEmptyStore = 4;

struct AppConfig {
    std::string config_file;

    std::string extractor = "heuristic";  // heuristic | remote | oracle
    std::string endpoint;
    std::string model = "gpt-3.5-turbo";
    std::size_t k = 3;
    double temperature = 0.0;
    std::string fixtures;  // canned chat-completions JSONL

    std::string embed_provider = "hashed";  // hashed | remote
    std::string embed_endpoint;
    std::string embed_model = "text-embedding-ada-002";
    std::size_t dim = 64;
    std::size_t top_k = 5;
    double tau = 0.80;

    std::string input;
    std::string truth;
    std::string outcomes;
    std::string verdicts;
    std::string normals;
    std::string store;
    std::string state;
    std::string out = ".";
    std::string narrative;
    bool audit = false;
};

// Tracks which keys the config file is allowed to override: only those not
// set on the command line.
void apply_config_file(AppConfig& config, const std::set<std::string>& cli_set) {
    if (config.config_file.empty()) return;
    std::ifstream in(config.config_file);
    if (!in) throw ConfigError("cannot open config file " + config.config_file);

    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string trimmed = canonical_whitespace(line);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = canonical_whitespace(trimmed.substr(0, eq));
        std::string value = canonical_whitespace(trimmed.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        values[key] = value;
    }

    auto take = [&](const char* key, auto& slot) {
        auto it = values.find(key);
        if (it == values.end() || cli_set.count(key)) return;
        using T = std::decay_t<decltype(slot)>;
        if constexpr (std::is_same_v<T, std::string>) {
            slot = it->second;
        } else if constexpr (std::is_same_v<T, double>) {
            slot = std::stod(it->second);
        } else if constexpr (std::is_same_v<T, std::size_t>) {
            slot = static_cast<std::size_t>(std::stoul(it->second));
        } else if constexpr (std::is_same_v<T, bool>) {
            slot = it->second == "true" || it->second == "1";
        }
    };
    take("extractor", config.extractor);
    take("endpoint", config.endpoint);
    take("model", config.model);
    take("k", config.k);
    take("temperature", config.temperature);
    take("fixtures", config.fixtures);
    take("embed-provider", config.embed_provider);
    take("embed-endpoint", config.embed_endpoint);
    take("embed-model", config.embed_model);
    take("dim", config.dim);
    take("top-k", config.top_k);
    take("tau", config.tau);
    take("out", config.out);
    take("audit", config.audit);
}

void validate(const AppConfig& config) {
    for (const char* backend : {"heuristic", "remote", "oracle"}) {
        if (config.extractor == backend) goto extractor_ok;
    }
    throw ConfigError("unknown extractor backend: " + config.extractor);
extractor_ok:
    if (config.embed_provider != "hashed" && config.embed_provider != "remote")
        throw ConfigError("unknown embedding provider: " + config.embed_provider);
    if (config.temperature < 0.0 || config.temperature > 2.0)
        throw ConfigError("temperature out of range");
    if (config.tau < 0.0 || config.tau > 1.0) throw ConfigError("tau out of range");
    if (config.top_k == 0) throw ConfigError("top-k must be positive");
    if (config.dim == 0) throw ConfigError("dim must be positive");
}

Dataset load_input(const std::string& path) {
    if (path.ends_with(".csv")) return load_structured_csv(path);
    return load_raw_log(path, dataset_name_for_path(path));
}

fs::path out_path(const AppConfig& config, const std::string& name) {
    fs::create_directories(config.out);
    return fs::path(config.out) / name;
}

std::unique_ptr<ChatTransport> make_transport(const AppConfig& config) {
    if (!config.fixtures.empty())
        return std::make_unique<CannedChatTransport>(config.fixtures);
    ChatOptions options;
    options.endpoint = config.endpoint;
    options.model = config.model;
    options.temperature = config.temperature;
    return std::make_unique<HttpChatTransport>(options);
}

std::unique_ptr<EmbeddingProvider> make_provider(const AppConfig& config) {
    if (config.embed_provider == "remote") {
        ChatOptions options;
        options.endpoint = config.embed_endpoint;
        options.model = config.embed_model;
        return std::make_unique<RemoteEmbeddingProvider>(options, config.dim);
    }
    return std::make_unique<HashedEmbeddingProvider>(config.dim);
}

// ---------------------------------------------------------------------------

int cmd_parse(const AppConfig& config) {
    if (!fs::exists(config.input)) {
        std::cerr << "input not found: " << config.input << "\n";
        return kExitMissingInput;
    }

    Dataset dataset = load_input(config.input);

    std::optional<Dataset> truth;
    if (!config.truth.empty()) {
        if (!fs::exists(config.truth)) {
            std::cerr << "truth not found: " << config.truth << "\n";
            return kExitMissingInput;
        }
        truth = load_structured_csv(config.truth);
    } else if (dataset.has_truth()) {
        truth = dataset;
    }

    ExtractorConfig extractor_config;
    extractor_config.k_demonstrations = config.k;
    extractor_config.temperature = config.temperature;
    extractor_config.chat.endpoint = config.endpoint;
    extractor_config.chat.model = config.model;
    extractor_config.chat.temperature = config.temperature;

    std::unique_ptr<ChatTransport> transport;
    std::unique_ptr<TemplateExtractor> extractor;
    if (config.extractor == "heuristic") {
        extractor_config.backend = ExtractorBackend::Heuristic;
        extractor = make_extractor(extractor_config);
    } else if (config.extractor == "oracle") {
        extractor_config.backend = ExtractorBackend::Oracle;
        if (!truth) throw ConfigError("oracle extractor needs --truth or a structured input");
        extractor = make_extractor(extractor_config, nullptr, &*truth);
    } else {
        extractor_config.backend = ExtractorBackend::Remote;
        transport = make_transport(config);
        extractor = make_extractor(extractor_config, transport.get());
    }

    Pipeline pipeline(*extractor, {.audit_each_step = config.audit});
    auto result = pipeline.run_stream(dataset);

    write_outcomes_jsonl(result.outcomes, out_path(config, "outcomes.jsonl").string());
    write_summary_json(result.summary, out_path(config, "summary.json").string());
    if (!config.state.empty())
        atomic_write_file(config.state, pipeline.state().export_json() + "\n");

    std::cout << "parsed " << result.summary.records << " records into "
              << result.summary.clusters << " clusters (" << result.summary.extractor_calls
              << " extractor calls, " << result.summary.dead_letters << " dead letters)\n";
    return kExitOk;
}

int cmd_evaluate(const AppConfig& config) {
    std::string outcomes_path =
        config.outcomes.empty() ? out_path(config, "outcomes.jsonl").string() : config.outcomes;
    if (!fs::exists(outcomes_path)) {
        std::cerr << "outcomes not found: " << outcomes_path << "\n";
        return kExitMissingInput;
    }
    if (config.truth.empty() || !fs::exists(config.truth)) {
        std::cerr << "truth not found: " << config.truth << "\n";
        return kExitMissingInput;
    }

    auto outcomes = read_outcomes_jsonl(outcomes_path);
    Dataset truth = load_structured_csv(config.truth);

    MetricsReport report;
    try {
        report = evaluate(outcomes, truth);
    } catch (const CoverageError& e) {
        std::cerr << "coverage mismatch: " << e.what() << "\n";
        return kExitCoverage;
    }

    std::string table = render_metrics_table(report);
    std::cout << table;
    atomic_write_file(out_path(config, "metrics.txt").string(), table);
    atomic_write_file(out_path(config, "metrics.json").string(), metrics_to_json(report));
    return kExitOk;
}

int cmd_detect(const AppConfig& config) {
    auto provider = make_provider(config);

    std::optional<VectorStore> store;
    if (!config.store.empty() && fs::exists(config.store)) {
        store.emplace(VectorStore::load(config.store));
    } else if (!config.normals.empty()) {
        if (!fs::exists(config.normals)) {
            std::cerr << "normals not found: " << config.normals << "\n";
            return kExitMissingInput;
        }
        store.emplace(provider->dimension());
        Dataset normals = load_input(config.normals);
        for (const auto& record : normals.records)
            store->add(record.content, embed(record.content, *provider));
        if (!config.store.empty()) store->save(config.store);
    }
    if (!store || store->size() == 0) {
        std::cerr << "vector store is empty; provide --normals or --store\n";
        return kExitEmptyStore;
    }

    if (!fs::exists(config.input)) {
        std::cerr << "input not found: " << config.input << "\n";
        return kExitMissingInput;
    }
    Dataset queries = load_input(config.input);

    std::unique_ptr<ChatTransport> transport;
    std::unique_ptr<AnomalyBackend> backend;
    if (!config.endpoint.empty() || !config.fixtures.empty()) {
        transport = make_transport(config);
        backend = std::make_unique<RemoteChatBackend>(*transport, config.temperature);
    } else {
        backend = std::make_unique<KeywordStubBackend>(config.tau);
    }

    AnomalyDetector detector(*store, *provider, *backend, config.top_k);

    std::vector<LineVerdict> verdicts;
    for (const auto& record : queries.records)
        verdicts.push_back({record.line_id, detector.classify(record.content)});
    write_verdicts_jsonl(verdicts, out_path(config, "verdicts.jsonl").string());

    std::size_t abnormal = 0;
    for (const auto& v : verdicts)
        if (v.verdict.label == AnomalyLabel::Abnormal) ++abnormal;
    std::cout << "classified " << verdicts.size() << " entries, " << abnormal << " abnormal\n";
    return kExitOk;
}

int cmd_report(const AppConfig& config) {
    std::string outcomes_path =
        config.outcomes.empty() ? out_path(config, "outcomes.jsonl").string() : config.outcomes;
    if (!fs::exists(outcomes_path)) {
        std::cerr << "outcomes not found: " << outcomes_path << "\n";
        return kExitMissingInput;
    }
    auto outcomes = read_outcomes_jsonl(outcomes_path);

    std::vector<LineVerdict> verdicts;
    if (!config.verdicts.empty()) {
        if (!fs::exists(config.verdicts)) {
            std::cerr << "verdicts not found: " << config.verdicts << "\n";
            return kExitMissingInput;
        }
        verdicts = read_verdicts_jsonl(config.verdicts);
    }

    std::unique_ptr<AnomalyBackend> narrative;
    if (!config.narrative.empty()) narrative = std::make_unique<EchoBackend>(config.narrative);

    InterpretationReport report = interpret(outcomes, verdicts, narrative.get());
    std::string text = report.render_text();
    std::cout << text;
    atomic_write_file(out_path(config, "report.txt").string(), text);
    atomic_write_file(out_path(config, "report.json").string(), report.render_json());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming log template mining, anomaly detection, and evaluation"};
    app.require_subcommand(1);

    AppConfig config;
    std::set<std::string> cli_set;

    auto track = [&](CLI::Option* opt, const char* key) {
        opt->each([&cli_set, key](const std::string&) { cli_set.insert(key); });
    };
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config.config_file, "key = value config file");
        track(cmd->add_option("--out", config.out, "output directory"), "out");
    };

    CLI::App* parse = app.add_subcommand("parse", "group a log stream into template clusters");
    add_common(parse);
    parse->add_option("--input", config.input, "raw .log or loghub structured .csv")->required();
    parse->add_option("--truth", config.truth, "structured csv with ground truth");
    track(parse->add_option("--extractor", config.extractor, "heuristic | remote | oracle"),
          "extractor");
    track(parse->add_option("--endpoint", config.endpoint, "chat-completions URL"), "endpoint");
    track(parse->add_option("--model", config.model, "model name"), "model");
    track(parse->add_option("--k", config.k, "demonstrations per prompt"), "k");
    track(parse->add_option("--temperature", config.temperature, "sampling temperature"),
          "temperature");
    track(parse->add_option("--fixtures", config.fixtures, "canned responses JSONL"), "fixtures");
    parse->add_option("--state", config.state, "write a state snapshot here");
    parse->add_flag("--audit", config.audit, "audit consistency after every record");

    CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "score outcomes against ground truth");
    add_common(evaluate_cmd);
    evaluate_cmd->add_option("--outcomes", config.outcomes, "outcomes JSONL from parse");
    evaluate_cmd->add_option("--truth", config.truth, "structured csv with ground truth")
        ->required();

    CLI::App* detect = app.add_subcommand("detect", "retrieval-augmented anomaly classification");
    add_common(detect);
    detect->add_option("--input", config.input, "log lines to classify")->required();
    detect->add_option("--normals", config.normals, "normal logs used to build the store");
    detect->add_option("--store", config.store, "vector store file (loaded or saved)");
    track(detect->add_option("--top-k", config.top_k, "retrieved examples per query"), "top-k");
    track(detect->add_option("--tau", config.tau, "keyword-stub score threshold"), "tau");
    track(detect->add_option("--dim", config.dim, "hashed embedding dimension"), "dim");
    track(detect->add_option("--embed-provider", config.embed_provider, "hashed | remote"),
          "embed-provider");
    track(detect->add_option("--embed-endpoint", config.embed_endpoint, "embeddings URL"),
          "embed-endpoint");
    track(detect->add_option("--embed-model", config.embed_model, "embedding model"),
          "embed-model");
    track(detect->add_option("--endpoint", config.endpoint, "chat endpoint for the classifier"),
          "endpoint");
    track(detect->add_option("--fixtures", config.fixtures, "canned responses JSONL"), "fixtures");

    CLI::App* report = app.add_subcommand("report", "human-readable interpretation report");
    add_common(report);
    report->add_option("--outcomes", config.outcomes, "outcomes JSONL from parse");
    report->add_option("--verdicts", config.verdicts, "verdicts JSONL from detect");
    report->add_option("--narrative", config.narrative, "echo-stub narrative text");

    CLI11_PARSE(app, argc, argv);

    try {
        apply_config_file(config, cli_set);
        validate(config);
        if (parse->parsed()) return cmd_parse(config);
        if (evaluate_cmd->parsed()) return cmd_evaluate(config);
        if (detect->parsed()) return cmd_detect(config);
        if (report->parsed()) return cmd_report(config);
    } catch (const CoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCoverage;
    } catch (const EmptyStoreError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyStore;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitMissingInput;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
