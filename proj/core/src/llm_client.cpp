#include "babylon/llm_client.hpp"

#include <cstdlib>
#include <fstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "babylon/text.hpp"

namespace babylon {

namespace {

struct ParsedUrl {
    std::string host_port;  // scheme://host:port
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw TransportError("endpoint must include scheme: " + url);
    std::size_t path_start = url.find('/', scheme + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

} // namespace

HttpChatTransport::HttpChatTransport(ChatOptions options) : options_(std::move(options)) {
    if (options_.endpoint.empty()) throw TransportError("no chat endpoint configured");
}

std::string HttpChatTransport::complete(const ChatRequest& request) {
    ParsedUrl url = split_url(options_.endpoint);

    httplib::Client client(url.host_port);
    client.set_connection_timeout(options_.timeout_seconds);
    client.set_read_timeout(options_.timeout_seconds);

    httplib::Headers headers;
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    nlohmann::json body;
    body["model"] = options_.model;
    body["temperature"] = request.temperature;
    body["messages"] = nlohmann::json::array({
        nlohmann::json{{"role", "user"}, {"content", request.prompt}},
    });

    auto result = client.Post(url.path, headers, body.dump(), "application/json");
    if (!result)
        throw TransportError("chat request failed: " + httplib::to_string(result.error()));
    if (result->status != 200)
        throw TransportError("chat endpoint returned status " + std::to_string(result->status));

    try {
        nlohmann::json doc = nlohmann::json::parse(result->body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw TransportError(std::string("malformed chat response: ") + e.what());
    }
}

CannedChatTransport::CannedChatTransport(const std::string& jsonl_path) {
    std::ifstream in(jsonl_path);
    if (!in) throw TransportError("cannot open canned fixture " + jsonl_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw TransportError("fixture line " + std::to_string(line_no) + ": " + e.what());
        }
        std::string key;
        if (doc.contains("key"))
            key = doc.at("key").get<std::string>();
        else if (doc.contains("query"))
            key = to_hex(fnv1a64(doc.at("query").get<std::string>()));
        else
            throw TransportError("fixture line " + std::to_string(line_no) +
                                 " has neither key nor query");
        responses_[key] = doc.at("response").get<std::string>();
    }
}

std::string CannedChatTransport::complete(const ChatRequest& request) {
    auto it = responses_.find(to_hex(fnv1a64(request.query)));
    if (it == responses_.end())
        throw TransportError("no canned response for query: " + request.query);
    return it->second;
}

} // namespace babylon
