#pragma once

#include <map>
#include <string>

#include "babylon/errors.hpp"

namespace babylon {

/// Connection settings for an OpenAI-compatible chat-completions endpoint.
struct ChatOptions {
    std::string endpoint;  // e.g. http://localhost:8080/v1/chat/completions
    std::string model = "gpt-3.5-turbo";
    double temperature = 0.0;
    int timeout_seconds = 30;
    std::string api_key_env = "BABYLON_API_KEY";
};

struct ChatRequest {
    std::string prompt;       // full rendered prompt, sent as one user message
    std::string query;        // the raw log line the prompt asks about
    double temperature = 0.0;
};

/// Transport behind every remote LLM call. Implementations must be safe for
/// concurrent complete() calls.
class ChatTransport {
public:
    virtual ~ChatTransport() = default;

    /// Returns the assistant message text. Throws TransportError on failure.
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// POSTs {model, temperature, messages:[{role,content}]} and reads
/// choices[0].message.content. The API key is read from the environment
/// variable named in ChatOptions (empty key sends no Authorization header).
class HttpChatTransport : public ChatTransport {
public:
    explicit HttpChatTransport(ChatOptions options);
    std::string complete(const ChatRequest& request) override;

private:
    ChatOptions options_;
};

/// Hermetic transport reading responses from a JSONL fixture. Each line is
/// {"key": <hex fnv1a64 of the query line>, "response": "..."}; a "query"
/// field may stand in for "key". Unknown requests raise TransportError.
class CannedChatTransport : public ChatTransport {
public:
    explicit CannedChatTransport(const std::string& jsonl_path);
    std::string complete(const ChatRequest& request) override;

    std::size_t size() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;  // key -> response text
};

} // namespace babylon
