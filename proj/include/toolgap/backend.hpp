#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace toolgap {

enum class Role { System, User, Assistant, Tool };
enum class ToolChoice { Auto, Required, None };

std::string to_string(Role r);
std::string to_string(ToolChoice c);

struct ToolCall {
    std::string id;
    std::string name;
    std::string arguments;  // serialized JSON object
};

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    std::vector<ToolCall> tool_calls;  // assistant messages only
    std::string tool_call_id;          // tool messages only
};

struct ToolSchema {
    std::string name;
    std::string description;
    nlohmann::json parameters;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    std::vector<ToolSchema> tool_schemas;
    ToolChoice tool_choice = ToolChoice::Auto;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
};

// Uniform chat interface. chat() validates the request, returns exactly one
// assistant message, raises on a missing tool call under tool_choice=required,
// and drops tool calls under tool_choice=none (the tools are unusable by
// construction there).
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string name() const = 0;
    ChatMessage chat(const ChatRequest& req);

protected:
    virtual ChatMessage complete(const ChatRequest& req) = 0;
};

// Chat-completions wire schema helpers, shared by the HTTP backend and the
// request fingerprint.
nlohmann::json request_to_wire(const ChatRequest& req, const std::string& model);
ChatMessage reply_from_wire(const nlohmann::json& body);
std::string request_fingerprint(const ChatRequest& req);

// Deterministic replay backend. Sequence mode replays replies in order;
// keyed mode routes by request fingerprint; strict mode additionally checks
// each incoming request against an expected one and names the divergent
// field. Exhaustion is an error. The full request log is kept for assertions.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(std::vector<ChatMessage> replies);
    explicit ScriptedBackend(std::map<std::string, std::vector<ChatMessage>> by_fingerprint);

    void expect_request(std::size_t turn, ChatRequest expected);

    std::string name() const override { return "scripted"; }
    const std::vector<ChatRequest>& request_log() const { return log_; }
    std::size_t calls() const { return log_.size(); }

protected:
    ChatMessage complete(const ChatRequest& req) override;

private:
    mutable std::mutex mu_;
    std::vector<ChatMessage> replies_;
    std::map<std::size_t, ChatRequest> expectations_;
    std::map<std::string, std::vector<ChatMessage>> keyed_;
    bool keyed_mode_ = false;
    std::size_t next_ = 0;
    std::vector<ChatRequest> log_;
};

struct HttpBackendOptions {
    int max_attempts = 3;
    int initial_backoff_ms = 1000;
    int timeout_sec = 120;
};

// Chat-completions client over HTTP(S). Bounded retries with exponential
// backoff on transient failures (connect errors, 429, 5xx).
class HttpBackend : public Backend {
public:
    HttpBackend(std::string endpoint, std::string model, std::string api_key,
                HttpBackendOptions options = {});

    std::string name() const override { return "http:" + model_; }
    int retries() const { return retries_.load(); }

protected:
    ChatMessage complete(const ChatRequest& req) override;

private:
    std::string base_url_;
    std::string path_;
    std::string model_;
    std::string api_key_;
    HttpBackendOptions options_;
    std::atomic<int> retries_{0};
};

// Built-in deterministic rule-based responder used by `--backend
// scripted:demo` for offline runs on the bundled toy corpus.
std::unique_ptr<Backend> make_demo_backend();

}  // namespace toolgap
