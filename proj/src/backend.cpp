#include "toolgap/backend.hpp"

#include <stdexcept>

#include "toolgap/md5.hpp"

namespace toolgap {

using nlohmann::json;

std::string to_string(Role r) {
    switch (r) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
        case Role::Tool: return "tool";
    }
    return "user";
}

std::string to_string(ToolChoice c) {
    switch (c) {
        case ToolChoice::Auto: return "auto";
        case ToolChoice::Required: return "required";
        case ToolChoice::None: return "none";
    }
    return "auto";
}

ChatMessage Backend::chat(const ChatRequest& req) {
    if (req.messages.empty()) throw std::runtime_error("chat request has no messages");
    if (req.messages.front().role != Role::System)
        throw std::runtime_error("chat request must start with a system message");
    for (const ChatMessage& m : req.messages) {
        if (!m.tool_calls.empty() && m.role != Role::Assistant)
            throw std::runtime_error("tool_calls only allowed on assistant messages");
        if (!m.tool_call_id.empty() && m.role != Role::Tool)
            throw std::runtime_error("tool_call_id only allowed on tool messages");
    }

    ChatMessage reply = complete(req);
    reply.role = Role::Assistant;
    if (req.tool_choice == ToolChoice::Required && reply.tool_calls.empty())
        throw std::runtime_error("required tool call missing");
    if (req.tool_choice == ToolChoice::None) reply.tool_calls.clear();
    return reply;
}

json request_to_wire(const ChatRequest& req, const std::string& model) {
    json body;
    if (!model.empty()) body["model"] = model;
    json messages = json::array();
    for (const ChatMessage& m : req.messages) {
        json jm;
        jm["role"] = to_string(m.role);
        jm["content"] = m.content;
        if (!m.tool_calls.empty()) {
            json calls = json::array();
            for (const ToolCall& c : m.tool_calls) {
                calls.push_back({{"id", c.id},
                                 {"type", "function"},
                                 {"function", {{"name", c.name}, {"arguments", c.arguments}}}});
            }
            jm["tool_calls"] = std::move(calls);
        }
        if (!m.tool_call_id.empty()) jm["tool_call_id"] = m.tool_call_id;
        messages.push_back(std::move(jm));
    }
    body["messages"] = std::move(messages);
    if (!req.tool_schemas.empty()) {
        json tools = json::array();
        for (const ToolSchema& t : req.tool_schemas) {
            tools.push_back({{"type", "function"},
                             {"function",
                              {{"name", t.name},
                               {"description", t.description},
                               {"parameters", t.parameters}}}});
        }
        body["tools"] = std::move(tools);
        body["tool_choice"] = to_string(req.tool_choice);
    }
    body["temperature"] = req.temperature;
    if (req.seed) body["seed"] = *req.seed;
    return body;
}

ChatMessage reply_from_wire(const json& body) {
    if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
        throw std::runtime_error("chat reply missing 'choices'");
    const json& jm = body["choices"][0].at("message");
    ChatMessage msg;
    msg.role = Role::Assistant;
    if (jm.contains("content") && jm["content"].is_string())
        msg.content = jm["content"].get<std::string>();
    if (jm.contains("tool_calls")) {
        for (const json& jc : jm["tool_calls"]) {
            ToolCall call;
            call.id = jc.value("id", "");
            const json& fn = jc.at("function");
            call.name = fn.at("name").get<std::string>();
            const json& args = fn.at("arguments");
            call.arguments = args.is_string() ? args.get<std::string>() : args.dump();
            msg.tool_calls.push_back(std::move(call));
        }
    }
    return msg;
}

std::string request_fingerprint(const ChatRequest& req) {
    return md5_hex(request_to_wire(req, "").dump());
}

ScriptedBackend::ScriptedBackend(std::vector<ChatMessage> replies)
    : replies_(std::move(replies)) {}

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<ChatMessage>> by_fp)
    : keyed_(std::move(by_fp)), keyed_mode_(true) {}

void ScriptedBackend::expect_request(std::size_t turn, ChatRequest expected) {
    std::lock_guard<std::mutex> lock(mu_);
    expectations_[turn] = std::move(expected);
}

namespace {

// First divergent field between two requests, for strict-mode errors.
std::string diff_requests(const ChatRequest& expected, const ChatRequest& actual) {
    if (expected.tool_choice != actual.tool_choice)
        return "tool_choice (expected " + to_string(expected.tool_choice) + ", got " +
               to_string(actual.tool_choice) + ")";
    if (expected.messages.size() != actual.messages.size())
        return "message count (expected " + std::to_string(expected.messages.size()) + ", got " +
               std::to_string(actual.messages.size()) + ")";
    for (std::size_t i = 0; i < expected.messages.size(); ++i) {
        const ChatMessage& e = expected.messages[i];
        const ChatMessage& a = actual.messages[i];
        if (e.role != a.role)
            return "messages[" + std::to_string(i) + "].role";
        if (e.content != a.content)
            return "messages[" + std::to_string(i) + "].content";
    }
    if (expected.tool_schemas.size() != actual.tool_schemas.size()) return "tool_schemas";
    for (std::size_t i = 0; i < expected.tool_schemas.size(); ++i) {
        if (expected.tool_schemas[i].name != actual.tool_schemas[i].name)
            return "tool_schemas[" + std::to_string(i) + "].name";
    }
    if (expected.temperature != actual.temperature) return "temperature";
    if (expected.seed != actual.seed) return "seed";
    return "request fingerprint";
}

}  // namespace

ChatMessage ScriptedBackend::complete(const ChatRequest& req) {
    std::lock_guard<std::mutex> lock(mu_);
    log_.push_back(req);

    if (keyed_mode_) {
        const std::string fp = request_fingerprint(req);
        auto it = keyed_.find(fp);
        if (it == keyed_.end() || it->second.empty())
            throw std::runtime_error("scripted backend: no reply for request fingerprint " + fp);
        ChatMessage reply = it->second.front();
        it->second.erase(it->second.begin());
        return reply;
    }

    const std::size_t turn = next_;
    if (turn >= replies_.size()) throw std::runtime_error("scripted backend: script exhausted");
    if (auto it = expectations_.find(turn); it != expectations_.end()) {
        if (request_fingerprint(it->second) != request_fingerprint(req))
            throw std::runtime_error("scripted backend: request mismatch at turn " +
                                     std::to_string(turn) + " in " +
                                     diff_requests(it->second, req));
    }
    ++next_;
    return replies_[turn];
}

}  // namespace toolgap
