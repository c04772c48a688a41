#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <thread>

#ifdef TOOLGAP_USE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include "toolgap/backend.hpp"

using namespace toolgap;
using nlohmann::json;

namespace {

ChatRequest basic_request() {
    ChatRequest req;
    req.messages.push_back({Role::System, "You are a solver.", {}, {}});
    req.messages.push_back({Role::User, "What is 48/2?", {}, {}});
    return req;
}

ChatMessage assistant(const std::string& content) {
    ChatMessage m;
    m.role = Role::Assistant;
    m.content = content;
    return m;
}

ChatMessage assistant_with_call() {
    ChatMessage m;
    m.role = Role::Assistant;
    m.tool_calls.push_back({"c1", "calculate", R"({"expression":"48/2"})"});
    return m;
}

}  // namespace

TEST_CASE("scripted backend replays in order and errors on exhaustion") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant("one"), assistant("two"), assistant("three")});
    const auto req = basic_request();
    CHECK(backend.chat(req).content == "one");
    CHECK(backend.chat(req).content == "two");
    CHECK(backend.chat(req).content == "three");
    CHECK_THROWS_WITH_AS(backend.chat(req), "scripted backend: script exhausted",
                         std::runtime_error);
    CHECK(backend.request_log().size() == 4);
}

TEST_CASE("scripted replay carries tool calls") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant_with_call()});
    const ChatMessage reply = backend.chat(basic_request());
    REQUIRE(reply.tool_calls.size() == 1);
    CHECK(reply.tool_calls[0].name == "calculate");
    CHECK(reply.tool_calls[0].arguments == R"({"expression":"48/2"})");
}

TEST_CASE("required tool call missing is an error") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant("plain text")});
    ChatRequest req = basic_request();
    req.tool_schemas.push_back({"calculate", "", json::object()});
    req.tool_choice = ToolChoice::Required;
    CHECK_THROWS_WITH_AS(backend.chat(req), "required tool call missing", std::runtime_error);
}

TEST_CASE("tool_choice none yields a message without tool calls") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant("answer"), assistant_with_call()});
    ChatRequest req = basic_request();
    req.tool_schemas.push_back({"calculate", "", json::object()});
    req.tool_choice = ToolChoice::None;
    CHECK(backend.chat(req).tool_calls.empty());
    // Stray tool calls from a misbehaving script are dropped under none.
    CHECK(backend.chat(req).tool_calls.empty());
}

TEST_CASE("request validation") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant("x")});
    ChatRequest req;  // empty
    CHECK_THROWS(backend.chat(req));
    req.messages.push_back({Role::User, "no system first", {}, {}});
    CHECK_THROWS(backend.chat(req));
}

TEST_CASE("strict mode names the divergent field") {
    ScriptedBackend backend(std::vector<ChatMessage>{assistant("ok")});
    ChatRequest expected = basic_request();
    expected.messages[0].content = "EXPECTED SYSTEM PROMPT";
    backend.expect_request(0, expected);
    try {
        backend.chat(basic_request());
        FAIL("expected mismatch error");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("messages[0].content") != std::string::npos);
    }
}

TEST_CASE("fingerprint-keyed scripts route by request") {
    ChatRequest a = basic_request();
    ChatRequest b = basic_request();
    b.messages[1].content = "What is 6*7?";
    ScriptedBackend backend(std::map<std::string, std::vector<ChatMessage>>{
        {request_fingerprint(a), {assistant("24")}},
        {request_fingerprint(b), {assistant("42")}},
    });
    CHECK(backend.chat(b).content == "42");
    CHECK(backend.chat(a).content == "24");
    CHECK_THROWS(backend.chat(b));  // queue for b exhausted
}

TEST_CASE("wire serialization carries tools, choice, and seed") {
    ChatRequest req = basic_request();
    req.tool_schemas.push_back(
        {"calculate", "evaluate arithmetic",
         json{{"type", "object"}, {"properties", {{"expression", {{"type", "string"}}}}}}});
    req.tool_choice = ToolChoice::Required;
    req.temperature = 0.0;
    req.seed = 1234;

    const json body = request_to_wire(req, "test-model");
    CHECK(body["model"] == "test-model");
    CHECK(body["tools"].size() == 1);
    CHECK(body["tools"][0]["function"]["name"] == "calculate");
    CHECK(body["tool_choice"] == "required");
    CHECK(body["seed"] == 1234);
    CHECK(body["messages"].size() == 2);
}

TEST_CASE("wire reply parsing") {
    const json body = {
        {"choices",
         {{{"message",
            {{"role", "assistant"},
             {"content", nullptr},
             {"tool_calls",
              {{{"id", "call_0"},
                {"type", "function"},
                {"function",
                 {{"name", "calculate"}, {"arguments", R"({"expression":"48/2"})"}}}}}}}}}}}};
    const ChatMessage msg = reply_from_wire(body);
    CHECK(msg.content.empty());
    REQUIRE(msg.tool_calls.size() == 1);
    CHECK(msg.tool_calls[0].id == "call_0");

    CHECK_THROWS_WITH_AS(reply_from_wire(json{{"error", "nope"}}),
                         "chat reply missing 'choices'", std::runtime_error);
}

TEST_CASE("http backend talks chat-completions and retries on 429") {
    httplib::Server server;
    std::atomic<int> hits{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        const int n = ++hits;
        const json body = json::parse(req.body);
        CHECK(body.contains("messages"));
        CHECK(body["tools"].size() == 1);
        if (n == 1) {
            res.status = 429;
            res.set_content("slow down", "text/plain");
            return;
        }
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        const json reply = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "24"}}}}}}};
        res.set_content(reply.dump(), "application/json");
    });

    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendOptions options;
    options.initial_backoff_ms = 1;
    HttpBackend backend("http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions",
                        "test-model", "test-key", options);
    ChatRequest req = basic_request();
    req.tool_schemas.push_back({"calculate", "", json::object()});

    const ChatMessage reply = backend.chat(req);
    CHECK(reply.content == "24");
    CHECK(backend.retries() == 1);
    CHECK(hits.load() == 2);

    server.stop();
    server_thread.join();
}

TEST_CASE("http and scripted backends produce identical message streams") {
    // The same canned assistant turns served over the wire must leave the
    // caller indistinguishable from a scripted replay.
    const std::vector<json> wire_replies = {
        json{{"choices",
              {{{"message",
                 {{"role", "assistant"},
                  {"content", ""},
                  {"tool_calls",
                   {{{"id", "c1"},
                     {"type", "function"},
                     {"function",
                      {{"name", "calculate"},
                       {"arguments", R"({"expression":"48/2"})"}}}}}}}}}}}},
        json{{"choices",
              {{{"message", {{"role", "assistant"}, {"content", "the answer is <24>"}}}}}}},
    };

    httplib::Server server;
    std::atomic<std::size_t> turn{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        const std::size_t i = std::min(turn.fetch_add(1), wire_replies.size() - 1);
        res.set_content(wire_replies[i].dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendOptions options;
    options.initial_backoff_ms = 1;
    HttpBackend http("http://127.0.0.1:" + std::to_string(port), "m", "", options);

    ChatMessage scripted_call = assistant_with_call();
    scripted_call.tool_calls[0].id = "c1";
    ScriptedBackend scripted(std::vector<ChatMessage>{scripted_call,
                                                      assistant("the answer is <24>")});

    for (Backend* backend : std::initializer_list<Backend*>{&http, &scripted}) {
        ChatRequest req = basic_request();
        const ChatMessage first = backend->chat(req);
        REQUIRE(first.tool_calls.size() == 1);
        CHECK(first.tool_calls[0].name == "calculate");
        CHECK(first.tool_calls[0].arguments == R"({"expression":"48/2"})");
        const ChatMessage second = backend->chat(req);
        CHECK(second.content == "the answer is <24>");
        CHECK(second.tool_calls.empty());
    }

    server.stop();
    server_thread.join();
}

TEST_CASE("http backend surfaces schema errors") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        res.set_content(R"({"unexpected":"shape"})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    HttpBackendOptions options;
    options.initial_backoff_ms = 1;
    HttpBackend backend("http://127.0.0.1:" + std::to_string(port), "m", "", options);
    CHECK_THROWS_WITH_AS(backend.chat(basic_request()), "chat reply missing 'choices'",
                         std::runtime_error);
    server.stop();
    server_thread.join();
}
