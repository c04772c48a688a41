#ifdef TOOLGAP_USE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <chrono>
#include <stdexcept>
#include <thread>

#include "toolgap/backend.hpp"

namespace toolgap {

namespace {

// Splits "http://host:port/v1/chat/completions" into client base and path.
void split_endpoint(const std::string& endpoint, std::string& base, std::string& path) {
    std::size_t scheme_end = endpoint.find("://");
    std::size_t host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    std::size_t slash = endpoint.find('/', host_start);
    if (slash == std::string::npos) {
        base = endpoint;
        path = "/v1/chat/completions";
    } else {
        base = endpoint.substr(0, slash);
        path = endpoint.substr(slash);
    }
}

bool retryable_status(int status) {
    return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

HttpBackend::HttpBackend(std::string endpoint, std::string model, std::string api_key,
                         HttpBackendOptions options)
    : model_(std::move(model)), api_key_(std::move(api_key)), options_(options) {
    split_endpoint(endpoint, base_url_, path_);
}

ChatMessage HttpBackend::complete(const ChatRequest& req) {
    const std::string body = request_to_wire(req, model_).dump();

    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    std::string last_error;
    for (int attempt = 0; attempt < options_.max_attempts; ++attempt) {
        if (attempt > 0) {
            ++retries_;
            const int backoff = options_.initial_backoff_ms << (attempt - 1);
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
        }

        httplib::Client client(base_url_);
        client.set_read_timeout(options_.timeout_sec, 0);
        client.set_connection_timeout(options_.timeout_sec, 0);

        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 401 || res->status == 403)
            throw std::runtime_error("auth error (" + std::to_string(res->status) + "): " +
                                     res->body);
        if (retryable_status(res->status)) {
            last_error = "status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200)
            throw std::runtime_error("endpoint error (" + std::to_string(res->status) + "): " +
                                     res->body);

        nlohmann::json parsed;
        try {
            parsed = nlohmann::json::parse(res->body);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("malformed chat reply: ") + e.what());
        }
        return reply_from_wire(parsed);
    }
    throw std::runtime_error("chat request failed after " + std::to_string(options_.max_attempts) +
                             " attempts: " + last_error);
}

}  // namespace toolgap
