#include "snap/llm_client.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "snap/errors.hpp"

namespace snap {

namespace {

struct ParsedEndpoint {
    std::string origin; // scheme://host[:port]
    std::string path;
};

ParsedEndpoint parse_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ConfigError("endpoint must start with http:// or https://: " + endpoint);
    auto path_start = endpoint.find('/', scheme_end + 3);
    ParsedEndpoint out;
    if (path_start == std::string::npos) {
        out.origin = endpoint;
        out.path = "/";
    } else {
        out.origin = endpoint.substr(0, path_start);
        out.path = endpoint.substr(path_start);
    }
    return out;
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

} // namespace

HttpLlmClient::HttpLlmClient(LlmConfig config, std::string api_key)
    : config_(std::move(config)), api_key_(std::move(api_key)) {
    if (api_key_.empty()) throw ConfigError("language model credential is empty");
}

std::unique_ptr<HttpLlmClient> HttpLlmClient::from_environment(LlmConfig config) {
    const char* key = std::getenv(kLlmApiKeyEnvVar);
    if (key == nullptr || *key == '\0')
        throw ConfigError(std::string(kLlmApiKeyEnvVar) +
                          " is not set; export it or switch to a manual/default template");
    return std::make_unique<HttpLlmClient>(std::move(config), key);
}

std::string HttpLlmClient::complete(const std::string& prompt) {
    const ParsedEndpoint endpoint = parse_endpoint(config_.endpoint);

    nlohmann::json request{
        {"model", config_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", config_.temperature},
    };
    const std::string body = request.dump();

    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(
                std::chrono::milliseconds(config_.retry_backoff_ms * (1 << (attempt - 1))));

        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(config_.timeout_seconds);
        client.set_read_timeout(config_.timeout_seconds);
        httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};

        auto result = client.Post(endpoint.path, headers, body, "application/json");
        if (!result) {
            last_error = "transport failure: " + httplib::to_string(result.error());
            continue;
        }
        if (result->status != 200) {
            last_error = "HTTP status " + std::to_string(result->status);
            if (retryable_status(result->status)) continue;
            throw ExternalServiceError("language model request failed with " + last_error);
        }
        try {
            auto doc = nlohmann::json::parse(result->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ExternalServiceError(std::string("malformed language model response: ") + e.what());
        }
    }
    throw ExternalServiceError("language model unreachable after " +
                               std::to_string(config_.max_retries + 1) + " attempts (" +
                               last_error + ")");
}

StoryTemplate generate_template_llm(const SelectedFeatures& selection, LlmClient& client,
                                    int max_attempts) {
    if (max_attempts < 1) throw ConfigError("template generation needs at least one attempt");
    std::string prompt = build_template_prompt(selection);
    std::vector<std::string> last_violations;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::string answer = client.complete(prompt);
        // trim whitespace and stray newlines around the template text
        std::size_t begin = answer.find_first_not_of(" \t\r\n");
        std::size_t end = answer.find_last_not_of(" \t\r\n");
        StoryTemplate tmpl;
        tmpl.source = TemplateSource::llm;
        tmpl.body = begin == std::string::npos ? "" : answer.substr(begin, end - begin + 1);

        last_violations = validate_template(tmpl, selection);
        if (last_violations.empty()) return tmpl;

        prompt = build_template_prompt(selection);
        prompt += "\nYour previous template was rejected for these reasons:\n";
        for (const auto& violation : last_violations) prompt += "- " + violation + "\n";
        prompt += "Write a corrected template. Answer with the template text only.\n";
    }
    std::string reasons;
    for (const auto& violation : last_violations) reasons += "\n  - " + violation;
    throw ExternalServiceError(
        "language model failed to produce a valid template after " +
        std::to_string(max_attempts) + " attempts; use the default template or supply a manual one." +
        reasons);
}

} // namespace snap
