#pragma once

#include <memory>
#include <string>

#include "snap/story_template.hpp"

namespace snap {

inline constexpr const char* kLlmApiKeyEnvVar = "SNAP_LLM_API_KEY";

struct LlmConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4";
    int max_retries = 3;       // transport-level retries per request
    int timeout_seconds = 60;
    int retry_backoff_ms = 250;
    double temperature = 0.0;
};

class LlmClient {
public:
    virtual ~LlmClient() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

// Chat-completions client over HTTP. The credential comes from the
// SNAP_LLM_API_KEY environment variable and never appears in errors or logs.
class HttpLlmClient : public LlmClient {
public:
    HttpLlmClient(LlmConfig config, std::string api_key);
    static std::unique_ptr<HttpLlmClient> from_environment(LlmConfig config);

    std::string complete(const std::string& prompt) override;

private:
    LlmConfig config_;
    std::string api_key_;
};

// Asks the model for a template, feeding validation violations back on each
// retry. Exhausting the attempts is an external-service error that points at
// the default/manual fallbacks.
StoryTemplate generate_template_llm(const SelectedFeatures& selection, LlmClient& client,
                                    int max_attempts = 3);

} // namespace snap
