#pragma once

#include "ezb/core/model.hpp"
#include "ezb/core/serialize.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace ezb::llm {

struct CompletionRequest {
    std::string role_id; // planner | subagent:<domain> | debug:<domain>
    std::string system_prompt;
    std::string user_payload;
    double temperature = 0.0;
    int max_tokens = 1024;

    void validate() const;
};

struct CompletionResponse {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t wall_micros = 0;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual CompletionResponse send(const CompletionRequest& request) = 0;
    [[nodiscard]] virtual std::string model_id() const = 0;
};

// ---- pricing ---------------------------------------------------------------

// Prices in nano-dollars per 1000 tokens, so cost arithmetic stays integral.
struct Price {
    std::int64_t prompt_nano_per_1k = 0;
    std::int64_t completion_nano_per_1k = 0;
};
using PriceTable = std::map<std::string, Price>;

PriceTable price_table_from_json(const json& j);
PriceTable load_price_table(const std::string& path);
json to_json(const PriceTable& t);

// Dollar amount with four decimals, held as an integer count of 1e-4 dollars.
struct Cost {
    std::int64_t ten_thousandths = 0;
    [[nodiscard]] std::string str() const;
    [[nodiscard]] double dollars() const { return static_cast<double>(ten_thousandths) / 10000.0; }
    bool operator==(const Cost&) const = default;
};

// prompt/1000 * prompt_price + completion/1000 * completion_price, rounded half-up to 4 decimals.
Cost estimate_cost(std::int64_t prompt_tokens, std::int64_t completion_tokens, const PriceTable& prices,
                   const std::string& model_id);
Cost estimate_cost(const UsageLedger& ledger, const PriceTable& prices, const std::string& model_id);

// ---- replay ----------------------------------------------------------------

struct TranscriptTurn {
    std::string role_id;
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    // Reported latency; defaults to the provider's artificial delay.
    std::optional<std::int64_t> wall_micros;
};

std::vector<TranscriptTurn> transcript_from_json(const json& j);
std::vector<TranscriptTurn> load_transcript(const std::string& path);
json to_json(const std::vector<TranscriptTurn>& turns);

struct ReplayOptions {
    std::chrono::milliseconds delay{0};
    // Extra real sleep per call that never shows up in reported latency
    // (used to shuffle completion order in tests).
    std::function<std::chrono::microseconds(const CompletionRequest&)> jitter;
    std::string model = "replay";
};

// Scripted provider. Turns are queued per role_id and consumed in order, so
// concurrent lanes replay identically regardless of interleaving. Temperature
// is ignored but every request is recorded.
class ReplayProvider final : public ChatProvider {
public:
    explicit ReplayProvider(std::vector<TranscriptTurn> turns, ReplayOptions options = {});

    CompletionResponse send(const CompletionRequest& request) override;
    [[nodiscard]] std::string model_id() const override { return options_.model; }

    [[nodiscard]] std::vector<CompletionRequest> requests() const;
    [[nodiscard]] std::size_t remaining(const std::string& role_id) const;

private:
    mutable std::mutex mu_;
    std::map<std::string, std::deque<TranscriptTurn>> queues_;
    std::vector<CompletionRequest> requests_;
    ReplayOptions options_;
};

// ---- live ------------------------------------------------------------------

struct HttpResult {
    int status = 0;
    std::string body;
    std::string error; // non-empty on transport failure
};

using HttpPost = std::function<HttpResult(const std::string& url, const std::map<std::string, std::string>& headers,
                                          const std::string& body)>;

// Default transport (cpp-httplib).
HttpResult http_post(const std::string& url, const std::map<std::string, std::string>& headers,
                     const std::string& body);

// OpenAI-compatible chat-completions client. The bearer token is read from the
// named environment variable at call time.
class LiveProvider final : public ChatProvider {
public:
    LiveProvider(std::string endpoint, std::string credentials_env, std::string model, HttpPost post = http_post);

    CompletionResponse send(const CompletionRequest& request) override;
    [[nodiscard]] std::string model_id() const override { return model_; }

    [[nodiscard]] json request_body(const CompletionRequest& request) const;

private:
    std::string endpoint_;
    std::string credentials_env_;
    std::string model_;
    HttpPost post_;
};

struct ProviderConfig {
    enum class Kind { live, replay };
    Kind kind = Kind::replay;
    std::string endpoint;
    std::string credentials_env = "OPENAI_API_KEY";
    std::string model = "gpt-4o";
    std::string transcript_path;
    std::string price_table_path;
    std::int64_t token_ceiling = 200000;
    int artificial_delay_ms = 0;
};

// Replay configs never construct a network transport; `post` is only handed to live providers.
std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config, HttpPost post = http_post);

// ---- gateway ---------------------------------------------------------------

// Session front door for every model call. Records each call (including
// failed and rejected ones) into the session ledger and, when given, the
// caller's lane ledger; enforces the session token ceiling.
class Gateway {
public:
    static constexpr std::int64_t kDefaultCeiling = 200000;

    explicit Gateway(std::shared_ptr<ChatProvider> provider, std::int64_t token_ceiling = kDefaultCeiling);

    CompletionResponse complete(const CompletionRequest& request, UsageLedger* lane = nullptr);

    [[nodiscard]] UsageLedger ledger() const;
    [[nodiscard]] std::int64_t total_tokens() const;
    [[nodiscard]] std::int64_t token_ceiling() const { return ceiling_; }
    [[nodiscard]] std::string model_id() const { return provider_->model_id(); }
    [[nodiscard]] ChatProvider& provider() { return *provider_; }

private:
    void record(const UsageEntry& entry, UsageLedger* lane);

    std::shared_ptr<ChatProvider> provider_;
    std::int64_t ceiling_;
    mutable std::mutex mu_;
    UsageLedger ledger_;
    std::int64_t total_ = 0;
};

} // namespace ezb::llm
