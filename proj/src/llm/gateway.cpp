#include "ezb/llm/gateway.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/net/http.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace ezb::llm {

namespace {

std::int64_t to_nano(double dollars) {
    if (!std::isfinite(dollars) || dollars < 0.0) throw Error(ErrorKind::parse_error, "price must be a non-negative number");
    return std::llround(dollars * 1e9);
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, std::string("cannot open ") + what + " " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse_error, path + ": " + e.what());
    }
}

std::int64_t elapsed_micros(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - since).count();
}

} // namespace

void CompletionRequest::validate() const {
    if (!(temperature >= 0.0)) throw Error(ErrorKind::invalid_argument, "temperature must be >= 0");
    if (max_tokens < 1) throw Error(ErrorKind::invalid_argument, "max_tokens must be >= 1");
    if (role_id.empty()) throw Error(ErrorKind::invalid_argument, "request without role_id");
}

PriceTable price_table_from_json(const json& j) {
    if (!j.is_object()) throw Error(ErrorKind::parse_error, "price table must be an object keyed by model id");
    PriceTable t;
    for (const auto& [model, p] : j.items()) {
        if (!p.is_object() || !p.contains("prompt_per_1k") || !p.contains("completion_per_1k"))
            throw Error(ErrorKind::parse_error, "price entry for " + model + " needs prompt_per_1k and completion_per_1k");
        t[model] = {to_nano(p["prompt_per_1k"].get<double>()), to_nano(p["completion_per_1k"].get<double>())};
    }
    return t;
}

PriceTable load_price_table(const std::string& path) { return price_table_from_json(read_json_file(path, "price table")); }

json to_json(const PriceTable& t) {
    json j = json::object();
    for (const auto& [model, p] : t) {
        j[model] = {{"prompt_per_1k", static_cast<double>(p.prompt_nano_per_1k) / 1e9},
                    {"completion_per_1k", static_cast<double>(p.completion_nano_per_1k) / 1e9}};
    }
    return j;
}

std::string Cost::str() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%lld.%04lld", static_cast<long long>(ten_thousandths / 10000),
                  static_cast<long long>(ten_thousandths % 10000));
    return buf;
}

Cost estimate_cost(std::int64_t prompt_tokens, std::int64_t completion_tokens, const PriceTable& prices,
                   const std::string& model_id) {
    auto it = prices.find(model_id);
    if (it == prices.end()) throw Error(ErrorKind::unknown_model, "no price entry for model '" + model_id + "'");
    // tokens * nano$/1k tokens = pico-dollars; 1e-4 dollars = 1e8 pico-dollars.
    __int128 pico = static_cast<__int128>(prompt_tokens) * it->second.prompt_nano_per_1k +
                    static_cast<__int128>(completion_tokens) * it->second.completion_nano_per_1k;
    constexpr __int128 kUnit = 100'000'000;
    return {static_cast<std::int64_t>((pico + kUnit / 2) / kUnit)};
}

Cost estimate_cost(const UsageLedger& ledger, const PriceTable& prices, const std::string& model_id) {
    return estimate_cost(ledger.prompt_tokens(), ledger.completion_tokens(), prices, model_id);
}

std::vector<TranscriptTurn> transcript_from_json(const json& j) {
    if (!j.is_array()) throw Error(ErrorKind::parse_error, "transcript must be a JSON array");
    std::vector<TranscriptTurn> out;
    for (const auto& t : j) {
        if (!t.is_object() || !t.contains("role_id") || !t.contains("text"))
            throw Error(ErrorKind::parse_error, "transcript turn needs role_id and text");
        TranscriptTurn turn;
        turn.role_id = t["role_id"].get<std::string>();
        turn.text = t["text"].is_string() ? t["text"].get<std::string>() : t["text"].dump();
        turn.prompt_tokens = t.value("prompt_tokens", std::int64_t{0});
        turn.completion_tokens = t.value("completion_tokens", std::int64_t{0});
        if (turn.prompt_tokens < 0 || turn.completion_tokens < 0)
            throw Error(ErrorKind::parse_error, "negative token count in transcript");
        if (t.contains("wall_micros")) turn.wall_micros = t["wall_micros"].get<std::int64_t>();
        out.push_back(std::move(turn));
    }
    return out;
}

std::vector<TranscriptTurn> load_transcript(const std::string& path) {
    return transcript_from_json(read_json_file(path, "transcript"));
}

json to_json(const std::vector<TranscriptTurn>& turns) {
    json j = json::array();
    for (const auto& t : turns) {
        json e{{"role_id", t.role_id},
               {"text", t.text},
               {"prompt_tokens", t.prompt_tokens},
               {"completion_tokens", t.completion_tokens}};
        if (t.wall_micros) e["wall_micros"] = *t.wall_micros;
        j.push_back(std::move(e));
    }
    return j;
}

ReplayProvider::ReplayProvider(std::vector<TranscriptTurn> turns, ReplayOptions options) : options_(std::move(options)) {
    for (auto& t : turns) queues_[t.role_id].push_back(std::move(t));
}

CompletionResponse ReplayProvider::send(const CompletionRequest& request) {
    TranscriptTurn turn;
    {
        std::lock_guard lock(mu_);
        requests_.push_back(request);
        auto it = queues_.find(request.role_id);
        if (it == queues_.end() || it->second.empty())
            throw Error(ErrorKind::transcript_exhausted, "no scripted turn left for role '" + request.role_id + "'");
        turn = std::move(it->second.front());
        it->second.pop_front();
    }
    auto sleep_for = std::chrono::duration_cast<std::chrono::microseconds>(options_.delay);
    if (options_.jitter) sleep_for += options_.jitter(request);
    if (sleep_for.count() > 0) std::this_thread::sleep_for(sleep_for);

    CompletionResponse r;
    r.text = std::move(turn.text);
    r.prompt_tokens = turn.prompt_tokens;
    r.completion_tokens = turn.completion_tokens;
    r.wall_micros = turn.wall_micros.value_or(std::chrono::duration_cast<std::chrono::microseconds>(options_.delay).count());
    return r;
}

std::vector<CompletionRequest> ReplayProvider::requests() const {
    std::lock_guard lock(mu_);
    return requests_;
}

std::size_t ReplayProvider::remaining(const std::string& role_id) const {
    std::lock_guard lock(mu_);
    auto it = queues_.find(role_id);
    return it == queues_.end() ? 0 : it->second.size();
}

HttpResult http_post(const std::string& url, const std::map<std::string, std::string>& headers, const std::string& body) {
    auto r = net::post(url, headers, body);
    return {r.status, r.body, r.error};
}

LiveProvider::LiveProvider(std::string endpoint, std::string credentials_env, std::string model, HttpPost post)
    : endpoint_(std::move(endpoint)), credentials_env_(std::move(credentials_env)), model_(std::move(model)),
      post_(std::move(post)) {
    if (endpoint_.find('/', endpoint_.find("://") == std::string::npos ? 0 : endpoint_.find("://") + 3) ==
        std::string::npos)
        endpoint_ += "/v1/chat/completions";
}

json LiveProvider::request_body(const CompletionRequest& request) const {
    return {{"model", model_},
            {"messages",
             json::array({{{"role", "system"}, {"content", request.system_prompt}},
                          {{"role", "user"}, {"content", request.user_payload}}})},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

CompletionResponse LiveProvider::send(const CompletionRequest& request) {
    std::map<std::string, std::string> headers{{"Content-Type", "application/json"}};
    if (const char* key = std::getenv(credentials_env_.c_str()); key && *key)
        headers["Authorization"] = std::string("Bearer ") + key;
    auto start = std::chrono::steady_clock::now();
    auto res = post_(endpoint_, headers, request_body(request).dump());
    auto wall = elapsed_micros(start);
    if (!res.error.empty()) throw Error(ErrorKind::provider_unreachable, endpoint_ + ": " + res.error);
    if (res.status < 200 || res.status >= 300)
        throw Error(ErrorKind::provider_unreachable, endpoint_ + " returned HTTP " + std::to_string(res.status));
    try {
        auto j = json::parse(res.body);
        CompletionResponse r;
        r.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
        if (j.contains("usage")) {
            r.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
            r.completion_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
        }
        r.wall_micros = wall;
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::provider_unreachable, std::string("malformed completion response: ") + e.what());
    }
}

std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config, HttpPost post) {
    if (config.kind == ProviderConfig::Kind::replay) {
        ReplayOptions opts;
        opts.delay = std::chrono::milliseconds(config.artificial_delay_ms);
        opts.model = config.model;
        return std::make_shared<ReplayProvider>(load_transcript(config.transcript_path), std::move(opts));
    }
    if (config.endpoint.empty()) throw Error(ErrorKind::config_error, "live provider needs an endpoint");
    return std::make_shared<LiveProvider>(config.endpoint, config.credentials_env, config.model, std::move(post));
}

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, std::int64_t token_ceiling)
    : provider_(std::move(provider)), ceiling_(token_ceiling) {
    if (!provider_) throw Error(ErrorKind::invalid_argument, "gateway without provider");
    if (ceiling_ < 1) throw Error(ErrorKind::invalid_argument, "token ceiling must be positive");
}

void Gateway::record(const UsageEntry& entry, UsageLedger* lane) {
    ledger_.add(entry);
    total_ += entry.tokens();
    if (lane) lane->add(entry);
}

CompletionResponse Gateway::complete(const CompletionRequest& request, UsageLedger* lane) {
    request.validate();
    {
        std::lock_guard lock(mu_);
        if (total_ >= ceiling_)
            throw Error(ErrorKind::budget_exceeded, "session token ceiling of " + std::to_string(ceiling_) + " reached");
    }
    CompletionResponse resp;
    try {
        resp = provider_->send(request);
    } catch (const Error&) {
        std::lock_guard lock(mu_);
        record({request.role_id, 0, 0, 0, false}, lane);
        throw;
    }
    std::lock_guard lock(mu_);
    UsageEntry entry{request.role_id, resp.prompt_tokens, resp.completion_tokens, resp.wall_micros, true};
    if (total_ + entry.tokens() > ceiling_) {
        entry.accepted = false;
        record(entry, lane);
        throw Error(ErrorKind::budget_exceeded, "call for role '" + request.role_id + "' would exceed the session ceiling of " +
                                                    std::to_string(ceiling_) + " tokens");
    }
    record(entry, lane);
    return resp;
}

UsageLedger Gateway::ledger() const {
    std::lock_guard lock(mu_);
    return ledger_;
}

std::int64_t Gateway::total_tokens() const {
    std::lock_guard lock(mu_);
    return total_;
}

} // namespace ezb::llm
