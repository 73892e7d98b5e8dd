#include "ezb/planner/planner.hpp"

#include "ezb/core/errors.hpp"
#include "ezb/core/text.hpp"
#include "ezb/exec/png.hpp"
#include "ezb/exec/scene.hpp"

namespace ezb::planner {

namespace {

std::map<Domain, std::string> parse_domain_map(const json& j, const char* field) {
    if (!j.is_object()) throw Error(ErrorKind::schema_violation, std::string("'") + field + "' must be an object");
    std::map<Domain, std::string> out;
    for (const auto& [tag, text] : j.items()) {
        auto d = parse_domain(tag);
        if (!d) throw Error(ErrorKind::schema_violation, std::string(field) + ": unknown domain '" + tag + "'");
        if (!text.is_string()) throw Error(ErrorKind::schema_violation, std::string(field) + "." + tag + " must be a string");
        auto t = trim(text.get<std::string>());
        if (t.empty()) throw Error(ErrorKind::schema_violation, std::string(field) + "." + tag + " is empty");
        if (t.find(kCommandSentinelPrefix) != std::string::npos)
            throw Error(ErrorKind::schema_violation, std::string(field) + "." + tag + " contains executor commands");
        out.emplace(*d, std::move(t));
    }
    return out;
}

json domain_map_json(const std::map<Domain, std::string>& m) {
    json j = json::object();
    for (const auto& [d, t] : m) j[std::string(to_string(d))] = t;
    return j;
}

} // namespace

PlannerOutput parse_planner_output(std::string_view text) {
    auto body = trim(strip_code_fence(text));
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema_violation, std::string("planner reply is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::schema_violation, "planner reply must be a JSON object");
    if (!j.contains("factors")) throw Error(ErrorKind::schema_violation, "planner reply lacks 'factors'");
    PlannerOutput out;
    out.factors = parse_domain_map(j["factors"], "factors");
    if (j.contains("directives")) out.directives = parse_domain_map(j["directives"], "directives");
    for (const auto& [d, _] : out.directives) {
        if (!out.factors.count(d))
            throw Error(ErrorKind::schema_violation,
                        "directive for '" + std::string(to_string(d)) + "' has no matching factor");
    }
    if (j.contains("rationale") && !j["rationale"].is_null()) {
        if (!j["rationale"].is_string()) throw Error(ErrorKind::schema_violation, "'rationale' must be a string");
        out.rationale = trim(j["rationale"].get<std::string>());
    }
    return out;
}

json to_json(const PlannerOutput& out) {
    json j{{"factors", domain_map_json(out.factors)}, {"directives", domain_map_json(out.directives)}};
    if (out.rationale) j["rationale"] = *out.rationale;
    return j;
}

std::string plan_provenance(const UserIntent& intent, const std::map<Domain, std::string>& directives) {
    json j{{"prompt", intent.text()}, {"directives", domain_map_json(directives)}};
    return "plan-" + exec::hex64(exec::fnv1a64(j.dump())).substr(0, 12);
}

Planner::Planner(llm::Gateway& gateway, PlannerConfig config, Clock& clock)
    : gateway_(gateway), config_(std::move(config)), clock_(clock) {}

std::string Planner::prompt_text(const UserIntent& intent) {
    if (!intent.image()) return intent.text();
    // Image bytes never go to the provider; a pre-pass turns a handle into text.
    const auto& img = *intent.image();
    std::map<std::string, std::string> slots{
        {"media_type", img.media_type},
        {"size", std::to_string(img.bytes.size())},
        {"digest", exec::hex64(exec::fnv1a64({reinterpret_cast<const char*>(img.bytes.data()), img.bytes.size()}))},
        {"user_prompt", intent.text()}};
    llm::CompletionRequest req;
    req.role_id = std::string(kPlannerRole);
    req.system_prompt = render_template(config_.image_template_text, slots);
    req.user_payload = "reference image: " + slots["media_type"] + ", " + slots["size"] + " bytes, digest " + slots["digest"];
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;
    auto resp = gateway_.complete(req, &usage_);
    auto description = trim(resp.text);
    trace_.push_back({"image", {{"digest", slots["digest"]}, {"description", description}}});
    return intent.text() + "\n\nReference image: " + description;
}

PlannerOutput Planner::request_output(const std::string& prompt) {
    llm::CompletionRequest req;
    req.role_id = std::string(kPlannerRole);
    req.system_prompt = render_template(config_.template_text, {{"user_prompt", prompt}});
    req.user_payload = prompt;
    req.temperature = config_.temperature;
    req.max_tokens = config_.max_tokens;
    auto resp = gateway_.complete(req, &usage_);
    try {
        return parse_planner_output(resp.text);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::schema_violation) throw;
        trace_.push_back({"schema-retry", {{"error", e.what()}}});
        req.user_payload = prompt + "\n\nYour previous reply was rejected: " + e.what() +
                           "\nReply with a single JSON object with keys factors, directives and rationale.";
        auto again = gateway_.complete(req, &usage_);
        return parse_planner_output(again.text);
    }
}

SemanticFactorSet Planner::disentangle(const UserIntent& intent) {
    auto out = request_output(prompt_text(intent));
    trace_.push_back({"factors", domain_map_json(out.factors)});
    last_ = out;
    return SemanticFactorSet(out.factors);
}

Plan Planner::decompose(const SemanticFactorSet& factors, const UserIntent& intent) {
    if (factors.empty()) throw Error(ErrorKind::empty_factor_set, "no domain received a semantic factor");
    std::map<Domain, std::string> texts;
    for (const auto& [d, factor] : factors.entries()) {
        std::string spec = factor;
        if (last_ && last_->factors == factors.entries()) {
            if (auto it = last_->directives.find(d); it != last_->directives.end()) spec = it->second;
        }
        if (spec.find(kCommandSentinelPrefix) != std::string::npos)
            throw Error(ErrorKind::schema_violation, "directive for '" + std::string(to_string(d)) + "' contains executor commands");
        texts.emplace(d, std::move(spec));
    }
    auto provenance = plan_provenance(intent, texts);
    std::vector<Directive> directives;
    for (const auto& [d, spec] : texts) directives.emplace_back(d, spec, provenance);
    trace_.push_back({"directives", domain_map_json(texts)});
    if (last_ && last_->rationale) trace_.push_back({"rationale", *last_->rationale});
    return Plan(intent, std::move(directives), clock_.now_micros());
}

PlanResult Planner::plan_with_trace(const UserIntent& intent) {
    trace_.clear();
    usage_ = {};
    last_.reset();
    if (config_.no_reasoning) {
        std::map<Domain, std::string> entries;
        for (auto d : kAllDomains) entries.emplace(d, intent.text());
        auto provenance = plan_provenance(intent, entries);
        std::vector<Directive> directives;
        for (auto d : kAllDomains) directives.emplace_back(d, intent.text(), provenance);
        trace_.push_back({"bypass", {{"prompt", intent.text()}}});
        Plan p(intent, std::move(directives), clock_.now_micros());
        return {std::move(p), SemanticFactorSet(std::move(entries)), trace_, usage_};
    }
    auto factors = disentangle(intent);
    auto p = decompose(factors, intent);
    return {std::move(p), std::move(factors), trace_, usage_};
}

} // namespace ezb::planner
