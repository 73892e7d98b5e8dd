#include "ezb/core/serialize.hpp"

#include "ezb/core/errors.hpp"

#include <charconv>

namespace ezb {

namespace {

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key))
        throw Error(ErrorKind::parse_error, std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string require_string(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_string()) throw Error(ErrorKind::parse_error, std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

std::int64_t require_int(const json& j, const char* key) {
    const auto& v = require(j, key);
    if (!v.is_number_integer())
        throw Error(ErrorKind::parse_error, std::string("field '") + key + "' must be an integer");
    return v.get<std::int64_t>();
}

} // namespace

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, end);
}

void to_json(json& j, Domain d) { j = std::string(to_string(d)); }

void from_json(const json& j, Domain& d) {
    if (!j.is_string()) throw Error(ErrorKind::parse_error, "domain must be a string");
    d = domain_from_string(j.get<std::string>());
}

json to_json(const UserIntent& v) {
    json j{{"text", v.text()}, {"image", nullptr}};
    if (v.image()) {
        j["image"] = {{"media_type", v.image()->media_type}, {"bytes", v.image()->bytes.size()}};
    }
    return j;
}

json to_json(const SemanticFactorSet& v) {
    json j = json::object();
    for (const auto& [d, text] : v.entries()) j[std::string(to_string(d))] = text;
    return json{{"entries", j}};
}

json to_json(const Directive& v) {
    return {{"domain", v.domain()}, {"specification", v.specification()}, {"provenance", v.provenance()}};
}

json to_json(const Plan& v) {
    json dirs = json::array();
    for (const auto& d : v.directives()) dirs.push_back(to_json(d));
    return {{"intent", to_json(v.intent())}, {"directives", dirs}, {"created_at", v.created_at()}};
}

json to_json(const ConstraintValue& v) {
    if (v.kind() == ConstraintValue::Kind::rgb) {
        const auto& c = v.rgb_value();
        return json::array({c[0], c[1], c[2]});
    }
    return v.scalar_value();
}

json to_json(const HardConstraint& v) {
    return {{"path", v.path()}, {"value", to_json(v.value())}, {"kind", std::string(to_string(v.value().kind()))}};
}

json to_json(const ConstraintSet& v) {
    json cs = json::array();
    for (const auto& c : v.constraints()) cs.push_back(to_json(c));
    return {{"domain", v.domain()}, {"constraints", cs}};
}

json to_json(const CodeSnippet& v) {
    return {{"domain", v.domain()},
            {"body", v.body()},
            {"generation_index", v.generation_index()},
            {"temperature", v.temperature()}};
}

json to_json(const Diagnostic& v) {
    json j{{"code", v.code}, {"message", v.message}, {"location", nullptr}};
    if (v.line) j["location"] = *v.line;
    if (v.subject) j["subject"] = *v.subject;
    if (!v.candidates.empty()) j["candidates"] = v.candidates;
    return j;
}

json to_json(const ValidationReport& v) {
    json ds = json::array();
    for (const auto& d : v.diagnostics()) ds.push_back(to_json(d));
    return {{"verdict", v.passed() ? "pass" : "fail"}, {"diagnostics", ds}};
}

json to_json(const LatencyLedger& v) {
    return {{"llm_micros", v.llm_micros},
            {"render_micros", v.render_micros},
            {"other_micros", v.other_micros},
            {"total_micros", v.total()}};
}

json to_json(const UsageEntry& v) {
    return {{"role", v.role},
            {"prompt_tokens", v.prompt_tokens},
            {"completion_tokens", v.completion_tokens},
            {"wall_micros", v.wall_micros},
            {"accepted", v.accepted}};
}

json to_json(const UsageLedger& v) {
    json calls = json::array();
    for (const auto& e : v.entries()) calls.push_back(to_json(e));
    return {{"prompt_tokens", v.prompt_tokens()}, {"completion_tokens", v.completion_tokens()}, {"calls", calls}};
}

UserIntent intent_from_json(const json& j) {
    // Image bytes are not part of the canonical form; only text round-trips.
    return UserIntent(require_string(j, "text"));
}

SemanticFactorSet factors_from_json(const json& j) {
    const auto& e = require(j, "entries");
    if (!e.is_object()) throw Error(ErrorKind::parse_error, "factor entries must be an object");
    std::map<Domain, std::string> m;
    for (const auto& [k, v] : e.items()) {
        if (!v.is_string()) throw Error(ErrorKind::parse_error, "factor text must be a string");
        m[domain_from_string(k)] = v.get<std::string>();
    }
    return SemanticFactorSet(std::move(m));
}

Directive directive_from_json(const json& j) {
    return Directive(require(j, "domain").get<Domain>(), require_string(j, "specification"),
                     require_string(j, "provenance"));
}

Plan plan_from_json(const json& j) {
    std::vector<Directive> ds;
    for (const auto& d : require(j, "directives")) ds.push_back(directive_from_json(d));
    return Plan(intent_from_json(require(j, "intent")), std::move(ds), require_int(j, "created_at"));
}

ConstraintValue constraint_value_from_json(const json& j, bool unit_hint) {
    if (j.is_array()) {
        if (j.size() != 3 || !j[0].is_number() || !j[1].is_number() || !j[2].is_number())
            throw Error(ErrorKind::parse_error, "RGB value must be an array of three numbers");
        return ConstraintValue::rgb(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
    }
    if (j.is_number()) {
        return unit_hint ? ConstraintValue::unit(j.get<double>()) : ConstraintValue::scalar(j.get<double>());
    }
    throw Error(ErrorKind::parse_error, "constraint value must be a number or an RGB triple");
}

HardConstraint constraint_from_json(const json& j) {
    auto path = require_string(j, "path");
    bool unit_hint = path.starts_with("shapekey.");
    if (j.contains("kind") && j["kind"].is_string()) unit_hint = j["kind"] == "unit";
    return HardConstraint(std::move(path), constraint_value_from_json(require(j, "value"), unit_hint));
}

ConstraintSet constraint_set_from_json(const json& j) {
    std::vector<HardConstraint> cs;
    for (const auto& c : require(j, "constraints")) cs.push_back(constraint_from_json(c));
    return ConstraintSet(require(j, "domain").get<Domain>(), std::move(cs));
}

CodeSnippet snippet_from_json(const json& j) {
    return CodeSnippet(require(j, "domain").get<Domain>(), require_string(j, "body"),
                       static_cast<int>(require_int(j, "generation_index")),
                       require(j, "temperature").get<double>());
}

Diagnostic diagnostic_from_json(const json& j) {
    Diagnostic d;
    d.code = require_string(j, "code");
    d.message = require_string(j, "message");
    if (j.contains("location") && j["location"].is_number_integer()) d.line = j["location"].get<int>();
    if (j.contains("subject") && j["subject"].is_string()) d.subject = j["subject"].get<std::string>();
    if (j.contains("candidates") && j["candidates"].is_array())
        d.candidates = j["candidates"].get<std::vector<std::string>>();
    return d;
}

ValidationReport report_from_json(const json& j) {
    auto verdict = require_string(j, "verdict");
    std::vector<Diagnostic> ds;
    for (const auto& d : require(j, "diagnostics")) ds.push_back(diagnostic_from_json(d));
    if (verdict == "pass") {
        if (!ds.empty()) throw Error(ErrorKind::parse_error, "pass verdict with diagnostics");
        return ValidationReport::pass();
    }
    if (verdict == "fail") return ValidationReport::fail(std::move(ds));
    throw Error(ErrorKind::parse_error, "verdict must be pass or fail");
}

LatencyLedger latency_from_json(const json& j) {
    return {require_int(j, "llm_micros"), require_int(j, "render_micros"), require_int(j, "other_micros")};
}

UsageLedger usage_from_json(const json& j) {
    UsageLedger l;
    for (const auto& c : require(j, "calls")) {
        l.add({require_string(c, "role"), require_int(c, "prompt_tokens"), require_int(c, "completion_tokens"),
               require_int(c, "wall_micros"), c.value("accepted", true)});
    }
    return l;
}

} // namespace ezb
